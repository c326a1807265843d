#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fmrec/factorize.hpp"
#include "fmrec/recommend.hpp"

namespace fmrec::io {

/// Rows of a comma-separated file. Double-quoted fields may contain commas
/// and doubled quotes; blank lines are skipped.
std::vector<std::vector<std::string>> read_csv(std::string_view text);

std::string read_file(const std::string& path);

/// `session_id,user_id,feature,value,rank` with a header row. Either of
/// value and rank may be empty. Sessions appear in first-seen order and are
/// marked completed.
std::vector<SessionLog> parse_sessions(std::string_view csv);
std::string sessions_to_csv(const std::vector<SessionLog>& logs);

/// Ranked items of each session, e.g. constraint edits.
std::vector<EditLog> parse_edits(std::string_view csv);

/// `feature,dimension,utility`; dimensions in first-seen order.
UtilityTable parse_utilities(std::string_view csv);
std::string utilities_to_csv(const UtilityTable& table);

/// `dimension,weight`.
InterestProfile parse_profile(std::string_view csv, std::string user);
std::string profile_to_csv(const InterestProfile& profile);

/// Header row = feature ids (first cell labels the user column), first
/// column = user id; an empty cell or `?` is missing.
InteractionMatrix parse_matrix(std::string_view csv);
std::string matrix_to_csv(const std::vector<std::string>& users, const std::vector<std::string>& features,
                          const Eigen::MatrixXd& values);

/// `{"users", "features", "userAspects", "aspectFeatures"}` with the
/// factor matrices as row-major nested arrays.
FactorPair parse_factors(std::string_view json);
std::string factors_to_json(const FactorPair& f);

}  // namespace fmrec::io
