#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmrec/task.hpp"

namespace fmrec {

/// Feature utilities u(f,d) in [0,1] per interest dimension.
class UtilityTable {
public:
    UtilityTable() = default;
    /// Throws InvalidArgument on an empty dimension list.
    explicit UtilityTable(std::vector<std::string> dimensions);

    /// Throws InvalidArgument for values outside [0,1], UnknownName for
    /// dimensions not declared at construction.
    void set(const std::string& feature, const std::string& dimension, double utility);
    /// 0 when the feature has no entry for the dimension.
    double get(const std::string& feature, const std::string& dimension) const;
    bool has_feature(const std::string& feature) const { return values_.count(feature) != 0; }

    const std::vector<std::string>& dimensions() const noexcept { return dimensions_; }
    const std::map<std::string, std::map<std::string, double>>& entries() const noexcept { return values_; }

private:
    std::vector<std::string> dimensions_;
    std::map<std::string, std::map<std::string, double>> values_;
};

/// Per-user interest weights up(u,d) in [0,1].
struct InterestProfile {
    std::string user;
    std::map<std::string, double> weights;
};

/// Sum over selected features (restricted to `scope` when given) of
/// Σ_d u(f,d)·up(d). Features absent from the table contribute 0. Throws
/// InvalidArgument when the profile's dimensions differ from the table's.
double overall_utility(const FeatureValues& config, const UtilityTable& table, const InterestProfile& profile,
                       const std::optional<std::set<std::string>>& scope = std::nullopt);

struct RankedConfiguration {
    std::size_t index = 0;  // position in the input list
    double utility = 0.0;
};

/// Descending by utility; equal utilities keep input order.
std::vector<RankedConfiguration> rank_configurations(const std::vector<FeatureValues>& configs,
                                                     const UtilityTable& table, const InterestProfile& profile);

/// Mean of overall_utility across `profiles` (nonempty).
double group_utility(const FeatureValues& config, const UtilityTable& table,
                     const std::vector<InterestProfile>& profiles);

/// One configurator session as seen by the recommenders: specified feature
/// values and the order in which features were specified.
struct SessionLog {
    std::string session;
    std::string user;
    std::map<std::string, bool> values;
    std::map<std::string, int> ranks;
    bool completed = false;
};

/// Ordering of constraint visits/edits in a knowledge-engineering session.
struct EditLog {
    std::string session;
    std::map<std::string, int> ranks;
};

struct ValueRecommendation {
    std::string feature;
    bool value = false;
    std::vector<std::string> neighbors;
    double vote_fraction = 0.0;
};

/// Share of jointly specified features with equal values; 0 when no
/// feature is specified by both.
double user_similarity(const SessionLog& a, const SessionLog& b);

/// Nearest-neighbour value recommendation for `target`. Candidates are the
/// completed logs (other than `current`) that specify the target, ranked by
/// user_similarity descending and then by session id. The top `k` vote;
/// ties go to 0. Throws InvalidArgument if k == 0 or the target is already
/// specified, UnknownName if no candidate log specifies the target.
ValueRecommendation recommend_value(const std::vector<SessionLog>& logs, const SessionLog& current,
                                    const std::string& target, std::size_t k);

/// Similarity of two specification orders:
/// (m − Σ|ra(f) − rb(f)|) / m over the jointly ranked items, with m the
/// largest achievable sum, reached by pairing one side's ranks ascending
/// against the other's descending. m = 0 gives 1 if the ranks agree and 0
/// otherwise; no common item gives 0.
double rank_similarity(const std::map<std::string, int>& a, const std::map<std::string, int>& b);

/// Result of a next-item recommendation.
struct NextItem {
    std::string item;
    std::string neighbor;  // session whose ordering supplied the item
    double similarity = 0.0;
};

/// Generic next-item recommender over ranked item sequences. Sessions are
/// visited by rank_similarity to `current` (descending, then session id);
/// the first one ranking an item outside `specified` supplies its
/// lowest-ranked such item. Throws InvalidArgument when `current` has no
/// ranked item, UnknownName when no candidate exists.
NextItem recommend_next_item(const std::vector<std::pair<std::string, const std::map<std::string, int>*>>& sessions,
                             const std::string& current_session, const std::map<std::string, int>& current_ranks,
                             const std::set<std::string>& specified);

/// Next feature to ask about; features specified by `current` (valued or
/// ranked) are never proposed.
NextItem recommend_next_feature(const std::vector<SessionLog>& logs, const SessionLog& current);

/// Next constraint for a knowledge engineer to look at.
NextItem recommend_next_constraint(const std::vector<EditLog>& edits, const EditLog& current);

/// Keeps `rec` if consistent with C_F ∪ C_R ∪ partial, flips it if only the
/// opposite value is consistent, and returns nullopt (suppressed) otherwise.
std::optional<ValueRecommendation> consistency_filtered(const ConfigurationTask& task, const Assignment& partial,
                                                        ValueRecommendation rec);

}  // namespace fmrec
