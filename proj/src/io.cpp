#include "fmrec/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fmrec/error.hpp"
#include "json.hpp"

namespace fmrec::io {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("line " + std::to_string(line) + ": '" + s + "' is not a number");
    return v;
}

int parse_int(const std::string& s, std::size_t line) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError("line " + std::to_string(line) + ": '" + s + "' is not an integer");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

// Rows after the header, which must match `expected` (case-sensitive).
std::vector<std::vector<std::string>> body(std::string_view text, const std::vector<std::string>& expected) {
    auto rows = read_csv(text);
    if (rows.empty()) throw DataError("empty CSV input");
    if (rows.front() != expected) {
        std::string want;
        for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
        throw DataError("CSV header must be '" + want + "'");
    }
    rows.erase(rows.begin());
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].size() != expected.size())
            throw DataError("line " + std::to_string(i + 2) + ": expected " + std::to_string(expected.size()) +
                            " fields");
    return rows;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    std::size_t line = 1;
    auto end_row = [&] {
        row.push_back(quoted ? field : trim(field));
        bool blank = row.size() == 1 && row[0].empty() && !any;
        if (!blank) rows.push_back(std::move(row));
        row.clear();
        field.clear();
        quoted = any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '"' && field.find_first_not_of(" \t") == std::string::npos && !quoted) {
            quoted = any = true;
            field.clear();
            bool closed = false;
            for (++i; i < text.size(); ++i) {
                if (text[i] == '\n') ++line;
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field += '"';
                        ++i;
                    } else {
                        closed = true;
                        break;
                    }
                } else {
                    field += text[i];
                }
            }
            if (!closed) throw DataError("line " + std::to_string(line) + ": unterminated quoted field");
        } else if (c == ',') {
            row.push_back(quoted ? field : trim(field));
            field.clear();
            quoted = false;
            any = true;
        } else if (c == '\n') {
            end_row();
            ++line;
        } else if (!quoted) {
            field += c;
        }
    }
    if (!field.empty() || !row.empty() || any) end_row();
    return rows;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<SessionLog> parse_sessions(std::string_view csv) {
    auto rows = body(csv, {"session_id", "user_id", "feature", "value", "rank"});
    std::vector<SessionLog> out;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::size_t line = i + 2;
        if (r[0].empty() || r[2].empty()) throw DataError("line " + std::to_string(line) + ": missing id");
        auto [it, inserted] = index.emplace(r[0], out.size());
        if (inserted) out.push_back(SessionLog{r[0], r[1], {}, {}, true});
        auto& log = out[it->second];
        if (log.user != r[1]) throw DataError("line " + std::to_string(line) + ": session changes user");
        if (!r[3].empty()) {
            if (r[3] != "0" && r[3] != "1") throw DataError("line " + std::to_string(line) + ": value must be 0 or 1");
            log.values[r[2]] = r[3] == "1";
        }
        if (!r[4].empty()) {
            int rank = parse_int(r[4], line);
            if (rank < 1) throw DataError("line " + std::to_string(line) + ": rank must be positive");
            for (const auto& [f, rk] : log.ranks)
                if (rk == rank && f != r[2])
                    throw DataError("line " + std::to_string(line) + ": duplicate rank in session " + r[0]);
            log.ranks[r[2]] = rank;
        }
    }
    return out;
}

std::string sessions_to_csv(const std::vector<SessionLog>& logs) {
    std::string out = "session_id,user_id,feature,value,rank\n";
    for (const auto& l : logs) {
        std::map<std::string, std::pair<std::string, std::string>> cells;
        for (const auto& [f, v] : l.values) cells[f].first = v ? "1" : "0";
        for (const auto& [f, r] : l.ranks) cells[f].second = std::to_string(r);
        for (const auto& [f, c] : cells)
            out += l.session + "," + l.user + "," + f + "," + c.first + "," + c.second + "\n";
    }
    return out;
}

std::vector<EditLog> parse_edits(std::string_view csv) {
    std::vector<EditLog> out;
    for (auto& s : parse_sessions(csv)) out.push_back(EditLog{s.session, std::move(s.ranks)});
    return out;
}

UtilityTable parse_utilities(std::string_view csv) {
    auto rows = body(csv, {"feature", "dimension", "utility"});
    std::vector<std::string> dims;
    for (const auto& r : rows)
        if (std::find(dims.begin(), dims.end(), r[1]) == dims.end()) dims.push_back(r[1]);
    if (dims.empty()) throw DataError("utility table has no rows");
    UtilityTable table(dims);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            table.set(rows[i][0], rows[i][1], parse_double(rows[i][2], i + 2));
        } catch (const InvalidArgument& e) {
            throw DataError("line " + std::to_string(i + 2) + ": " + e.what());
        }
    }
    return table;
}

std::string utilities_to_csv(const UtilityTable& table) {
    std::string out = "feature,dimension,utility\n";
    for (const auto& [f, dims] : table.entries())
        for (const auto& d : table.dimensions())
            if (auto it = dims.find(d); it != dims.end()) out += f + "," + d + "," + format_double(it->second) + "\n";
    return out;
}

InterestProfile parse_profile(std::string_view csv, std::string user) {
    auto rows = body(csv, {"dimension", "weight"});
    InterestProfile p{std::move(user), {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double w = parse_double(rows[i][1], i + 2);
        if (!(w >= 0.0 && w <= 1.0)) throw DataError("line " + std::to_string(i + 2) + ": weight outside [0,1]");
        if (!p.weights.emplace(rows[i][0], w).second)
            throw DataError("line " + std::to_string(i + 2) + ": duplicate dimension");
    }
    if (p.weights.empty()) throw DataError("profile has no dimensions");
    return p;
}

std::string profile_to_csv(const InterestProfile& profile) {
    std::string out = "dimension,weight\n";
    for (const auto& [d, w] : profile.weights) out += d + "," + format_double(w) + "\n";
    return out;
}

InteractionMatrix parse_matrix(std::string_view csv) {
    auto rows = read_csv(csv);
    if (rows.size() < 2) throw DataError("matrix CSV needs a header row and at least one user row");
    InteractionMatrix m;
    m.features.assign(rows[0].begin() + 1, rows[0].end());
    if (m.features.empty()) throw DataError("matrix CSV has no feature columns");
    const auto cols = static_cast<Eigen::Index>(m.features.size());
    m.values.resize(static_cast<Eigen::Index>(rows.size() - 1), cols);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != m.features.size() + 1)
            throw DataError("line " + std::to_string(r + 1) + ": expected " + std::to_string(m.features.size() + 1) +
                            " fields");
        if (std::find(m.users.begin(), m.users.end(), rows[r][0]) != m.users.end())
            throw DataError("line " + std::to_string(r + 1) + ": duplicate user '" + rows[r][0] + "'");
        m.users.push_back(rows[r][0]);
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = rows[r][static_cast<std::size_t>(c) + 1];
            double v = std::numeric_limits<double>::quiet_NaN();
            if (!cell.empty() && cell != "?") {
                v = parse_double(cell, r + 1);
                if (v < 0.0 || v > 1.0) throw DataError("line " + std::to_string(r + 1) + ": cell outside [0,1]");
            }
            m.values(static_cast<Eigen::Index>(r - 1), c) = v;
        }
    }
    return m;
}

std::string matrix_to_csv(const std::vector<std::string>& users, const std::vector<std::string>& features,
                          const Eigen::MatrixXd& values) {
    std::string out = "user";
    for (const auto& f : features) out += "," + f;
    out += "\n";
    for (Eigen::Index u = 0; u < values.rows(); ++u) {
        out += users.at(static_cast<std::size_t>(u));
        for (Eigen::Index i = 0; i < values.cols(); ++i) {
            out += ",";
            if (!InteractionMatrix::is_missing(values(u, i))) out += format_double(values(u, i));
        }
        out += "\n";
    }
    return out;
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const char* what) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array())
        throw DataError(std::string(what) + " must be a nonempty array of rows");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
            throw DataError(std::string(what) + " rows differ in length");
        for (Eigen::Index j = 0; j < c; ++j) {
            const auto& v = row[static_cast<std::size_t>(j)];
            if (!v.is_number()) throw DataError(std::string(what) + " holds a non-numeric entry");
            m(i, j) = v.get<double>();
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

FactorPair parse_factors(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("factor file is not valid JSON: ") + e.what());
    }
    FactorPair f;
    try {
        f.users = j.at("users").get<std::vector<std::string>>();
        f.features = j.at("features").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
        throw DataError("factor file needs string arrays 'users' and 'features'");
    }
    if (!j.contains("userAspects") || !j.contains("aspectFeatures"))
        throw DataError("factor file needs 'userAspects' and 'aspectFeatures'");
    f.user_aspects = matrix_from_json(j["userAspects"], "userAspects");
    f.aspect_features = matrix_from_json(j["aspectFeatures"], "aspectFeatures");
    if (f.user_aspects.rows() != static_cast<Eigen::Index>(f.users.size()) ||
        f.aspect_features.cols() != static_cast<Eigen::Index>(f.features.size()) ||
        f.user_aspects.cols() != f.aspect_features.rows())
        throw DataError("factor matrix shapes do not match the user and feature lists");
    return f;
}

std::string factors_to_json(const FactorPair& f) {
    nlohmann::json j{{"users", f.users},
                     {"features", f.features},
                     {"userAspects", matrix_to_json(f.user_aspects)},
                     {"aspectFeatures", matrix_to_json(f.aspect_features)}};
    return j.dump(2) + "\n";
}

}  // namespace fmrec::io
