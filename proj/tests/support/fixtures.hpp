#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing in
// here calls the solver: solution sets are computed by exhaustive
// truth-table evaluation, and model semantics are checked directly against
// the feature tree instead of the translated constraints.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fmrec/dsl.hpp"
#include "fmrec/feature_model.hpp"
#include "fmrec/formula.hpp"
#include "fmrec/io.hpp"
#include "fmrec/recommend.hpp"
#include "fmrec/task.hpp"

namespace fmrec::testing {

inline std::string data_path(const std::string& name) {
    return std::string(FMREC_DATA_DIR) + "/" + name;
}

inline FeatureModel survey_model() {
    return parse_model(io::read_file(data_path("survey.fm")));
}

/// The survey model's constraints c0..c9, written out by hand over the
/// variables of `task`.
inline std::vector<Formula> hand_coded_survey_constraints(const ConfigurationTask& task) {
    auto v = [&](const char* name) { return Formula::lit(task.index_of(name)); };
    auto sur = v("survey"), lic = v("license"), adlic = v("advancedlicense"), baslic = v("basiclicense");
    auto ab = v("ABtesting"), stat = v("statistics"), qa = v("QA"), basqa = v("basicQA"), mmqa = v("multimediaQA");
    return {
        sur,                                                                  // c0
        Formula::equivalence(sur, lic),                                       // c1
        Formula::implication(ab, sur),                                        // c2
        Formula::implication(stat, sur),                                      // c3
        Formula::equivalence(sur, qa),                                        // c4
        Formula::implication(qa, basqa || mmqa),                              // c5
        Formula::equivalence(adlic, !baslic && lic) && Formula::equivalence(baslic, !adlic && lic),  // c6
        !(ab && baslic),                                                      // c7
        Formula::implication(ab, stat),                                       // c8
        !(baslic && mmqa),                                                    // c9
    };
}

/// Every row of the 2^n truth table, as 0/1 vectors in counting order.
inline std::vector<std::vector<std::uint8_t>> truth_table(std::size_t n) {
    std::vector<std::vector<std::uint8_t>> rows;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        std::vector<std::uint8_t> row(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = (m >> i) & 1u;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline bool all_hold(const std::vector<Formula>& fs, const std::vector<std::uint8_t>& row) {
    for (const auto& f : fs)
        if (!f.evaluate(row)) return false;
    return true;
}

/// Solutions of a task by exhaustive evaluation of its formulas.
inline std::set<std::vector<std::uint8_t>> brute_force_solutions(const ConfigurationTask& task) {
    std::vector<Formula> fs;
    for (const auto& c : task.model_constraints()) fs.push_back(c.formula);
    for (const auto& r : task.requirements()) fs.push_back(Formula::lit(r.var, r.value));
    std::set<std::vector<std::uint8_t>> out;
    for (auto& row : truth_table(task.size()))
        if (all_hold(fs, row)) out.insert(row);
    return out;
}

/// Feature-model semantics checked straight from the tree, independent of
/// the constraint translation.
inline bool model_accepts(const FeatureModel& m, const std::vector<std::uint8_t>& row) {
    const auto& fs = m.features();
    if (!row[0]) return false;
    for (std::size_t i = 1; i < fs.size(); ++i) {
        const auto& f = fs[i];
        if (row[i] && !row[f.parent]) return false;
        if (f.group == no_index && f.relation == Relation::mandatory && row[f.parent] && !row[i]) return false;
    }
    for (const auto& g : m.groups()) {
        if (!row[g.parent]) continue;
        std::size_t on = 0;
        for (auto c : g.members) on += row[c];
        if (g.kind == GroupKind::alternative && on != 1) return false;
        if (g.kind == GroupKind::or_group && on < 1) return false;
    }
    for (const auto& c : m.constraints()) {
        if (c.kind == CrossTreeKind::requires_ && row[c.a] && !row[c.b]) return false;
        if (c.kind == CrossTreeKind::excludes && row[c.a] && row[c.b]) return false;
    }
    return true;
}

/// Random valid model with between 1 and `max_features` features. Names
/// are f0, f1, ... in declaration order.
inline FeatureModel random_model(std::mt19937_64& rng, std::size_t max_features, double constraint_rate = 0.3) {
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
    const std::size_t target = pick(1, max_features);

    FeatureModel m("f0");
    std::size_t next = 1;
    // Grow depth-first so indices stay in declaration order. `limit` caps
    // the indices a subtree may use, keeping room for pending group members.
    auto grow = [&](auto&& self, std::size_t parent, int depth, std::size_t limit) -> void {
        while (next < limit && coin(depth == 0 ? 0.85 : 0.55)) {
            if (limit - next >= 2 && coin(0.35)) {
                auto g = m.add_group(parent, coin(0.5) ? GroupKind::alternative : GroupKind::or_group);
                std::size_t members = std::min<std::size_t>(pick(2, 4), limit - next);
                for (std::size_t k = 0; k < members; ++k) {
                    auto id = m.add_group_member(g, "f" + std::to_string(next++));
                    if (depth < 3 && coin(0.25)) self(self, id, depth + 1, limit - (members - k - 1));
                }
            } else {
                auto id = m.add_feature(parent, "f" + std::to_string(next++),
                                        coin(0.4) ? Relation::mandatory : Relation::optional);
                if (depth < 3 && coin(0.4)) self(self, id, depth + 1, limit);
            }
        }
    };
    grow(grow, 0, 0, target);
    if (m.size() >= 3) {
        std::size_t cross = pick(0, static_cast<std::size_t>(constraint_rate * static_cast<double>(m.size())) + 1);
        for (std::size_t k = 0; k < cross; ++k) {
            std::size_t a = pick(1, m.size() - 1), b = pick(1, m.size() - 1);
            if (a == b) continue;
            m.add_constraint(coin(0.5) ? CrossTreeKind::requires_ : CrossTreeKind::excludes, a, b);
        }
    }
    return m;
}

inline UtilityTable survey_utilities() {
    return io::parse_utilities(io::read_file(data_path("utilities.csv")));
}

inline InterestProfile profile_ua() {
    return io::parse_profile(io::read_file(data_path("profile_ua.csv")), "ua");
}

inline InterestProfile profile_ub() {
    return io::parse_profile(io::read_file(data_path("profile_ub.csv")), "ub");
}

inline std::vector<SessionLog> survey_sessions() {
    return io::parse_sessions(io::read_file(data_path("sessions.csv")));
}

inline SessionLog current_session() {
    auto logs = io::parse_sessions(io::read_file(data_path("current.csv")));
    logs.front().completed = false;
    return logs.front();
}

}  // namespace fmrec::testing
