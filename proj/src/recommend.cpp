#include "fmrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "fmrec/error.hpp"
#include "fmrec/solver.hpp"

namespace fmrec {

UtilityTable::UtilityTable(std::vector<std::string> dimensions) : dimensions_(std::move(dimensions)) {
    if (dimensions_.empty()) throw InvalidArgument("utility table needs at least one dimension");
}

void UtilityTable::set(const std::string& feature, const std::string& dimension, double utility) {
    if (std::find(dimensions_.begin(), dimensions_.end(), dimension) == dimensions_.end())
        throw UnknownName("unknown dimension '" + dimension + "'");
    if (!(utility >= 0.0 && utility <= 1.0))
        throw InvalidArgument("utility of '" + feature + "' on '" + dimension + "' is outside [0,1]");
    values_[feature][dimension] = utility;
}

double UtilityTable::get(const std::string& feature, const std::string& dimension) const {
    auto f = values_.find(feature);
    if (f == values_.end()) return 0.0;
    auto d = f->second.find(dimension);
    return d == f->second.end() ? 0.0 : d->second;
}

namespace {

void check_dimensions(const UtilityTable& table, const InterestProfile& profile) {
    std::set<std::string> td(table.dimensions().begin(), table.dimensions().end());
    std::set<std::string> pd;
    for (const auto& [d, w] : profile.weights) {
        if (!(w >= 0.0 && w <= 1.0))
            throw InvalidArgument("profile weight for '" + d + "' is outside [0,1]");
        pd.insert(d);
    }
    if (td != pd)
        throw InvalidArgument("profile '" + profile.user + "' dimensions do not match the utility table");
}

}  // namespace

double overall_utility(const FeatureValues& config, const UtilityTable& table, const InterestProfile& profile,
                       const std::optional<std::set<std::string>>& scope) {
    check_dimensions(table, profile);
    double total = 0.0;
    for (const auto& [feature, selected] : config) {
        if (!selected) continue;
        if (scope && !scope->count(feature)) continue;
        for (const auto& d : table.dimensions()) total += table.get(feature, d) * profile.weights.at(d);
    }
    return total;
}

std::vector<RankedConfiguration> rank_configurations(const std::vector<FeatureValues>& configs,
                                                     const UtilityTable& table, const InterestProfile& profile) {
    std::vector<RankedConfiguration> out;
    out.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i)
        out.push_back({i, overall_utility(configs[i], table, profile)});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.utility > b.utility; });
    return out;
}

double group_utility(const FeatureValues& config, const UtilityTable& table,
                     const std::vector<InterestProfile>& profiles) {
    if (profiles.empty()) throw InvalidArgument("group utility needs at least one profile");
    double sum = 0.0;
    for (const auto& p : profiles) sum += overall_utility(config, table, p);
    return sum / static_cast<double>(profiles.size());
}

double user_similarity(const SessionLog& a, const SessionLog& b) {
    std::size_t common = 0, agree = 0;
    for (const auto& [f, v] : a.values) {
        auto it = b.values.find(f);
        if (it == b.values.end()) continue;
        ++common;
        if (it->second == v) ++agree;
    }
    if (common == 0) return 0.0;
    return static_cast<double>(agree) / static_cast<double>(common);
}

ValueRecommendation recommend_value(const std::vector<SessionLog>& logs, const SessionLog& current,
                                    const std::string& target, std::size_t k) {
    if (k == 0) throw InvalidArgument("neighbour count k must be at least 1");
    if (current.values.count(target)) throw InvalidArgument("feature '" + target + "' is already specified");

    struct Candidate {
        const SessionLog* log;
        double similarity;
    };
    std::vector<Candidate> cands;
    for (const auto& log : logs) {
        if (!log.completed || log.session == current.session) continue;
        if (!log.values.count(target)) continue;
        cands.push_back({&log, user_similarity(current, log)});
    }
    if (cands.empty()) throw UnknownName("no completed session specifies '" + target + "'");

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.log->session < b.log->session;
    });
    std::size_t take = std::min(k, cands.size());

    ValueRecommendation rec;
    rec.feature = target;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < take; ++i) {
        rec.neighbors.push_back(cands[i].log->session);
        if (cands[i].log->values.at(target)) ++ones;
    }
    std::size_t zeros = take - ones;
    rec.value = ones > zeros;
    rec.vote_fraction = static_cast<double>(rec.value ? ones : zeros) / static_cast<double>(take);
    return rec;
}

double rank_similarity(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
    std::vector<int> ra, rb;
    long dist = 0;
    for (const auto& [item, r] : a) {
        auto it = b.find(item);
        if (it == b.end()) continue;
        ra.push_back(r);
        rb.push_back(it->second);
        dist += std::labs(static_cast<long>(r) - it->second);
    }
    if (ra.empty()) return 0.0;
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end(), std::greater<>());
    long m = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) m += std::labs(static_cast<long>(ra[i]) - rb[i]);
    if (m == 0) return dist == 0 ? 1.0 : 0.0;
    return static_cast<double>(m - dist) / static_cast<double>(m);
}

NextItem recommend_next_item(const std::vector<std::pair<std::string, const std::map<std::string, int>*>>& sessions,
                             const std::string& current_session, const std::map<std::string, int>& current_ranks,
                             const std::set<std::string>& specified) {
    if (current_ranks.empty()) throw InvalidArgument("current session has no ranked item yet");

    struct Candidate {
        const std::string* session;
        const std::map<std::string, int>* ranks;
        double similarity;
    };
    std::vector<Candidate> cands;
    for (const auto& [id, ranks] : sessions) {
        if (id == current_session) continue;
        cands.push_back({&id, ranks, rank_similarity(current_ranks, *ranks)});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return *a.session < *b.session;
    });

    for (const auto& c : cands) {
        const std::string* best = nullptr;
        int best_rank = 0;
        for (const auto& [item, r] : *c.ranks) {
            if (specified.count(item) || current_ranks.count(item)) continue;
            if (!best || r < best_rank) {
                best = &item;
                best_rank = r;
            }
        }
        if (best) return NextItem{*best, *c.session, c.similarity};
    }
    throw UnknownName("no session ranks an item that is still unspecified");
}

NextItem recommend_next_feature(const std::vector<SessionLog>& logs, const SessionLog& current) {
    std::vector<std::pair<std::string, const std::map<std::string, int>*>> sessions;
    for (const auto& l : logs) sessions.emplace_back(l.session, &l.ranks);
    std::set<std::string> specified;
    for (const auto& [f, v] : current.values) specified.insert(f);
    return recommend_next_item(sessions, current.session, current.ranks, specified);
}

NextItem recommend_next_constraint(const std::vector<EditLog>& edits, const EditLog& current) {
    std::vector<std::pair<std::string, const std::map<std::string, int>*>> sessions;
    for (const auto& e : edits) sessions.emplace_back(e.session, &e.ranks);
    return recommend_next_item(sessions, current.session, current.ranks, {});
}

std::optional<ValueRecommendation> consistency_filtered(const ConfigurationTask& task, const Assignment& partial,
                                                        ValueRecommendation rec) {
    Solver solver(task);
    auto var = task.index_of(rec.feature);
    auto with = [&](bool value) {
        auto lits = partial.literals();
        lits.push_back(Literal{var, value});
        return solver.is_consistent(std::span<const Literal>(lits));
    };
    if (with(rec.value)) return rec;
    if (with(!rec.value)) {
        rec.value = !rec.value;
        rec.vote_fraction = 1.0 - rec.vote_fraction;
        return rec;
    }
    return std::nullopt;
}

}  // namespace fmrec
