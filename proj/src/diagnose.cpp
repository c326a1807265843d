#include "fmrec/diagnose.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "fmrec/error.hpp"
#include "fmrec/solver.hpp"

namespace fmrec {

namespace {

using Indices = std::vector<std::size_t>;  // sorted candidate positions

class Diagnoser {
public:
    Diagnoser(std::size_t variables, std::span<const Formula> background, const std::vector<Requirement>& candidates)
        : solver_(variables, background), candidates_(candidates) {
        for (const auto& r : candidates_)
            if (r.var >= variables) throw InvalidArgument("requirement references an unknown variable");
        if (!consistent({})) throw InconsistentBackground("background constraints are unsatisfiable");
    }

    bool consistent(const Indices& subset) {
        std::vector<Literal> lits;
        lits.reserve(subset.size());
        for (auto i : subset) lits.push_back(candidates_[i].literal());
        return solver_.is_consistent(std::span<const Literal>(lits));
    }

    // QuickXplain over `pool`; cached by pool.
    std::optional<Indices> conflict(const Indices& pool) {
        if (auto it = cache_.find(pool); it != cache_.end()) return it->second;
        std::optional<Indices> out;
        if (!consistent(pool)) out = explain({}, false, pool);
        cache_.emplace(pool, out);
        return out;
    }

    std::vector<Indices> diagnoses(std::vector<Indices>* conflicts_out) {
        const std::size_t n = candidates_.size();
        std::vector<Indices> found;
        std::vector<Indices> conflicts;
        std::set<Indices> seen{Indices{}};
        std::deque<Indices> queue{Indices{}};

        while (!queue.empty()) {
            Indices path = std::move(queue.front());
            queue.pop_front();
            bool pruned = std::any_of(found.begin(), found.end(), [&](const Indices& d) {
                return std::includes(path.begin(), path.end(), d.begin(), d.end());
            });
            if (pruned) continue;

            // Reuse a known conflict that the path does not hit yet.
            std::optional<Indices> label;
            for (const auto& c : conflicts) {
                if (!intersects(c, path)) {
                    label = c;
                    break;
                }
            }
            if (!label) {
                Indices pool;
                for (std::size_t i = 0; i < n; ++i)
                    if (!std::binary_search(path.begin(), path.end(), i)) pool.push_back(i);
                label = conflict(pool);
                if (label) conflicts.push_back(*label);
            }
            if (!label) {
                found.push_back(path);
                continue;
            }
            for (auto c : *label) {
                Indices child = path;
                child.insert(std::upper_bound(child.begin(), child.end(), c), c);
                if (seen.insert(child).second) queue.push_back(std::move(child));
            }
        }

        // Breadth-first order with superset pruning only admits minimal sets;
        // filter anyway so the contract does not hinge on visiting order.
        std::vector<Indices> minimal;
        for (const auto& d : found) {
            bool has_subset = std::any_of(found.begin(), found.end(), [&](const Indices& o) {
                return o.size() < d.size() && std::includes(d.begin(), d.end(), o.begin(), o.end());
            });
            if (!has_subset) minimal.push_back(d);
        }
        if (conflicts_out) *conflicts_out = std::move(conflicts);
        return minimal;
    }

    std::vector<Requirement> requirements(const Indices& idx) const {
        std::vector<Requirement> out;
        for (auto i : idx) out.push_back(candidates_[i]);
        return out;
    }

private:
    // Junker's divide-and-conquer; `base` is assumed part of the background.
    Indices explain(const Indices& base, bool base_changed, const Indices& pool) {
        if (base_changed && !consistent(base)) return {};
        if (pool.size() == 1) return pool;
        std::size_t k = pool.size() / 2;
        Indices first(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        Indices second(pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end());

        Indices d2 = explain(merge(base, first), !first.empty(), second);
        Indices d1 = explain(merge(base, d2), !d2.empty(), first);
        return merge(d1, d2);
    }

    static Indices merge(const Indices& a, const Indices& b) {
        Indices out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    static bool intersects(const Indices& a, const Indices& b) {
        auto i = a.begin();
        auto j = b.begin();
        while (i != a.end() && j != b.end()) {
            if (*i == *j) return true;
            if (*i < *j)
                ++i;
            else
                ++j;
        }
        return false;
    }

    Solver solver_;
    const std::vector<Requirement>& candidates_;
    std::map<Indices, std::optional<Indices>> cache_;
};

Indices all_indices(std::size_t n) {
    Indices out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
}

bool diagnosis_less(const Diagnosis& a, const Diagnosis& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    auto key = [](const Diagnosis& d) {
        std::vector<std::pair<std::size_t, bool>> k;
        for (const auto& r : d) k.emplace_back(r.var, r.value);
        std::sort(k.begin(), k.end());
        return k;
    };
    return key(a) < key(b);
}

std::vector<Formula> model_formulas(const ConfigurationTask& task) {
    std::vector<Formula> out;
    for (const auto& c : task.model_constraints()) out.push_back(c.formula);
    return out;
}

}  // namespace

std::optional<ConflictSet> min_conflict(std::size_t variables, std::span<const Formula> background,
                                        const std::vector<Requirement>& candidates) {
    Diagnoser d(variables, background, candidates);
    auto cs = d.conflict(all_indices(candidates.size()));
    if (!cs) return std::nullopt;
    return d.requirements(*cs);
}

std::vector<Diagnosis> all_diagnoses(std::size_t variables, std::span<const Formula> background,
                                     const std::vector<Requirement>& candidates) {
    Diagnoser d(variables, background, candidates);
    std::vector<Diagnosis> out;
    if (d.consistent(all_indices(candidates.size()))) return out;
    for (const auto& idx : d.diagnoses(nullptr)) out.push_back(d.requirements(idx));
    std::stable_sort(out.begin(), out.end(), diagnosis_less);
    return out;
}

std::vector<ConflictSet> all_conflicts(std::size_t variables, std::span<const Formula> background,
                                       const std::vector<Requirement>& candidates) {
    Diagnoser d(variables, background, candidates);
    std::vector<ConflictSet> out;
    if (d.consistent(all_indices(candidates.size()))) return out;
    std::vector<Indices> conflicts;
    d.diagnoses(&conflicts);
    for (const auto& c : conflicts) out.push_back(d.requirements(c));
    return out;
}

std::optional<ConflictSet> min_conflict(const ConfigurationTask& task) {
    auto bg = model_formulas(task);
    return min_conflict(task.size(), bg, task.requirements());
}

std::vector<Diagnosis> all_diagnoses(const ConfigurationTask& task) {
    auto bg = model_formulas(task);
    return all_diagnoses(task.size(), bg, task.requirements());
}

std::vector<Repair> repairs(const ConfigurationTask& task, const std::vector<Diagnosis>& diagnoses) {
    std::vector<Repair> out;
    if (diagnoses.empty()) return out;
    Solver solver(task.with_requirements({}));
    const auto& reqs = task.requirements();

    for (std::size_t di = 0; di < diagnoses.size(); ++di) {
        const auto& delta = diagnoses[di];
        std::vector<Literal> kept;
        for (const auto& r : reqs)
            if (std::find(delta.begin(), delta.end(), r) == delta.end()) kept.push_back(r.literal());
        std::vector<std::size_t> vars;
        for (const auto& r : delta)
            if (std::find(vars.begin(), vars.end(), r.var) == vars.end()) vars.push_back(r.var);
        std::sort(vars.begin(), vars.end());

        // Value combinations over the diagnosed variables, 1 before 0 per position.
        const std::size_t combos = std::size_t{1} << vars.size();
        for (std::size_t mask = 0; mask < combos && out.size() < default_enumeration_cap; ++mask) {
            std::vector<Literal> lits = kept;
            for (std::size_t j = 0; j < vars.size(); ++j) {
                bool value = ((mask >> (vars.size() - 1 - j)) & 1u) == 0;
                lits.push_back(Literal{vars[j], value});
            }
            auto witness = solver.solve(std::span<const Literal>(lits));
            if (!witness) continue;

            Repair rep;
            rep.diagnosis = di;
            rep.witness = *witness;
            for (auto v : vars) rep.changes[task.name(v)] = (*witness)[v];
            for (const auto& r : reqs) rep.assignment[task.name(r.var)] = (*witness)[r.var];
            out.push_back(std::move(rep));
        }
    }
    return out;
}

std::vector<Repair> rank_repairs(std::vector<Repair> reps, const UtilityTable& table,
                                 const InterestProfile& profile) {
    for (auto& r : reps) r.utility = overall_utility(r.assignment, table, profile);
    std::stable_sort(reps.begin(), reps.end(), [](const Repair& a, const Repair& b) { return a.utility > b.utility; });
    return reps;
}

}  // namespace fmrec
