#include "fmrec/solver.hpp"

#include <algorithm>
#include <functional>

#include "fmrec/error.hpp"

namespace fmrec {

ValueOrdering ValueOrdering::from_scores(const ConfigurationTask& task, const std::map<std::string, double>& scores) {
    ValueOrdering order(task.size());
    for (const auto& [name, score] : scores) {
        if (!(score >= 0.0 && score <= 1.0))
            throw InvalidArgument("score for '" + name + "' is outside [0,1]");
        order.prefer(task.index_of(name), score >= preference_threshold);
    }
    return order;
}

ValueOrdering ValueOrdering::all(std::size_t variables, bool first) {
    ValueOrdering order(variables);
    for (std::size_t i = 0; i < variables; ++i) order.prefer(i, first);
    return order;
}

void ValueOrdering::prefer(std::size_t var, bool value) {
    if (var >= first_.size()) first_.resize(var + 1, 1);
    first_[var] = value ? 1 : 0;
}

namespace {

std::vector<Formula> task_constraints(const ConfigurationTask& task) {
    std::vector<Formula> out;
    for (const auto& c : task.model_constraints()) out.push_back(c.formula);
    for (const auto& r : task.requirements()) out.push_back(Formula::lit(r.var, r.value));
    return out;
}

}  // namespace

Solver::Solver(const ConfigurationTask& task) : Solver(task.size(), task_constraints(task)) {}

Solver::Solver(std::size_t variables, std::span<const Formula> constraints)
    : variables_(variables), occurrences_(variables) {
    for (const auto& f : constraints) {
        if (f.variable_bound() > variables)
            throw InvalidArgument("constraint references a variable outside the task");
        for (auto& c : to_clauses(f)) {
            if (c.empty()) trivially_unsat_ = true;
            clauses_.push_back(std::move(c));
        }
    }
    std::sort(clauses_.begin(), clauses_.end());
    clauses_.erase(std::unique(clauses_.begin(), clauses_.end()), clauses_.end());
    for (std::size_t ci = 0; ci < clauses_.size(); ++ci)
        for (const auto& l : clauses_[ci]) occurrences_[l.var].push_back(ci);
}

// Search state for one query: values, trail and a propagation queue.
class Search {
public:
    explicit Search(const Solver& s) : s_(s), values_(s.variables_, -1) {}

    // Assigns the assumptions and propagates everything. False on conflict.
    bool start(std::span<const Literal> assumptions) {
        if (s_.trivially_unsat_) return false;
        for (const auto& l : assumptions) {
            if (l.var >= values_.size()) throw InvalidArgument("assumption references an unknown variable");
            if (!assign(l)) return false;
        }
        // Unit clauses of the constraint set are found by scanning every clause once.
        for (std::size_t ci = 0; ci < s_.clauses_.size(); ++ci)
            if (!visit(ci)) return false;
        return propagate();
    }

    // Depth-first search in variable order; `emit` returns false to stop.
    // Returns false if the search was stopped.
    bool run(const ValueOrdering& order, const std::function<bool(const std::vector<std::int8_t>&)>& emit) {
        std::size_t var = next_unassigned();
        if (var == values_.size()) return emit(values_);
        bool first = order.preferred(var);
        for (bool value : {first, !first}) {
            std::size_t mark = trail_.size();
            bool ok = assign(Literal{var, value}) && propagate();
            if (ok && !run(order, emit)) return false;
            undo(mark);
        }
        return true;
    }

    const std::vector<std::int8_t>& values() const { return values_; }

private:
    bool assign(Literal l) {
        auto& v = values_[l.var];
        std::int8_t want = l.value ? 1 : 0;
        if (v == want) return true;
        if (v != -1) return false;
        v = want;
        trail_.push_back(l.var);
        queue_.push_back(l.var);
        return true;
    }

    bool propagate() {
        while (head_ < queue_.size()) {
            std::size_t var = queue_[head_++];
            for (auto ci : s_.occurrences_[var])
                if (!visit(ci)) {
                    head_ = queue_.size();
                    return false;
                }
        }
        return true;
    }

    // Examines one clause: conflict -> false; unit -> assigns the literal.
    bool visit(std::size_t ci) {
        const Clause& c = s_.clauses_[ci];
        const Literal* open = nullptr;
        std::size_t unassigned = 0;
        for (const auto& l : c) {
            auto v = values_[l.var];
            if (v == -1) {
                ++unassigned;
                open = &l;
            } else if ((v == 1) == l.value) {
                return true;
            }
        }
        if (unassigned == 0) return false;
        if (unassigned == 1) return assign(*open);
        return true;
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            values_[trail_.back()] = -1;
            trail_.pop_back();
        }
        queue_.clear();
        head_ = 0;
    }

    std::size_t next_unassigned() const {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] == -1) return i;
        return values_.size();
    }

    const Solver& s_;
    std::vector<std::int8_t> values_;
    std::vector<std::size_t> trail_;
    std::vector<std::size_t> queue_;
    std::size_t head_ = 0;
};

namespace {

Configuration to_configuration(const std::vector<std::int8_t>& values) {
    std::vector<std::uint8_t> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] == 1 ? 1 : 0;
    return Configuration(std::move(out));
}

}  // namespace

void Solver::check(const Assignment& a) const {
    if (a.size() != variables_)
        throw InvalidArgument("assignment covers " + std::to_string(a.size()) + " variables, task has " +
                              std::to_string(variables_));
}

bool Solver::is_consistent(const Assignment& extra) const {
    check(extra);
    return solve(extra).has_value();
}

bool Solver::is_consistent(std::span<const Literal> assumptions) const {
    return solve(assumptions).has_value();
}

std::optional<Configuration> Solver::solve(const Assignment& assumptions, const ValueOrdering& order) const {
    check(assumptions);
    auto lits = assumptions.literals();
    return solve(std::span<const Literal>(lits), order);
}

std::optional<Configuration> Solver::solve(std::span<const Literal> assumptions, const ValueOrdering& order) const {
    Search search(*this);
    if (!search.start(assumptions)) return std::nullopt;
    std::optional<Configuration> found;
    search.run(order, [&](const std::vector<std::int8_t>& v) {
        found = to_configuration(v);
        return false;
    });
    return found;
}

std::vector<Configuration> Solver::enumerate(const Assignment& assumptions, const ValueOrdering& order,
                                             std::size_t limit) const {
    check(assumptions);
    std::vector<Configuration> out;
    if (limit == 0) return out;
    Search search(*this);
    auto lits = assumptions.literals();
    if (!search.start(lits)) return out;
    search.run(order, [&](const std::vector<std::int8_t>& v) {
        out.push_back(to_configuration(v));
        return out.size() < limit;
    });
    return out;
}

std::size_t Solver::count(const Assignment& assumptions, std::size_t limit) const {
    check(assumptions);
    std::size_t n = 0;
    if (limit == 0) return n;
    Search search(*this);
    auto lits = assumptions.literals();
    if (!search.start(lits)) return n;
    search.run(ValueOrdering{}, [&](const std::vector<std::int8_t>&) { return ++n < limit; });
    return n;
}

std::optional<Assignment> Solver::propagate(const Assignment& partial) const {
    check(partial);
    Search search(*this);
    auto lits = partial.literals();
    if (!search.start(lits)) return std::nullopt;
    Assignment out(variables_);
    const auto& v = search.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != -1) out.set(i, v[i] == 1);
    return out;
}

bool is_consistent(const ConfigurationTask& task, const Assignment& extra) {
    return Solver(task).is_consistent(extra);
}

std::optional<Configuration> solve(const ConfigurationTask& task, const Assignment& assumptions,
                                   const ValueOrdering& order) {
    return Solver(task).solve(assumptions, order);
}

std::vector<Configuration> enumerate(const ConfigurationTask& task, std::size_t limit, const ValueOrdering& order) {
    return Solver(task).enumerate(Assignment(task.size()), order, limit);
}

std::optional<Assignment> propagate(const ConfigurationTask& task, const Assignment& partial) {
    return Solver(task).propagate(partial);
}

std::optional<Configuration> consistent_completion(const ConfigurationTask& task, const Assignment& partial,
                                                   const std::map<std::string, double>& scores) {
    return Solver(task).solve(partial, ValueOrdering::from_scores(task, scores));
}

}  // namespace fmrec
