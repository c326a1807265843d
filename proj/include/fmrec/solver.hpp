#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmrec/formula.hpp"
#include "fmrec/task.hpp"

namespace fmrec {

/// Enumeration cap applied when the caller asks for "all" solutions.
inline constexpr std::size_t default_enumeration_cap = 10'000;

/// Scores at or above this threshold make 1 the preferred first value.
inline constexpr double preference_threshold = 0.5;

/// Which value the search tries first, per variable. Defaults to 1.
class ValueOrdering {
public:
    ValueOrdering() = default;
    explicit ValueOrdering(std::size_t variables) : first_(variables, 1) {}

    /// Prefer 1 where score >= 0.5, else 0; unscored variables keep 1.
    /// Throws UnknownName for unknown features and InvalidArgument for
    /// scores outside [0,1].
    static ValueOrdering from_scores(const ConfigurationTask& task, const std::map<std::string, double>& scores);
    static ValueOrdering all(std::size_t variables, bool first);

    void prefer(std::size_t var, bool value);
    bool preferred(std::size_t var) const { return var >= first_.size() || first_[var] != 0; }

private:
    std::vector<std::uint8_t> first_;
};

/// Complete DPLL search with unit propagation over the clausal form of a
/// constraint set. Branching follows variable order, so enumeration order
/// is lexicographic in the variables with each variable's preferred value
/// ranked first.
///
/// The compiled clause set is immutable; each query builds its own search
/// state, so a Solver may be queried from several threads.
class Solver {
public:
    /// Compiles C_F and C_R of `task`.
    explicit Solver(const ConfigurationTask& task);
    /// Compiles an arbitrary constraint list over `variables` variables.
    Solver(std::size_t variables, std::span<const Formula> constraints);

    std::size_t variables() const noexcept { return variables_; }
    const std::vector<Clause>& clauses() const noexcept { return clauses_; }

    bool is_consistent(const Assignment& extra) const;
    /// Literals may contradict each other, in which case the answer is false.
    bool is_consistent(std::span<const Literal> assumptions) const;

    std::optional<Configuration> solve(const Assignment& assumptions, const ValueOrdering& order = {}) const;
    std::optional<Configuration> solve(std::span<const Literal> assumptions, const ValueOrdering& order = {}) const;

    /// Solutions extending `assumptions`, at most `limit` of them.
    std::vector<Configuration> enumerate(const Assignment& assumptions, const ValueOrdering& order = {},
                                         std::size_t limit = default_enumeration_cap) const;
    std::size_t count(const Assignment& assumptions, std::size_t limit = default_enumeration_cap) const;

    /// Unit-propagation fixpoint of `partial`, or nullopt on conflict.
    std::optional<Assignment> propagate(const Assignment& partial) const;

private:
    void check(const Assignment& a) const;

    std::size_t variables_;
    std::vector<Clause> clauses_;
    std::vector<std::vector<std::size_t>> occurrences_;  // var -> clauses mentioning it
    bool trivially_unsat_ = false;

    friend class Search;
};

// Task-level entry points. Each compiles a fresh Solver; hold a Solver
// directly when issuing many queries against one task.

bool is_consistent(const ConfigurationTask& task, const Assignment& extra);
std::optional<Configuration> solve(const ConfigurationTask& task, const Assignment& assumptions,
                                   const ValueOrdering& order = {});
std::vector<Configuration> enumerate(const ConfigurationTask& task, std::size_t limit = default_enumeration_cap,
                                     const ValueOrdering& order = {});
std::optional<Assignment> propagate(const ConfigurationTask& task, const Assignment& partial);

/// Preference-guided completion: solves with the ordering derived from
/// `scores`. Any returned configuration satisfies C_F ∪ C_R ∪ partial.
std::optional<Configuration> consistent_completion(const ConfigurationTask& task, const Assignment& partial,
                                                   const std::map<std::string, double>& scores);

}  // namespace fmrec
