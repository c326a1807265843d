#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fmrec/formula.hpp"
#include "fmrec/recommend.hpp"
#include "fmrec/task.hpp"

namespace fmrec {

/// Minimal set of requirements inconsistent with the background, listed in
/// candidate order.
using ConflictSet = std::vector<Requirement>;

/// Minimal set of requirements whose removal restores consistency, listed
/// in candidate order.
using Diagnosis = std::vector<Requirement>;

/// Concrete replacement values for one diagnosis.
struct Repair {
    std::size_t diagnosis = 0;  // index into the diagnosis list it came from
    FeatureValues changes;       // diagnosed features -> new values
    FeatureValues assignment;    // every requirement feature after the repair
    Configuration witness;       // a full configuration realizing the repair
    double utility = 0.0;
};

/// QuickXplain over `candidates` against `background` (formulas over
/// `variables` variables). Returns nullopt when everything is consistent.
/// Splits favour earlier-listed candidates. Throws InconsistentBackground.
std::optional<ConflictSet> min_conflict(std::size_t variables, std::span<const Formula> background,
                                        const std::vector<Requirement>& candidates);

/// All set-minimal diagnoses via a breadth-first hitting-set tree over
/// QuickXplain conflicts, ordered by size and then by (variable, value).
/// Throws InconsistentBackground.
std::vector<Diagnosis> all_diagnoses(std::size_t variables, std::span<const Formula> background,
                                     const std::vector<Requirement>& candidates);

/// Conflicts found while building the hitting-set tree, in discovery order.
std::vector<ConflictSet> all_conflicts(std::size_t variables, std::span<const Formula> background,
                                       const std::vector<Requirement>& candidates);

// Task-level conveniences: background is C_F, candidates are C_R.
std::optional<ConflictSet> min_conflict(const ConfigurationTask& task);
std::vector<Diagnosis> all_diagnoses(const ConfigurationTask& task);

/// For each diagnosis, every value combination of the diagnosed features
/// that is consistent with C_F and the remaining requirements.
std::vector<Repair> repairs(const ConfigurationTask& task, const std::vector<Diagnosis>& diagnoses);

/// Scores each repair's post-repair assignment with overall_utility and
/// sorts descending (stable).
std::vector<Repair> rank_repairs(std::vector<Repair> repairs, const UtilityTable& table,
                                 const InterestProfile& profile);

}  // namespace fmrec
