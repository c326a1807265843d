#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmrec/feature_model.hpp"
#include "fmrec/formula.hpp"

namespace fmrec {

/// A user requirement `feature = value`, tagged with where it came from.
struct Requirement {
    std::size_t var = 0;
    bool value = true;
    std::string source;

    Literal literal() const { return Literal{var, value}; }
    bool operator==(const Requirement& o) const { return var == o.var && value == o.value; }
};

/// Model constraint together with a short label naming its origin.
struct ModelConstraint {
    std::string label;
    Formula formula;
};

/// Named feature values, the exchange format between the solver-level
/// types and the ranking/recommendation functions.
using FeatureValues = std::map<std::string, bool>;

/// Boolean CSP (V, D, C_F ∪ C_R). Every domain is {0,1}, so D is implicit.
class ConfigurationTask {
public:
    ConfigurationTask() = default;
    ConfigurationTask(std::vector<std::string> variables, std::vector<ModelConstraint> model_constraints,
                      std::vector<Requirement> requirements = {});

    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::vector<ModelConstraint>& model_constraints() const noexcept { return model_constraints_; }
    const std::vector<Requirement>& requirements() const noexcept { return requirements_; }
    std::size_t size() const noexcept { return variables_.size(); }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws UnknownName.
    std::size_t index_of(std::string_view name) const;
    const std::string& name(std::size_t var) const { return variables_.at(var); }

    /// Builds a requirement by feature name; throws UnknownName.
    Requirement requirement(std::string_view feature, bool value, std::string source = {}) const;
    /// Copy of this task with C_R replaced.
    ConfigurationTask with_requirements(std::vector<Requirement> requirements) const;

private:
    std::vector<std::string> variables_;
    std::vector<ModelConstraint> model_constraints_;
    std::vector<Requirement> requirements_;
};

/// Partial assignment of task variables.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::size_t variables) : values_(variables, unset) {}

    /// Assignment over `task` from (name, value) pairs; throws UnknownName,
    /// or InvalidArgument if a name is given two different values.
    static Assignment from_names(const ConfigurationTask& task,
                                 const std::vector<std::pair<std::string, bool>>& values);

    std::size_t size() const noexcept { return values_.size(); }
    std::optional<bool> get(std::size_t var) const;
    bool is_assigned(std::size_t var) const { return values_.at(var) != unset; }
    void set(std::size_t var, bool value) { values_.at(var) = value ? 1 : 0; }
    void clear(std::size_t var) { values_.at(var) = unset; }
    std::size_t assigned_count() const;
    bool is_complete() const { return assigned_count() == values_.size(); }
    /// True if every variable assigned here has the same value in `other`.
    bool is_extended_by(const Assignment& other) const;

    std::vector<Literal> literals() const;
    FeatureValues named(const ConfigurationTask& task) const;

    bool operator==(const Assignment&) const = default;

private:
    static constexpr std::int8_t unset = -1;
    std::vector<std::int8_t> values_;
};

/// Total assignment of all task variables.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<std::uint8_t> values) : values_(std::move(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    bool operator[](std::size_t var) const { return values_[var] != 0; }
    std::span<const std::uint8_t> values() const noexcept { return values_; }
    Assignment as_assignment() const;
    FeatureValues named(const ConfigurationTask& task) const;
    /// Renders as a 0/1 string in variable order.
    std::string bits() const;

    auto operator<=>(const Configuration&) const = default;

private:
    std::vector<std::uint8_t> values_;
};

/// Translates a valid feature model into a configuration task with empty
/// C_R. Variable order is the model's depth-first declaration order.
ConfigurationTask translate(const FeatureModel& m);

/// True if `config` satisfies every formula in C_F and every requirement in C_R.
bool satisfies(const ConfigurationTask& task, const Configuration& config);

}  // namespace fmrec
