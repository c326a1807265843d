#include "fmrec/task.hpp"

#include <algorithm>

#include "fmrec/error.hpp"

namespace fmrec {

ConfigurationTask::ConfigurationTask(std::vector<std::string> variables,
                                     std::vector<ModelConstraint> model_constraints,
                                     std::vector<Requirement> requirements)
    : variables_(std::move(variables)),
      model_constraints_(std::move(model_constraints)),
      requirements_(std::move(requirements)) {
    for (const auto& c : model_constraints_)
        if (c.formula.variable_bound() > variables_.size())
            throw InvalidArgument("constraint '" + c.label + "' references an unknown variable");
    for (const auto& r : requirements_)
        if (r.var >= variables_.size()) throw InvalidArgument("requirement references an unknown variable");
}

std::optional<std::size_t> ConfigurationTask::find(std::string_view name) const {
    auto it = std::find(variables_.begin(), variables_.end(), name);
    if (it == variables_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - variables_.begin());
}

std::size_t ConfigurationTask::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw UnknownName("unknown feature '" + std::string(name) + "'");
}

Requirement ConfigurationTask::requirement(std::string_view feature, bool value, std::string source) const {
    return Requirement{index_of(feature), value, std::move(source)};
}

ConfigurationTask ConfigurationTask::with_requirements(std::vector<Requirement> requirements) const {
    return ConfigurationTask(variables_, model_constraints_, std::move(requirements));
}

Assignment Assignment::from_names(const ConfigurationTask& task,
                                  const std::vector<std::pair<std::string, bool>>& values) {
    Assignment a(task.size());
    for (const auto& [name, value] : values) {
        auto var = task.index_of(name);
        if (auto prev = a.get(var); prev && *prev != value)
            throw InvalidArgument("feature '" + name + "' given both values");
        a.set(var, value);
    }
    return a;
}

std::optional<bool> Assignment::get(std::size_t var) const {
    auto v = values_.at(var);
    if (v == unset) return std::nullopt;
    return v != 0;
}

std::size_t Assignment::assigned_count() const {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](auto v) { return v != unset; }));
}

bool Assignment::is_extended_by(const Assignment& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] != unset && values_[i] != other.values_[i]) return false;
    return true;
}

std::vector<Literal> Assignment::literals() const {
    std::vector<Literal> out;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] != unset) out.push_back(Literal{i, values_[i] != 0});
    return out;
}

FeatureValues Assignment::named(const ConfigurationTask& task) const {
    FeatureValues out;
    for (const auto& l : literals()) out[task.name(l.var)] = l.value;
    return out;
}

Assignment Configuration::as_assignment() const {
    Assignment a(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) a.set(i, values_[i] != 0);
    return a;
}

FeatureValues Configuration::named(const ConfigurationTask& task) const {
    FeatureValues out;
    for (std::size_t i = 0; i < values_.size(); ++i) out[task.name(i)] = values_[i] != 0;
    return out;
}

std::string Configuration::bits() const {
    std::string s;
    for (auto v : values_) s += v ? '1' : '0';
    return s;
}

ConfigurationTask translate(const FeatureModel& m) {
    const auto& fs = m.features();
    std::vector<std::string> vars;
    vars.reserve(fs.size());
    for (const auto& f : fs) vars.push_back(f.name);

    using F = Formula;
    std::vector<ModelConstraint> cs;
    cs.push_back({"root(" + fs[0].name + ")", F::lit(0)});

    for (std::size_t i = 1; i < fs.size(); ++i) {
        const auto& f = fs[i];
        if (f.group != no_index) continue;
        std::string pc = fs[f.parent].name + "," + f.name;
        if (f.relation == Relation::mandatory)
            cs.push_back({"mandatory(" + pc + ")", F::equivalence(F::lit(f.parent), F::lit(i))});
        else
            cs.push_back({"optional(" + pc + ")", F::implication(F::lit(i), F::lit(f.parent))});
    }

    for (const auto& g : m.groups()) {
        const auto& parent = fs[g.parent].name;
        if (g.kind == GroupKind::alternative) {
            // Each member holds exactly when the parent holds and no sibling does.
            for (auto c : g.members) {
                std::vector<F> rhs{F::lit(g.parent)};
                for (auto o : g.members)
                    if (o != c) rhs.push_back(F::lit(o, false));
                cs.push_back({"alternative(" + parent + ":" + fs[c].name + ")",
                              F::equivalence(F::lit(c), F::conjunction(std::move(rhs)))});
            }
        } else {
            std::vector<F> any;
            for (auto c : g.members) any.push_back(F::lit(c));
            cs.push_back({"or(" + parent + ")", F::equivalence(F::lit(g.parent), F::disjunction(std::move(any)))});
        }
    }

    for (const auto& c : m.constraints()) {
        std::string ab = fs[c.a].name + "," + fs[c.b].name;
        if (c.kind == CrossTreeKind::requires_)
            cs.push_back({"requires(" + ab + ")", F::implication(F::lit(c.a), F::lit(c.b))});
        else
            cs.push_back({"excludes(" + ab + ")", !(F::lit(c.a) && F::lit(c.b))});
    }
    return ConfigurationTask(std::move(vars), std::move(cs));
}

bool satisfies(const ConfigurationTask& task, const Configuration& config) {
    if (config.size() != task.size()) return false;
    for (const auto& c : task.model_constraints())
        if (!c.formula.evaluate(config.values())) return false;
    for (const auto& r : task.requirements())
        if (config[r.var] != r.value) return false;
    return true;
}

}  // namespace fmrec
