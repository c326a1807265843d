#include "fmrec/feature_model.hpp"

#include <algorithm>
#include <unordered_map>

#include "fmrec/error.hpp"

namespace fmrec {

std::string_view to_string(Relation r) {
    return r == Relation::mandatory ? "mandatory" : "optional";
}

std::string_view to_string(GroupKind g) {
    return g == GroupKind::alternative ? "alternative" : "or";
}

std::string_view to_string(CrossTreeKind k) {
    return k == CrossTreeKind::requires_ ? "requires" : "excludes";
}

std::string_view to_string(Finding::Kind k) {
    switch (k) {
        case Finding::Kind::empty_model: return "empty-model";
        case Finding::Kind::invalid_name: return "invalid-name";
        case Finding::Kind::duplicate_name: return "duplicate";
        case Finding::Kind::orphan: return "orphan";
        case Finding::Kind::degenerate_group: return "degenerate-group";
        case Finding::Kind::bad_group: return "bad-group";
        case Finding::Kind::bad_constraint: return "bad-constraint";
    }
    return "unknown";
}

bool is_identifier(std::string_view name) {
    if (name.empty()) return false;
    auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(name.front())) return false;
    return std::all_of(name.begin() + 1, name.end(),
                       [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

FeatureModel::FeatureModel(std::string root_name) {
    features_.push_back(Feature{std::move(root_name), no_index, Relation::mandatory, no_index});
}

FeatureModel::FeatureModel(std::vector<Feature> features, std::vector<Group> groups,
                           std::vector<CrossTreeConstraint> constraints)
    : features_(std::move(features)), groups_(std::move(groups)), constraints_(std::move(constraints)) {}

std::size_t FeatureModel::add_feature(std::size_t parent, std::string name, Relation relation) {
    if (parent >= features_.size()) throw InvalidArgument("parent feature index out of range");
    features_.push_back(Feature{std::move(name), parent, relation, no_index});
    return features_.size() - 1;
}

std::size_t FeatureModel::add_group(std::size_t parent, GroupKind kind) {
    if (parent >= features_.size()) throw InvalidArgument("parent feature index out of range");
    groups_.push_back(Group{kind, parent, {}});
    return groups_.size() - 1;
}

std::size_t FeatureModel::add_group_member(std::size_t group, std::string name) {
    if (group >= groups_.size()) throw InvalidArgument("group index out of range");
    features_.push_back(Feature{std::move(name), groups_[group].parent, Relation::optional, group});
    groups_[group].members.push_back(features_.size() - 1);
    return features_.size() - 1;
}

void FeatureModel::add_constraint(CrossTreeKind kind, std::size_t a, std::size_t b) {
    if (a >= features_.size() || b >= features_.size())
        throw InvalidArgument("constraint feature index out of range");
    constraints_.push_back(CrossTreeConstraint{kind, a, b});
}

std::optional<std::size_t> FeatureModel::find(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].name == name) return i;
    return std::nullopt;
}

std::size_t FeatureModel::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw UnknownName("unknown feature '" + std::string(name) + "'");
}

std::vector<Finding> validate_model(const FeatureModel& m) {
    std::vector<Finding> out;
    const auto& fs = m.features();
    const std::size_t n = fs.size();
    if (n == 0) {
        out.push_back({Finding::Kind::empty_model, "model has no root feature"});
        return out;
    }

    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_identifier(fs[i].name))
            out.push_back({Finding::Kind::invalid_name, "feature name '" + fs[i].name + "' is not an identifier"});
        auto [it, inserted] = seen.emplace(fs[i].name, i);
        if (!inserted)
            out.push_back({Finding::Kind::duplicate_name, "feature '" + fs[i].name + "' appears more than once"});
    }

    if (fs[0].parent != no_index)
        out.push_back({Finding::Kind::orphan, "first feature '" + fs[0].name + "' must be the root"});
    for (std::size_t i = 1; i < n; ++i) {
        // Walk to the root; a missing parent or a cycle means the feature is detached.
        std::size_t cur = i;
        std::size_t steps = 0;
        bool reached = false;
        while (steps++ <= n) {
            std::size_t p = fs[cur].parent;
            if (p == no_index) {
                reached = (cur == 0);
                break;
            }
            if (p >= n) break;
            cur = p;
        }
        if (!reached) out.push_back({Finding::Kind::orphan, "feature '" + fs[i].name + "' is not attached to the root"});
    }

    const auto& gs = m.groups();
    for (std::size_t g = 0; g < gs.size(); ++g) {
        const auto& grp = gs[g];
        std::string label = std::string(to_string(grp.kind)) + " group #" + std::to_string(g);
        if (grp.members.size() < 2)
            out.push_back({Finding::Kind::degenerate_group, label + " has fewer than 2 members"});
        for (auto mi : grp.members) {
            if (mi >= n || fs[mi].group != g || fs[mi].parent != grp.parent)
                out.push_back({Finding::Kind::bad_group, label + " lists an inconsistent member"});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto g = fs[i].group;
        if (g == no_index) continue;
        if (g >= gs.size() || std::count(gs[g].members.begin(), gs[g].members.end(), i) != 1)
            out.push_back({Finding::Kind::bad_group, "feature '" + fs[i].name + "' is not listed by its group"});
    }

    for (const auto& c : m.constraints()) {
        if (c.a >= n || c.b >= n)
            out.push_back({Finding::Kind::bad_constraint, "cross-tree constraint references a missing feature"});
        else if (c.a == c.b)
            out.push_back({Finding::Kind::bad_constraint,
                           std::string(to_string(c.kind)) + " constraint relates '" + fs[c.a].name + "' to itself"});
    }
    return out;
}

}  // namespace fmrec
