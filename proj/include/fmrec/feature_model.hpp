#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fmrec {

enum class Relation { mandatory, optional };
enum class GroupKind { alternative, or_group };
enum class CrossTreeKind { requires_, excludes };

std::string_view to_string(Relation r);
std::string_view to_string(GroupKind g);
std::string_view to_string(CrossTreeKind k);

inline constexpr std::size_t no_index = static_cast<std::size_t>(-1);

/// One node of the feature tree. Features are stored in depth-first
/// declaration order, so the index of a feature is also its variable index
/// in the translated configuration task.
struct Feature {
    std::string name;
    std::size_t parent = no_index;  // no_index for the root
    Relation relation = Relation::optional;  // ignored for root and group members
    std::size_t group = no_index;  // index into FeatureModel::groups, or no_index

    bool operator==(const Feature&) const = default;
};

struct Group {
    GroupKind kind = GroupKind::alternative;
    std::size_t parent = no_index;
    std::vector<std::size_t> members;  // feature indices, declaration order

    bool operator==(const Group&) const = default;
};

struct CrossTreeConstraint {
    CrossTreeKind kind = CrossTreeKind::requires_;
    std::size_t a = no_index;
    std::size_t b = no_index;

    bool operator==(const CrossTreeConstraint&) const = default;
};

/// Structural problem found by validate_model.
struct Finding {
    enum class Kind { empty_model, invalid_name, duplicate_name, orphan, degenerate_group, bad_group, bad_constraint };
    Kind kind;
    std::string message;
};

std::string_view to_string(Finding::Kind k);

/// A basic (attribute-free) feature model.
///
/// Features, groups and cross-tree constraints are plain value vectors; the
/// builder members below keep them in depth-first declaration order, which
/// is what the DSL parser and the random generators rely on. A model built
/// through the builder members and accepted by validate_model satisfies all
/// structural invariants (single root, unique names, each non-root feature
/// has one parent, groups have at least two members).
class FeatureModel {
public:
    FeatureModel() = default;
    explicit FeatureModel(std::string root_name);
    /// Unchecked construction from raw parts; run validate_model before use.
    FeatureModel(std::vector<Feature> features, std::vector<Group> groups,
                 std::vector<CrossTreeConstraint> constraints);

    /// Appends a solitary child of `parent`. Returns the new feature index.
    std::size_t add_feature(std::size_t parent, std::string name, Relation relation);
    /// Opens a new, empty group under `parent`. Returns the group index.
    std::size_t add_group(std::size_t parent, GroupKind kind);
    /// Appends a member to an existing group. Returns the new feature index.
    std::size_t add_group_member(std::size_t group, std::string name);
    void add_constraint(CrossTreeKind kind, std::size_t a, std::size_t b);

    const std::vector<Feature>& features() const noexcept { return features_; }
    const std::vector<Group>& groups() const noexcept { return groups_; }
    const std::vector<CrossTreeConstraint>& constraints() const noexcept { return constraints_; }

    std::size_t size() const noexcept { return features_.size(); }
    const Feature& root() const { return features_.front(); }
    const Feature& feature(std::size_t i) const { return features_.at(i); }
    std::optional<std::size_t> find(std::string_view name) const;
    /// Index of `name`; throws UnknownName.
    std::size_t index_of(std::string_view name) const;

    bool operator==(const FeatureModel&) const = default;

private:
    std::vector<Feature> features_;
    std::vector<Group> groups_;
    std::vector<CrossTreeConstraint> constraints_;
};

bool is_identifier(std::string_view name);

/// Returns an empty list for a valid model.
std::vector<Finding> validate_model(const FeatureModel& m);

}  // namespace fmrec
