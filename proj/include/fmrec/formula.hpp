#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fmrec {

/// A variable paired with a truth value: `var = value`.
struct Literal {
    std::size_t var = 0;
    bool value = true;

    Literal negated() const { return Literal{var, !value}; }
    auto operator<=>(const Literal&) const = default;
};

using Clause = std::vector<Literal>;

/// Immutable propositional expression over Boolean variables.
///
/// Nodes are shared, so copies are cheap and a Formula can be passed around
/// by value freely.
class Formula {
public:
    enum class Op { literal, constant, not_, and_, or_, implies, iff };

    static Formula lit(std::size_t var, bool value = true);
    static Formula constant(bool value);
    static Formula negation(Formula f);
    static Formula conjunction(std::vector<Formula> args);
    static Formula disjunction(std::vector<Formula> args);
    static Formula implication(Formula lhs, Formula rhs);
    static Formula equivalence(Formula lhs, Formula rhs);

    Op op() const { return node_->op; }
    /// Variable of a literal node.
    std::size_t var() const { return node_->var; }
    /// Polarity of a literal node, or the value of a constant node.
    bool value() const { return node_->value; }
    const std::vector<Formula>& args() const { return node_->args; }

    /// Truth value under a complete assignment indexed by variable.
    bool evaluate(std::span<const std::uint8_t> values) const;
    /// Largest variable index referenced plus one (0 for constants).
    std::size_t variable_bound() const;

    /// Infix rendering, e.g. `(ABtesting -> statistics)`.
    std::string to_string(const std::function<std::string(std::size_t)>& name) const;

    friend Formula operator!(Formula f) { return negation(std::move(f)); }
    friend Formula operator&&(Formula a, Formula b) { return conjunction({std::move(a), std::move(b)}); }
    friend Formula operator||(Formula a, Formula b) { return disjunction({std::move(a), std::move(b)}); }

private:
    struct Node {
        Op op;
        std::size_t var = 0;
        bool value = true;
        std::vector<Formula> args;
    };
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    std::shared_ptr<const Node> node_;
};

/// Clausal form by negation-normal-form conversion and distribution; no
/// auxiliary variables are introduced, so the clause set has exactly the
/// same models as the formula. Tautological clauses are dropped and
/// duplicate literals merged. An unsatisfiable constant yields one empty
/// clause. Throws InvalidArgument if the expansion exceeds `max_clauses`.
std::vector<Clause> to_clauses(const Formula& f, std::size_t max_clauses = 1u << 16);

}  // namespace fmrec
