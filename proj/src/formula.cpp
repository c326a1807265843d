#include "fmrec/formula.hpp"

#include <algorithm>
#include <cstdint>

#include "fmrec/error.hpp"

namespace fmrec {

Formula Formula::lit(std::size_t var, bool value) {
    return Formula(std::make_shared<const Node>(Node{Op::literal, var, value, {}}));
}

Formula Formula::constant(bool value) {
    return Formula(std::make_shared<const Node>(Node{Op::constant, 0, value, {}}));
}

Formula Formula::negation(Formula f) {
    return Formula(std::make_shared<const Node>(Node{Op::not_, 0, true, {std::move(f)}}));
}

Formula Formula::conjunction(std::vector<Formula> args) {
    return Formula(std::make_shared<const Node>(Node{Op::and_, 0, true, std::move(args)}));
}

Formula Formula::disjunction(std::vector<Formula> args) {
    return Formula(std::make_shared<const Node>(Node{Op::or_, 0, true, std::move(args)}));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
    return Formula(std::make_shared<const Node>(Node{Op::implies, 0, true, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::equivalence(Formula lhs, Formula rhs) {
    return Formula(std::make_shared<const Node>(Node{Op::iff, 0, true, {std::move(lhs), std::move(rhs)}}));
}

bool Formula::evaluate(std::span<const std::uint8_t> values) const {
    const auto& a = node_->args;
    switch (node_->op) {
        case Op::literal: return (values[node_->var] != 0) == node_->value;
        case Op::constant: return node_->value;
        case Op::not_: return !a[0].evaluate(values);
        case Op::and_:
            return std::all_of(a.begin(), a.end(), [&](const Formula& f) { return f.evaluate(values); });
        case Op::or_:
            return std::any_of(a.begin(), a.end(), [&](const Formula& f) { return f.evaluate(values); });
        case Op::implies: return !a[0].evaluate(values) || a[1].evaluate(values);
        case Op::iff: return a[0].evaluate(values) == a[1].evaluate(values);
    }
    return false;
}

std::size_t Formula::variable_bound() const {
    if (node_->op == Op::literal) return node_->var + 1;
    std::size_t bound = 0;
    for (const auto& f : node_->args) bound = std::max(bound, f.variable_bound());
    return bound;
}

std::string Formula::to_string(const std::function<std::string(std::size_t)>& name) const {
    const auto& a = node_->args;
    auto join = [&](std::string_view sep) {
        if (a.empty()) return std::string(node_->op == Op::and_ ? "true" : "false");
        std::string s = "(";
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) s += sep;
            s += a[i].to_string(name);
        }
        return s + ")";
    };
    switch (node_->op) {
        case Op::literal: return node_->value ? name(node_->var) : "!" + name(node_->var);
        case Op::constant: return node_->value ? "true" : "false";
        case Op::not_: return "!" + a[0].to_string(name);
        case Op::and_: return join(" & ");
        case Op::or_: return join(" | ");
        case Op::implies: return "(" + a[0].to_string(name) + " -> " + a[1].to_string(name) + ")";
        case Op::iff: return "(" + a[0].to_string(name) + " <-> " + a[1].to_string(name) + ")";
    }
    return "?";
}

namespace {

using ClauseSet = std::vector<Clause>;

// Normalizes a clause: sorted, deduplicated; returns false for tautologies.
bool normalize(Clause& c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i].var == c[i - 1].var) return false;
    return true;
}

class ClauseBuilder {
public:
    explicit ClauseBuilder(std::size_t cap) : cap_(cap) {}

    // Clauses equivalent to f (positive) or to !f (negative).
    ClauseSet build(const Formula& f, bool positive) {
        const auto& a = f.args();
        switch (f.op()) {
            case Formula::Op::literal:
                return {Clause{Literal{f.var(), positive ? f.value() : !f.value()}}};
            case Formula::Op::constant:
                return (f.value() == positive) ? ClauseSet{} : ClauseSet{Clause{}};
            case Formula::Op::not_:
                return build(a[0], !positive);
            case Formula::Op::and_:
                return positive ? all(a, true) : any(a, false);
            case Formula::Op::or_:
                return positive ? any(a, true) : all(a, false);
            case Formula::Op::implies:
                if (positive) return product(build(a[0], false), build(a[1], true));
                return concat(build(a[0], true), build(a[1], false));
            case Formula::Op::iff:
                if (positive)
                    return concat(product(build(a[0], false), build(a[1], true)),
                                  product(build(a[1], false), build(a[0], true)));
                return product(concat(build(a[0], true), build(a[1], false)),
                               concat(build(a[0], false), build(a[1], true)));
        }
        return {};
    }

private:
    ClauseSet all(const std::vector<Formula>& args, bool positive) {
        ClauseSet out;
        for (const auto& f : args) out = concat(std::move(out), build(f, positive));
        return out;
    }

    ClauseSet any(const std::vector<Formula>& args, bool positive) {
        ClauseSet out{Clause{}};  // empty disjunction is false
        for (const auto& f : args) out = product(std::move(out), build(f, positive));
        return out;
    }

    ClauseSet concat(ClauseSet x, ClauseSet y) {
        x.insert(x.end(), std::make_move_iterator(y.begin()), std::make_move_iterator(y.end()));
        check(x.size());
        return x;
    }

    // Disjunction of two CNFs.
    ClauseSet product(const ClauseSet& x, const ClauseSet& y) {
        check(x.size() * y.size());
        ClauseSet out;
        for (const auto& cx : x) {
            for (const auto& cy : y) {
                Clause c = cx;
                c.insert(c.end(), cy.begin(), cy.end());
                if (normalize(c)) out.push_back(std::move(c));
            }
        }
        return out;
    }

    void check(std::size_t n) const {
        if (n > cap_) throw InvalidArgument("formula expands to more than " + std::to_string(cap_) + " clauses");
    }

    std::size_t cap_;
};

}  // namespace

std::vector<Clause> to_clauses(const Formula& f, std::size_t max_clauses) {
    auto clauses = ClauseBuilder(max_clauses).build(f, true);
    std::vector<Clause> out;
    out.reserve(clauses.size());
    for (auto& c : clauses)
        if (normalize(c)) out.push_back(std::move(c));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace fmrec
