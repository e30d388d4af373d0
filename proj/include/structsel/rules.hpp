#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "structsel/varset.hpp"

namespace structsel {

// "Select a number of variables from `scope` where the number is in `counts`."
class UnitRule {
public:
    UnitRule(VarSet scope, std::vector<int> counts);

    // Sugar for counts == {|scope|}: every scope variable selected.
    static UnitRule select_all(VarSet scope);

    const VarSet& scope() const { return scope_; }
    const std::vector<int>& counts() const { return counts_; }  // sorted, unique
    std::uint64_t counts_bits() const { return counts_bits_; }

    bool satisfied_by(std::uint64_t candidate_mask) const {
        return (counts_bits_ >> std::popcount(candidate_mask & scope_.mask())) & 1u;
    }

    friend bool operator==(const UnitRule& a, const UnitRule& b) {
        return a.scope_ == b.scope_ && a.counts_ == b.counts_;
    }

private:
    VarSet scope_;
    std::vector<int> counts_;
    std::uint64_t counts_bits_;
};

enum class RuleKind { Unit, Not, And, Or, IfThen };

// Immutable rule expression tree. Cheap to copy (shared nodes).
class Rule {
public:
    static Rule unit(UnitRule u);
    static Rule negation(Rule r);
    static Rule conjunction(Rule a, Rule b);
    static Rule disjunction(Rule a, Rule b);
    static Rule implication(Rule antecedent, Rule consequent);

    RuleKind kind() const { return node_->kind; }
    const UnitRule& unit_rule() const;   // pre: kind == Unit
    Rule lhs() const;                    // pre: kind != Unit
    Rule rhs() const;                    // pre: kind in {And, Or, IfThen}
    const RegistryPtr& registry() const { return reg_; }

private:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;
    struct Node {
        RuleKind kind;
        std::optional<UnitRule> u;
        NodePtr a, b;
    };
    Rule(RegistryPtr reg, NodePtr node) : reg_(std::move(reg)), node_(std::move(node)) {}
    RegistryPtr reg_;
    NodePtr node_;
};

bool satisfies(const VarSet& candidate, const Rule& rule);
bool satisfies(std::uint64_t candidate_mask, const Rule& rule);

// Re-expression of an if-then rule through the other connectives:
// (a and b) or b or (not a and not b). Same truth table as a -> b.
Rule ifthen_expand(const Rule& rule);

// Round-trippable text form of a rule in the DSL.
std::string format_rule(const Rule& rule);

struct NamedRule {
    std::string name;
    Rule rule;
};

// A parsed rule collection. At most one rule is tagged forced; it must be a
// select-all unit rule and its scope populates `forced`.
struct RuleSet {
    RegistryPtr reg;
    std::vector<NamedRule> rules;  // non-forced rules
    VarSet forced;
    std::optional<NamedRule> forced_rule;

    static RuleSet make(RegistryPtr reg, std::vector<NamedRule> rules,
                        std::optional<NamedRule> forced_rule = std::nullopt);
};

}  // namespace structsel
