#include "structsel/rules.hpp"

#include <algorithm>

namespace structsel {

UnitRule::UnitRule(VarSet scope, std::vector<int> counts)
    : scope_(std::move(scope)), counts_(std::move(counts)), counts_bits_(0) {
    if (scope_.is_empty()) throw Error("unit rule has an empty scope");
    if (counts_.empty()) throw Error("unit rule has an empty count set");
    std::sort(counts_.begin(), counts_.end());
    counts_.erase(std::unique(counts_.begin(), counts_.end()), counts_.end());
    const int n = scope_.count();
    for (int c : counts_) {
        if (c < 0 || c > n)
            throw CountOutOfRange("count " + std::to_string(c) + " outside [0, " +
                                  std::to_string(n) + "] for scope " + scope_.to_string());
        counts_bits_ |= 1ull << c;
    }
}

UnitRule UnitRule::select_all(VarSet scope) {
    const int n = scope.count();
    return UnitRule(std::move(scope), {n});
}

Rule Rule::unit(UnitRule u) {
    auto reg = u.scope().registry();
    auto node = std::make_shared<const Node>(Node{RuleKind::Unit, std::move(u), nullptr, nullptr});
    return Rule(std::move(reg), std::move(node));
}

Rule Rule::negation(Rule r) {
    auto reg = r.reg_;
    auto node =
        std::make_shared<const Node>(Node{RuleKind::Not, std::nullopt, std::move(r.node_), nullptr});
    return Rule(std::move(reg), std::move(node));
}

static void check_rule_registries(const Rule& a, const Rule& b) {
    check_same_registry(a.registry(), b.registry());
}

Rule Rule::conjunction(Rule a, Rule b) {
    check_rule_registries(a, b);
    auto reg = a.reg_;
    auto node = std::make_shared<const Node>(
        Node{RuleKind::And, std::nullopt, std::move(a.node_), std::move(b.node_)});
    return Rule(std::move(reg), std::move(node));
}

Rule Rule::disjunction(Rule a, Rule b) {
    check_rule_registries(a, b);
    auto reg = a.reg_;
    auto node = std::make_shared<const Node>(
        Node{RuleKind::Or, std::nullopt, std::move(a.node_), std::move(b.node_)});
    return Rule(std::move(reg), std::move(node));
}

Rule Rule::implication(Rule antecedent, Rule consequent) {
    check_rule_registries(antecedent, consequent);
    auto reg = antecedent.reg_;
    auto node = std::make_shared<const Node>(Node{RuleKind::IfThen, std::nullopt,
                                                  std::move(antecedent.node_),
                                                  std::move(consequent.node_)});
    return Rule(std::move(reg), std::move(node));
}

const UnitRule& Rule::unit_rule() const {
    if (node_->kind != RuleKind::Unit) throw Error("rule is not a unit rule");
    return *node_->u;
}

Rule Rule::lhs() const {
    if (!node_->a) throw Error("rule has no operand");
    return Rule(reg_, node_->a);
}

Rule Rule::rhs() const {
    if (!node_->b) throw Error("rule has no second operand");
    return Rule(reg_, node_->b);
}

bool satisfies(std::uint64_t candidate_mask, const Rule& rule) {
    switch (rule.kind()) {
        case RuleKind::Unit:
            return rule.unit_rule().satisfied_by(candidate_mask);
        case RuleKind::Not:
            return !satisfies(candidate_mask, rule.lhs());
        case RuleKind::And:
            return satisfies(candidate_mask, rule.lhs()) && satisfies(candidate_mask, rule.rhs());
        case RuleKind::Or:
            return satisfies(candidate_mask, rule.lhs()) || satisfies(candidate_mask, rule.rhs());
        case RuleKind::IfThen:
            return !satisfies(candidate_mask, rule.lhs()) || satisfies(candidate_mask, rule.rhs());
    }
    return false;
}

bool satisfies(const VarSet& candidate, const Rule& rule) {
    check_same_registry(candidate.registry(), rule.registry());
    return satisfies(candidate.mask(), rule);
}

Rule ifthen_expand(const Rule& rule) {
    if (rule.kind() != RuleKind::IfThen)
        throw UnsupportedRuleShape("ifthen_expand requires an if-then rule");
    const Rule a = rule.lhs();
    const Rule b = rule.rhs();
    return Rule::disjunction(
        Rule::disjunction(Rule::conjunction(a, b), b),
        Rule::conjunction(Rule::negation(a), Rule::negation(b)));
}

namespace {

// Precedence for printing: -> binds loosest, then |, &, !.
int precedence(RuleKind k) {
    switch (k) {
        case RuleKind::IfThen: return 0;
        case RuleKind::Or: return 1;
        case RuleKind::And: return 2;
        case RuleKind::Not: return 3;
        case RuleKind::Unit: return 4;
    }
    return 4;
}

void format_into(const Rule& r, std::string& out, int parent_prec) {
    const int prec = precedence(r.kind());
    const bool parens = prec < parent_prec;
    if (parens) out += "(";
    switch (r.kind()) {
        case RuleKind::Unit: {
            const auto& u = r.unit_rule();
            out += "u(";
            out += u.scope().to_string();
            out += ",{";
            bool first = true;
            for (int c : u.counts()) {
                if (!first) out += ",";
                out += std::to_string(c);
                first = false;
            }
            out += "})";
            break;
        }
        case RuleKind::Not:
            out += "!";
            format_into(r.lhs(), out, precedence(RuleKind::Not) + 1);
            break;
        case RuleKind::And:
            format_into(r.lhs(), out, prec);
            out += " & ";
            format_into(r.rhs(), out, prec + 1);
            break;
        case RuleKind::Or:
            format_into(r.lhs(), out, prec);
            out += " | ";
            format_into(r.rhs(), out, prec + 1);
            break;
        case RuleKind::IfThen:
            // right-associative
            format_into(r.lhs(), out, prec + 1);
            out += " -> ";
            format_into(r.rhs(), out, prec);
            break;
    }
    if (parens) out += ")";
}

}  // namespace

std::string format_rule(const Rule& rule) {
    std::string out;
    format_into(rule, out, 0);
    return out;
}

RuleSet RuleSet::make(RegistryPtr reg, std::vector<NamedRule> rules,
                      std::optional<NamedRule> forced_rule) {
    RuleSet rs{reg, std::move(rules), VarSet::empty(reg), std::nullopt};
    for (const auto& nr : rs.rules) check_same_registry(reg, nr.rule.registry());
    if (forced_rule) {
        check_same_registry(reg, forced_rule->rule.registry());
        if (forced_rule->rule.kind() != RuleKind::Unit)
            throw UnsupportedRuleShape("forced rule must be a unit rule");
        const auto& u = forced_rule->rule.unit_rule();
        if (u.counts().size() != 1 || u.counts()[0] != u.scope().count())
            throw UnsupportedRuleShape("forced rule must select all of its scope");
        rs.forced = u.scope();
        rs.forced_rule = std::move(forced_rule);
    }
    return rs;
}

}  // namespace structsel
