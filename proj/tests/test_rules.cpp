#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "structsel/rule_parser.hpp"
#include "structsel/rules.hpp"

using namespace structsel;

namespace {

RegistryPtr reg4() { return VarRegistry::create({"a", "b", "c", "d"}); }

bool same_truth_table(const Rule& x, const Rule& y, std::uint64_t universe) {
    for (std::uint64_t m = 0;; m = (m - universe) & universe) {
        if (satisfies(m, x) != satisfies(m, y)) return false;
        if (m == universe) return true;
    }
}

}  // namespace

TEST_CASE("unit rule validation") {
    auto reg = reg4();
    VarSet ab = VarSet::of(reg, {"a", "b"});
    CHECK_THROWS_AS(UnitRule(VarSet::empty(reg), {1}), Error);
    CHECK_THROWS_AS(UnitRule(ab, {}), Error);
    CHECK_THROWS_AS(UnitRule(ab, {3}), CountOutOfRange);
    CHECK_THROWS_AS(UnitRule(ab, {-1}), CountOutOfRange);

    UnitRule u(ab, {2, 0, 2});
    CHECK(u.counts() == std::vector<int>{0, 2});

    UnitRule all = UnitRule::select_all(ab);
    CHECK(all.counts() == std::vector<int>{2});
}

TEST_CASE("unit rule satisfaction counts selected scope variables") {
    auto reg = reg4();
    UnitRule u(VarSet::of(reg, {"a", "c"}), {0, 2});
    CHECK(u.satisfied_by(0b0000));
    CHECK(u.satisfied_by(0b0010));   // b alone: zero of scope
    CHECK_FALSE(u.satisfied_by(0b0001));  // a alone: one of scope
    CHECK_FALSE(u.satisfied_by(0b0110));  // b,c: one of scope
    CHECK(u.satisfied_by(0b0101));   // a,c: both
    CHECK(u.satisfied_by(0b1111));
}

TEST_CASE("rule tree accessors") {
    auto reg = reg4();
    Rule ua = Rule::unit(UnitRule(VarSet::of(reg, {"a"}), {1}));
    Rule ub = Rule::unit(UnitRule(VarSet::of(reg, {"b"}), {1}));
    Rule imp = Rule::implication(ua, ub);
    CHECK(imp.kind() == RuleKind::IfThen);
    CHECK(imp.lhs().kind() == RuleKind::Unit);
    CHECK(imp.lhs().unit_rule().scope() == VarSet::of(reg, {"a"}));
    CHECK(imp.rhs().unit_rule().scope() == VarSet::of(reg, {"b"}));
    CHECK_THROWS_AS(imp.unit_rule(), Error);
    CHECK_THROWS_AS(ua.lhs(), Error);
}

TEST_CASE("connective semantics over every subset") {
    auto reg = reg4();
    const std::uint64_t universe = reg->universe_mask();
    Rule ua = Rule::unit(UnitRule(VarSet::of(reg, {"a", "b"}), {2}));
    Rule ub = Rule::unit(UnitRule(VarSet::of(reg, {"c"}), {1}));
    Rule rnot = Rule::negation(ua);
    Rule rand = Rule::conjunction(ua, ub);
    Rule ror = Rule::disjunction(ua, ub);
    Rule rimp = Rule::implication(ua, ub);
    for (std::uint64_t m = 0; m <= universe; ++m) {
        const bool pa = satisfies(m, ua), pb = satisfies(m, ub);
        CHECK(satisfies(m, rnot) == !pa);
        CHECK(satisfies(m, rand) == (pa && pb));
        CHECK(satisfies(m, ror) == (pa || pb));
        CHECK(satisfies(m, rimp) == (!pa || pb));
    }
    CHECK(satisfies(VarSet::of(reg, {"a", "b", "c"}), rimp));
    auto other = VarRegistry::create({"x"});
    CHECK_THROWS_AS(satisfies(VarSet::of(other, {"x"}), ua), RegistryMismatch);
}

TEST_CASE("if-then re-expression has the identical truth table") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        auto rr = oracles::random_rule_set(rng, 8, 3);
        for (const auto& nr : rr.rules.rules) {
            if (nr.rule.kind() != RuleKind::IfThen) continue;
            Rule ex = ifthen_expand(nr.rule);
            CHECK(ex.kind() == RuleKind::Or);
            CHECK(same_truth_table(nr.rule, ex, rr.reg->universe_mask()));
        }
    }
    auto reg = reg4();
    Rule ua = Rule::unit(UnitRule(VarSet::of(reg, {"a"}), {1}));
    CHECK_THROWS_AS(ifthen_expand(ua), UnsupportedRuleShape);
}

TEST_CASE("format and parse round trip") {
    auto reg = reg4();
    Rule r = Rule::implication(
        Rule::conjunction(Rule::unit(UnitRule(VarSet::of(reg, {"a", "b"}), {0, 2})),
                          Rule::negation(Rule::unit(UnitRule(VarSet::of(reg, {"c"}), {1})))),
        Rule::disjunction(Rule::unit(UnitRule(VarSet::of(reg, {"d"}), {0})),
                          Rule::unit(UnitRule(VarSet::of(reg, {"a"}), {1}))));
    const std::string text = format_rule(r);
    Rule back = parse_rule(text, reg);
    CHECK(same_truth_table(r, back, reg->universe_mask()));
    CHECK(format_rule(back) == text);

    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 100; ++rep) {
        auto rr = oracles::random_rule_set(rng, 10, 4);
        for (const auto& nr : rr.rules.rules) {
            Rule again = parse_rule(format_rule(nr.rule), rr.reg);
            CHECK(same_truth_table(nr.rule, again, rr.reg->universe_mask()));
        }
    }
}

TEST_CASE("parser precedence and associativity") {
    auto reg = reg4();
    auto u = [&](const char* n) { return std::string("u({") + n + "},{1})"; };

    Rule r = parse_rule(u("a") + " & " + u("b") + " | " + u("c"), reg);
    CHECK(r.kind() == RuleKind::Or);
    CHECK(r.lhs().kind() == RuleKind::And);

    Rule r2 = parse_rule("!" + u("a") + " & " + u("b"), reg);
    CHECK(r2.kind() == RuleKind::And);
    CHECK(r2.lhs().kind() == RuleKind::Not);

    Rule r3 = parse_rule(u("a") + " -> " + u("b") + " -> " + u("c"), reg);
    CHECK(r3.kind() == RuleKind::IfThen);
    CHECK(r3.rhs().kind() == RuleKind::IfThen);
    CHECK(r3.lhs().kind() == RuleKind::Unit);

    Rule r4 = parse_rule("(" + u("a") + " -> " + u("b") + ") -> " + u("c"), reg);
    CHECK(r4.lhs().kind() == RuleKind::IfThen);
    CHECK(r4.rhs().kind() == RuleKind::Unit);

    Rule r5 = parse_rule("u({a,b},all)", reg);
    CHECK(r5.unit_rule() == UnitRule::select_all(VarSet::of(reg, {"a", "b"})));
}

TEST_CASE("hyphenated names survive next to the arrow") {
    auto reg = VarRegistry::create({"dose-high", "x"});
    Rule r = parse_rule("u({dose-high},{1}) -> u({x},{1})", reg);
    CHECK(r.kind() == RuleKind::IfThen);
    CHECK(r.lhs().unit_rule().scope() == VarSet::of(reg, {"dose-high"}));
}

TEST_CASE("parser diagnostics carry position") {
    auto reg = reg4();
    CHECK_THROWS_AS(parse_rule("u({a},{1}) &", reg), SyntaxError);
    CHECK_THROWS_AS(parse_rule("u({zz},{1})", reg), UnknownVariable);
    CHECK_THROWS_AS(parse_rule("u({a},{7})", reg), CountOutOfRange);
    CHECK_THROWS_AS(parse_rule("u({a},{1}) u({b},{1})", reg), SyntaxError);
    try {
        parse_rule("u({a},{1}) &\n& u({b},{1})", reg);
        CHECK(false);
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 1);
    }
}

TEST_CASE("rule files parse names comments and the forced tag") {
    auto reg = reg4();
    const std::string text =
        "# heredity\n"
        "r1 : u({a},{1}) -> u({b},{1})\n"
        "\n"
        "r2 : u({c,d},{0,2})\n"
        "forced: base : u({d}, all)\n";
    RuleSet rs = parse_rule_file(text, reg);
    CHECK(rs.rules.size() == 2);
    CHECK(rs.rules[0].name == "r1");
    CHECK(rs.rules[1].name == "r2");
    CHECK(rs.forced == VarSet::of(reg, {"d"}));
    REQUIRE(rs.forced_rule.has_value());
    CHECK(rs.forced_rule->name == "base");

    RuleSet back = parse_rule_file(format_rule_file(rs), reg);
    CHECK(back.rules.size() == rs.rules.size());
    CHECK(back.forced == rs.forced);
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
        CHECK(back.rules[i].name == rs.rules[i].name);
        CHECK(same_truth_table(back.rules[i].rule, rs.rules[i].rule, reg->universe_mask()));
    }
}

TEST_CASE("rule file rejections") {
    auto reg = reg4();
    CHECK_THROWS_AS(parse_rule_file("r1 : u({a},{1})\nr1 : u({b},{1})\n", reg), SyntaxError);
    CHECK_THROWS_AS(
        parse_rule_file("forced: f1 : u({a}, all)\nforced: f2 : u({b}, all)\n", reg),
        SyntaxError);
    CHECK_THROWS_AS(parse_rule_file("forced: f : u({a,b},{1})\n", reg), UnsupportedRuleShape);
    CHECK_THROWS_AS(parse_rule_file("r1 u({a},{1})\n", reg), SyntaxError);
}

TEST_CASE("rule set assembly validates the forced rule") {
    auto reg = reg4();
    Rule all = Rule::unit(UnitRule::select_all(VarSet::of(reg, {"a", "b"})));
    Rule partial = Rule::unit(UnitRule(VarSet::of(reg, {"a", "b"}), {1}));
    RuleSet ok = RuleSet::make(reg, {}, NamedRule{"f", all});
    CHECK(ok.forced == VarSet::of(reg, {"a", "b"}));
    CHECK_THROWS_AS(RuleSet::make(reg, {}, NamedRule{"f", partial}), UnsupportedRuleShape);
    CHECK_THROWS_AS(RuleSet::make(reg, {}, NamedRule{"f", Rule::negation(all)}),
                    UnsupportedRuleShape);

    RuleSet none = RuleSet::make(reg, {NamedRule{"r", partial}});
    CHECK(none.forced.is_empty());
    CHECK_FALSE(none.forced_rule.has_value());
}
