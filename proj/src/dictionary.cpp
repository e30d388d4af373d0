#include "structsel/dictionary.hpp"

#include <algorithm>
#include <bit>
#include <thread>

namespace structsel {

namespace {

// Scatters the low bits of `idx` into the set bit positions of `mask`.
std::uint64_t deposit_bits(std::uint64_t idx, std::uint64_t mask) {
    std::uint64_t out = 0;
    while (idx && mask) {
        const std::uint64_t low = mask & (~mask + 1);
        if (idx & 1u) out |= low;
        idx >>= 1;
        mask ^= low;
    }
    return out;
}

}  // namespace

Dictionary unit_dictionary(const UnitRule& u, const VarSet& universe,
                           const EnumerationCaps& caps) {
    check_same_registry(u.scope().registry(), universe.registry());
    if (!u.scope().is_subset_of(universe))
        throw Error("unit rule scope " + u.scope().to_string() + " is not within the universe");
    const int k = universe.count();
    if (k > caps.materialize)
        throw CapExceeded("unit dictionary over " + std::to_string(k) +
                          " variables exceeds the materialization cap of " +
                          std::to_string(caps.materialize));

    const std::uint64_t rest = universe.mask() & ~u.scope().mask();
    const auto bits = u.scope().indices();
    const int n = static_cast<int>(bits.size());

    std::vector<std::uint64_t> masks;
    for (int c : u.counts()) {
        if (c == 0) {
            std::uint64_t b = 0;
            while (true) {
                masks.push_back(b);
                b = (b - rest) & rest;
                if (b == 0) break;
            }
            continue;
        }
        // classic ascending-combination walk over the scope's bit positions
        std::vector<int> pick(c);
        for (int i = 0; i < c; ++i) pick[i] = i;
        while (true) {
            std::uint64_t a = 0;
            for (int i = 0; i < c; ++i) a |= 1ull << bits[pick[i]];
            std::uint64_t b = 0;
            while (true) {
                masks.push_back(a | b);
                b = (b - rest) & rest;
                if (b == 0) break;
            }
            int i = c - 1;
            while (i >= 0 && pick[i] == n - c + i) --i;
            if (i < 0) break;
            ++pick[i];
            for (int j = i + 1; j < c; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return Dictionary::from_masks(universe.registry(), std::move(masks));
}

Dictionary rule_dictionary(const Rule& rule, const VarSet& universe,
                           const EnumerationCaps& caps) {
    switch (rule.kind()) {
        case RuleKind::Unit:
            return unit_dictionary(rule.unit_rule(), universe, caps);
        case RuleKind::Not:
            return dict_complement(rule_dictionary(rule.lhs(), universe, caps), universe, caps);
        case RuleKind::And:
            return dict_intersect(rule_dictionary(rule.lhs(), universe, caps),
                                  rule_dictionary(rule.rhs(), universe, caps));
        case RuleKind::Or:
            return dict_union(rule_dictionary(rule.lhs(), universe, caps),
                              rule_dictionary(rule.rhs(), universe, caps));
        case RuleKind::IfThen: {
            Dictionary d1 = rule_dictionary(rule.lhs(), universe, caps);
            Dictionary d2 = rule_dictionary(rule.rhs(), universe, caps);
            return dict_union(dict_complement(d1, universe, caps), dict_intersect(d1, d2));
        }
    }
    throw Error("unreachable rule kind");
}

namespace {

// Tri-state fold used while deleting forced variables from a rule tree.
struct Folded {
    enum class K { True, False, Expr } k;
    std::optional<Rule> rule;

    static Folded yes() { return {K::True, std::nullopt}; }
    static Folded no() { return {K::False, std::nullopt}; }
    static Folded expr(Rule r) { return {K::Expr, std::move(r)}; }
};

Folded fold_negate(Folded f) {
    switch (f.k) {
        case Folded::K::True: return Folded::no();
        case Folded::K::False: return Folded::yes();
        case Folded::K::Expr: break;
    }
    // negated unit rule = unit rule with the complemented count set
    if (f.rule->kind() == RuleKind::Unit) {
        const auto& u = f.rule->unit_rule();
        const int n = u.scope().count();
        std::vector<int> comp;
        for (int c = 0; c <= n; ++c)
            if (!((u.counts_bits() >> c) & 1u)) comp.push_back(c);
        if (comp.empty()) return Folded::no();
        if (static_cast<int>(comp.size()) == n + 1) return Folded::yes();
        return Folded::expr(Rule::unit(UnitRule(u.scope(), std::move(comp))));
    }
    return Folded::expr(Rule::negation(*f.rule));
}

Folded fold_restrict(const Rule& r, const VarSet& forced) {
    switch (r.kind()) {
        case RuleKind::Unit: {
            const auto& u = r.unit_rule();
            const VarSet kept = u.scope().set_difference(forced);
            const int removed = u.scope().count() - kept.count();
            std::vector<int> shifted;
            for (int c : u.counts()) {
                const int s = c - removed;
                if (s >= 0 && s <= kept.count()) shifted.push_back(s);
            }
            if (kept.is_empty())
                return u.satisfied_by(forced.mask() & u.scope().mask()) ? Folded::yes()
                                                                        : Folded::no();
            if (shifted.empty()) return Folded::no();
            if (static_cast<int>(shifted.size()) == kept.count() + 1) return Folded::yes();
            return Folded::expr(Rule::unit(UnitRule(kept, std::move(shifted))));
        }
        case RuleKind::Not:
            return fold_negate(fold_restrict(r.lhs(), forced));
        case RuleKind::And: {
            Folded a = fold_restrict(r.lhs(), forced);
            Folded b = fold_restrict(r.rhs(), forced);
            if (a.k == Folded::K::False || b.k == Folded::K::False) return Folded::no();
            if (a.k == Folded::K::True) return b;
            if (b.k == Folded::K::True) return a;
            return Folded::expr(Rule::conjunction(*a.rule, *b.rule));
        }
        case RuleKind::Or: {
            Folded a = fold_restrict(r.lhs(), forced);
            Folded b = fold_restrict(r.rhs(), forced);
            if (a.k == Folded::K::True || b.k == Folded::K::True) return Folded::yes();
            if (a.k == Folded::K::False) return b;
            if (b.k == Folded::K::False) return a;
            return Folded::expr(Rule::disjunction(*a.rule, *b.rule));
        }
        case RuleKind::IfThen: {
            Folded a = fold_restrict(r.lhs(), forced);
            Folded b = fold_restrict(r.rhs(), forced);
            if (a.k == Folded::K::False || b.k == Folded::K::True) return Folded::yes();
            if (a.k == Folded::K::True) return b;
            if (b.k == Folded::K::False) return fold_negate(std::move(a));
            return Folded::expr(Rule::implication(*a.rule, *b.rule));
        }
    }
    throw Error("unreachable rule kind");
}

}  // namespace

RestrictedRules restrict_to_free(const RuleSet& rs) {
    RestrictedRules out;
    if (rs.forced.is_empty()) {
        out.rules = rs.rules;
        return out;
    }
    for (const auto& nr : rs.rules) {
        Folded f = fold_restrict(nr.rule, rs.forced);
        switch (f.k) {
            case Folded::K::True: break;  // vacuous once the forced set is in
            case Folded::K::False: out.unsatisfiable = true; break;
            case Folded::K::Expr: out.rules.push_back({nr.name, *f.rule}); break;
        }
    }
    return out;
}

RuleSet none_or_all_relaxation(const RuleSet& rs) {
    if (rs.forced.is_empty()) return rs;
    RestrictedRules rr = restrict_to_free(rs);
    if (rr.unsatisfiable)
        throw Error("rule set is unsatisfiable once the forced set is fixed");
    std::vector<NamedRule> rules = std::move(rr.rules);
    UnitRule none_or_all(rs.forced, {0, rs.forced.count()});
    const std::string name =
        (rs.forced_rule ? rs.forced_rule->name : std::string("forced")) + ".none-or-all";
    rules.push_back({name, Rule::unit(std::move(none_or_all))});
    return RuleSet::make(rs.reg, std::move(rules));
}

Dictionary derive_algorithm1(const RuleSet& rs, const EnumerationCaps& caps) {
    for (const auto& nr : rs.rules) {
        const bool ok = nr.rule.kind() == RuleKind::Unit ||
                        (nr.rule.kind() == RuleKind::IfThen &&
                         nr.rule.lhs().kind() == RuleKind::Unit &&
                         nr.rule.rhs().kind() == RuleKind::Unit);
        if (!ok)
            throw UnsupportedRuleShape("rule '" + nr.name +
                                       "' is not a unit or unit->unit rule");
    }
    const VarSet free_universe = VarSet::universe(rs.reg).set_difference(rs.forced);
    RestrictedRules rr = restrict_to_free(rs);
    if (rr.unsatisfiable) return Dictionary(rs.reg, {});

    Dictionary d = power_set(free_universe, caps);
    for (const auto& nr : rr.rules) {
        Dictionary dr = [&] {
            if (nr.rule.kind() == RuleKind::Unit)
                return unit_dictionary(nr.rule.unit_rule(), free_universe, caps);
            Dictionary d1 = unit_dictionary(nr.rule.lhs().unit_rule(), free_universe, caps);
            Dictionary d2 = unit_dictionary(nr.rule.rhs().unit_rule(), free_universe, caps);
            return dict_union(dict_complement(d1, free_universe, caps), dict_intersect(d1, d2));
        }();
        d = dict_intersect(d, dr);
    }

    if (rs.forced.is_empty()) return d;
    std::vector<std::uint64_t> masks = d.masks();
    for (auto& m : masks) m |= rs.forced.mask();
    return Dictionary(rs.reg, std::move(masks));
}

namespace {

// Flat, allocation-free rule evaluator for the exhaustive scan.
struct CompiledRule {
    struct Op {
        enum class K : std::uint8_t { Unit, Not, And, Or, IfThen } k;
        std::uint64_t scope = 0;
        std::uint64_t counts = 0;
    };
    enum class Shape { Unit, IfThenUnits, Program } shape = Shape::Program;
    std::uint64_t f1 = 0, c1 = 0, f2 = 0, c2 = 0;
    std::vector<Op> prog;

    static bool unit_ok(std::uint64_t x, std::uint64_t scope, std::uint64_t counts) {
        return (counts >> std::popcount(x & scope)) & 1u;
    }

    bool eval(std::uint64_t x) const {
        switch (shape) {
            case Shape::Unit:
                return unit_ok(x, f1, c1);
            case Shape::IfThenUnits:
                return !unit_ok(x, f1, c1) || unit_ok(x, f2, c2);
            case Shape::Program: {
                bool stack[64];
                int sp = 0;
                for (const auto& op : prog) {
                    switch (op.k) {
                        case Op::K::Unit: stack[sp++] = unit_ok(x, op.scope, op.counts); break;
                        case Op::K::Not: stack[sp - 1] = !stack[sp - 1]; break;
                        case Op::K::And: --sp; stack[sp - 1] = stack[sp - 1] && stack[sp]; break;
                        case Op::K::Or: --sp; stack[sp - 1] = stack[sp - 1] || stack[sp]; break;
                        case Op::K::IfThen: --sp; stack[sp - 1] = !stack[sp - 1] || stack[sp]; break;
                    }
                }
                return stack[0];
            }
        }
        return false;
    }
};

// Returns the evaluation stack depth the emitted program needs.
int compile_into(const Rule& r, std::vector<CompiledRule::Op>& prog) {
    using Op = CompiledRule::Op;
    switch (r.kind()) {
        case RuleKind::Unit:
            prog.push_back({Op::K::Unit, r.unit_rule().scope().mask(), r.unit_rule().counts_bits()});
            return 1;
        case RuleKind::Not: {
            const int d = compile_into(r.lhs(), prog);
            prog.push_back({Op::K::Not});
            return d;
        }
        case RuleKind::And:
        case RuleKind::Or:
        case RuleKind::IfThen: {
            const int da = compile_into(r.lhs(), prog);
            const int db = compile_into(r.rhs(), prog);
            prog.push_back({r.kind() == RuleKind::And  ? Op::K::And
                            : r.kind() == RuleKind::Or ? Op::K::Or
                                                       : Op::K::IfThen});
            return std::max(da, 1 + db);
        }
    }
    return 1;
}

CompiledRule compile_rule(const Rule& r) {
    CompiledRule c;
    if (r.kind() == RuleKind::Unit) {
        c.shape = CompiledRule::Shape::Unit;
        c.f1 = r.unit_rule().scope().mask();
        c.c1 = r.unit_rule().counts_bits();
        return c;
    }
    if (r.kind() == RuleKind::IfThen && r.lhs().kind() == RuleKind::Unit &&
        r.rhs().kind() == RuleKind::Unit) {
        c.shape = CompiledRule::Shape::IfThenUnits;
        c.f1 = r.lhs().unit_rule().scope().mask();
        c.c1 = r.lhs().unit_rule().counts_bits();
        c.f2 = r.rhs().unit_rule().scope().mask();
        c.c2 = r.rhs().unit_rule().counts_bits();
        return c;
    }
    if (compile_into(r, c.prog) > 64)
        throw UnsupportedRuleShape("rule nests too deeply for the exhaustive scan");
    return c;
}

}  // namespace

Dictionary derive_algorithm2(const RuleSet& rs, const EnumerationCaps& caps, int threads) {
    const std::uint64_t forced = rs.forced.mask();
    const std::uint64_t free_mask = rs.reg->universe_mask() & ~forced;
    const int k = std::popcount(free_mask);
    if (k > caps.scan)
        throw CapExceeded("exhaustive scan over " + std::to_string(k) +
                          " variables exceeds the scan cap of " + std::to_string(caps.scan));

    std::vector<CompiledRule> compiled;
    compiled.reserve(rs.rules.size());
    for (const auto& nr : rs.rules) compiled.push_back(compile_rule(nr.rule));

    const std::uint64_t total = 1ull << k;
    auto scan_range = [&](std::uint64_t begin_idx, std::uint64_t end_idx,
                          std::vector<std::uint64_t>& out) {
        std::uint64_t sub = deposit_bits(begin_idx, free_mask);
        for (std::uint64_t i = begin_idx; i < end_idx; ++i) {
            const std::uint64_t candidate = sub | forced;
            bool ok = true;
            for (const auto& c : compiled) {
                if (!c.eval(candidate)) {
                    ok = false;
                    break;
                }
            }
            if (ok) out.push_back(candidate);
            sub = (sub - free_mask) & free_mask;
        }
    };

    std::vector<std::uint64_t> masks;
    if (threads <= 1 || total < (1ull << 16)) {
        scan_range(0, total, masks);
    } else {
        const int t = std::min<std::uint64_t>(threads, 64);
        std::vector<std::vector<std::uint64_t>> parts(t);
        std::vector<std::thread> pool;
        pool.reserve(t);
        for (int w = 0; w < t; ++w) {
            const std::uint64_t b = total / t * w;
            const std::uint64_t e = (w == t - 1) ? total : total / t * (w + 1);
            pool.emplace_back([&, b, e, w] { scan_range(b, e, parts[w]); });
        }
        for (auto& th : pool) th.join();
        std::size_t n = 0;
        for (const auto& p : parts) n += p.size();
        masks.reserve(n);
        for (const auto& p : parts) masks.insert(masks.end(), p.begin(), p.end());
    }
    // ascending submask walk + disjoint forced bits keep the order canonical
    return Dictionary(rs.reg, std::move(masks));
}

}  // namespace structsel
