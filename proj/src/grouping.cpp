#include "structsel/grouping.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_set>

namespace structsel {

GroupingStructure GroupingStructure::make(RegistryPtr reg, std::vector<VarSet> groups,
                                          std::vector<double> weights,
                                          std::vector<std::string> names) {
    GroupingStructure g{std::move(reg), std::move(groups), std::move(weights), std::move(names)};
    std::unordered_set<std::uint64_t> seen;
    for (const auto& gr : g.groups) {
        check_same_registry(g.reg, gr.registry());
        if (gr.is_empty()) throw Error("grouping structure contains an empty group");
        if (!seen.insert(gr.mask()).second)
            throw Error("grouping structure contains duplicate group " + gr.to_string());
    }
    if (g.weights.empty()) {
        g.weights.reserve(g.groups.size());
        for (const auto& gr : g.groups) g.weights.push_back(std::sqrt(double(gr.count())));
    }
    if (g.weights.size() != g.groups.size())
        throw DimensionMismatch("group and weight counts differ");
    for (double w : g.weights)
        if (!(w > 0)) throw Error("group weights must be positive");
    if (g.names.empty()) {
        g.names.reserve(g.groups.size());
        for (std::size_t i = 0; i < g.groups.size(); ++i)
            g.names.push_back("g" + std::to_string(i + 1));
    }
    if (g.names.size() != g.groups.size())
        throw DimensionMismatch("group and name counts differ");
    return g;
}

VarSet GroupingStructure::covered() const {
    std::uint64_t m = 0;
    for (const auto& g : groups) m |= g.mask();
    return VarSet(reg, m);
}

bool GroupingStructure::covers_universe() const {
    return covered().mask() == reg->universe_mask();
}

namespace {

std::vector<std::uint64_t> all_unions(const GroupingStructure& g, const EnumerationCaps& caps) {
    const int I = static_cast<int>(g.size());
    if (I > caps.materialize)
        throw CapExceeded("union enumeration over " + std::to_string(I) +
                          " groups exceeds the materialization cap of " +
                          std::to_string(caps.materialize));
    std::vector<std::uint64_t> un(1ull << I);
    un[0] = 0;
    for (std::uint64_t s = 1; s < (1ull << I); ++s)
        un[s] = un[s & (s - 1)] | g.groups[std::countr_zero(s)].mask();
    return un;
}

}  // namespace

Dictionary induced_dictionary(const GroupingStructure& g, const EnumerationCaps& caps) {
    return Dictionary::from_masks(g.reg, all_unions(g, caps));
}

Dictionary ogl_induced_dictionary(const GroupingStructure& g, const EnumerationCaps& caps) {
    std::vector<std::uint64_t> un = all_unions(g, caps);
    const std::uint64_t univ = g.reg->universe_mask();
    for (auto& m : un) m = univ & ~m;
    return Dictionary::from_masks(g.reg, std::move(un));
}

std::string CongruenceResult::describe() const {
    if (congruent) return "congruent";
    if (!witness) return "not congruent";
    return std::string("not congruent; ") +
           (witness_in_induced ? "induced dictionary has extra member "
                               : "induced dictionary is missing ") +
           witness->to_string();
}

namespace {

CongruenceResult compare_to_target(const RegistryPtr& reg, const Dictionary& induced,
                                   const Dictionary& target) {
    const auto& a = induced.masks();
    const auto& b = target.masks();
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++i;
            ++j;
            continue;
        }
        CongruenceResult r;
        r.congruent = false;
        if (a[i] < b[j]) {
            r.witness = VarSet(reg, a[i]);
            r.witness_in_induced = true;
        } else {
            r.witness = VarSet(reg, b[j]);
            r.witness_in_induced = false;
        }
        return r;
    }
    if (i < a.size()) return {false, VarSet(reg, a[i]), true};
    if (j < b.size()) return {false, VarSet(reg, b[j]), false};
    return {true, std::nullopt, false};
}

}  // namespace

CongruenceResult verify_congruence(const GroupingStructure& g, const Dictionary& target,
                                   const EnumerationCaps& caps) {
    check_same_registry(g.reg, target.registry());
    return compare_to_target(g.reg, induced_dictionary(g, caps), target);
}

CongruenceResult verify_congruence_ogl(const GroupingStructure& g, const Dictionary& target,
                                       const EnumerationCaps& caps) {
    check_same_registry(g.reg, target.registry());
    return compare_to_target(g.reg, ogl_induced_dictionary(g, caps), target);
}

namespace {

// B split into units: declared bundles stay whole, the rest are singletons.
std::vector<std::uint64_t> consequent_units(const VarSet& B) {
    const auto& reg = B.registry();
    std::vector<std::uint64_t> units;
    std::uint64_t left = B.mask();
    while (left) {
        const int i = std::countr_zero(left);
        std::uint64_t u = reg->bundle_of(i);
        if (u == 0) {
            u = 1ull << i;
        } else if (u & ~B.mask()) {
            throw Error("bundle containing '" + reg->name(i) + "' straddles the consequent set");
        }
        units.push_back(u);
        left &= ~u;
    }
    return units;
}

}  // namespace

GroupingStructure synthesize_roadmap(RoadmapKind kind, const VarSet& A, const VarSet& B) {
    check_same_registry(A.registry(), B.registry());
    if (A.is_empty() || B.is_empty()) throw Error("roadmap sides must be non-empty");
    if (!A.set_intersect(B).is_empty())
        throw OverlapError("roadmap sides overlap: " + A.set_intersect(B).to_string());
    const auto& reg = A.registry();
    const std::vector<std::uint64_t> units = consequent_units(B);

    std::vector<VarSet> groups;
    for (auto u : units) groups.emplace_back(reg, u);
    switch (kind) {
        case RoadmapKind::AllThenAll:
            groups.emplace_back(reg, A.mask() | B.mask());
            break;
        case RoadmapKind::AnyThenAll:
            for (int a : A.indices()) groups.emplace_back(reg, B.mask() | (1ull << a));
            break;
        case RoadmapKind::AllThenAny:
            for (auto u : units) groups.emplace_back(reg, u | A.mask());
            break;
        case RoadmapKind::AnyThenAny:
            for (int a : A.indices())
                for (auto u : units) groups.emplace_back(reg, (1ull << a) | u);
            break;
    }
    return GroupingStructure::make(reg, std::move(groups));
}

Rule roadmap_rule(RoadmapKind kind, const VarSet& A, const VarSet& B) {
    check_same_registry(A.registry(), B.registry());
    if (!A.set_intersect(B).is_empty())
        throw OverlapError("roadmap sides overlap: " + A.set_intersect(B).to_string());
    const int n = A.count();
    const int m = B.count();
    auto range = [](int lo, int hi) {
        std::vector<int> v;
        for (int c = lo; c <= hi; ++c) v.push_back(c);
        return v;
    };
    const Rule all_a = Rule::unit(UnitRule(A, {n}));
    const Rule any_a = Rule::unit(UnitRule(A, range(1, n)));
    const Rule all_b = Rule::unit(UnitRule(B, {m}));
    const Rule any_b = Rule::unit(UnitRule(B, range(1, m)));
    const Rule guard = Rule::unit(UnitRule(A, {0, n}));
    switch (kind) {
        case RoadmapKind::AllThenAll:
            return Rule::conjunction(guard, Rule::implication(all_a, all_b));
        case RoadmapKind::AnyThenAll:
            return Rule::implication(any_a, all_b);
        case RoadmapKind::AllThenAny:
            return Rule::conjunction(guard, Rule::implication(all_a, any_b));
        case RoadmapKind::AnyThenAny:
            return Rule::implication(any_a, any_b);
    }
    throw Error("unreachable roadmap kind");
}

GroupingStructure combine_structures(const std::vector<GroupingStructure>& fragments,
                                     const VarSet& universe,
                                     const std::vector<Rule>& source_rules) {
    const auto& reg = universe.registry();
    std::vector<std::uint64_t> masks;
    std::unordered_set<std::uint64_t> seen;
    for (const auto& frag : fragments) {
        check_same_registry(reg, frag.reg);
        for (const auto& g : frag.groups) {
            if (g.mask() & ~universe.mask())
                throw Error("fragment group " + g.to_string() + " leaves the universe");
            if (seen.insert(g.mask()).second) masks.push_back(g.mask());
        }
    }
    std::uint64_t covered = 0;
    for (auto m : masks) covered |= m;
    for (std::uint64_t left = universe.mask() & ~covered; left; left &= left - 1) {
        const std::uint64_t single = left & (~left + 1);
        if (seen.insert(single).second) masks.push_back(single);
    }

    if (!source_rules.empty()) {
        // A singleton {v} makes the bare support {v} reachable; drop it when
        // that support breaks a rule and v stays covered elsewhere.
        std::vector<std::uint64_t> kept;
        kept.reserve(masks.size());
        for (auto m : masks) {
            bool drop = false;
            if (std::popcount(m) == 1) {
                bool violates = false;
                for (const auto& r : source_rules)
                    if (!satisfies(m, r)) {
                        violates = true;
                        break;
                    }
                if (violates) {
                    bool covered_elsewhere = false;
                    for (auto other : masks)
                        if (other != m && (other & m)) {
                            covered_elsewhere = true;
                            break;
                        }
                    drop = covered_elsewhere;
                }
            }
            if (!drop) kept.push_back(m);
        }
        masks = std::move(kept);
    }

    std::vector<VarSet> groups;
    groups.reserve(masks.size());
    for (auto m : masks) groups.emplace_back(reg, m);
    return GroupingStructure::make(reg, std::move(groups));
}

GroupingStructure synthesize_from_rules(const RuleSet& rs) {
    RestrictedRules rr = restrict_to_free(rs);
    if (rr.unsatisfiable)
        throw Error("rule set is unsatisfiable once the forced set is fixed");

    auto classify = [](const UnitRule& u) -> std::optional<bool> {
        // true: "all of scope", false: "any of scope", nullopt: neither
        const int n = u.scope().count();
        if (u.counts().size() == 1 && u.counts()[0] == n) return true;
        if (static_cast<int>(u.counts().size()) == n && u.counts().front() == 1 &&
            u.counts().back() == n)
            return false;
        return std::nullopt;
    };

    std::vector<GroupingStructure> fragments;
    std::vector<Rule> rules_for_pruning;
    for (const auto& nr : rr.rules) {
        rules_for_pruning.push_back(nr.rule);
        if (nr.rule.kind() == RuleKind::Unit) {
            const auto& u = nr.rule.unit_rule();
            const int n = u.scope().count();
            if (u.counts() == std::vector<int>{0, n} || u.counts() == std::vector<int>{n}) {
                fragments.push_back(GroupingStructure::make(rs.reg, {u.scope()}));
                continue;
            }
            throw UnsupportedRuleShape("rule '" + nr.name +
                                       "' is not expressible as a grouping fragment");
        }
        if (nr.rule.kind() != RuleKind::IfThen || nr.rule.lhs().kind() != RuleKind::Unit ||
            nr.rule.rhs().kind() != RuleKind::Unit)
            throw UnsupportedRuleShape("rule '" + nr.name + "' is not a unit->unit rule");
        const auto& ua = nr.rule.lhs().unit_rule();
        const auto& ub = nr.rule.rhs().unit_rule();
        const auto ka = classify(ua);
        const auto kb = classify(ub);
        if (!ka || !kb)
            throw UnsupportedRuleShape("rule '" + nr.name +
                                       "' does not match an all/any roadmap row");
        const RoadmapKind kind = *ka ? (*kb ? RoadmapKind::AllThenAll : RoadmapKind::AllThenAny)
                                     : (*kb ? RoadmapKind::AnyThenAll : RoadmapKind::AnyThenAny);
        fragments.push_back(synthesize_roadmap(kind, ua.scope(), ub.scope()));
    }
    if (!rs.forced.is_empty())
        fragments.push_back(GroupingStructure::make(rs.reg, {rs.forced}));

    return combine_structures(fragments, VarSet::universe(rs.reg), rules_for_pruning);
}

}  // namespace structsel
