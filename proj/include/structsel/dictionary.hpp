#pragma once

#include "structsel/rules.hpp"
#include "structsel/varset.hpp"

namespace structsel {

// All sets {a ∪ b : a ⊆ scope with |a| in counts, b ⊆ universe∖scope}.
// Cardinality: (Σ_c C(|scope|,c)) * 2^(|universe|-|scope|).
Dictionary unit_dictionary(const UnitRule& u, const VarSet& universe,
                           const EnumerationCaps& caps = {});

// Dictionary of an arbitrary rule over `universe`, by structural recursion:
// not -> complement, and -> intersection, or -> union,
// if-then -> complement(D1) ∪ (D1 ∩ D2). Set operations only; no candidate
// filtering.
Dictionary rule_dictionary(const Rule& rule, const VarSet& universe,
                           const EnumerationCaps& caps = {});

// Rules restricted to the free universe (registry minus the forced set):
// forced variables are deleted from scopes and counts shifted down by the
// number removed; rules that fold to constant-true are dropped.
struct RestrictedRules {
    std::vector<NamedRule> rules;
    bool unsatisfiable = false;  // some rule folded to constant false
};
RestrictedRules restrict_to_free(const RuleSet& rs);

// Replaces the forced select-all rule with the none-or-all unit rule
// u(A, {0,|A|}) and rewrites the remaining rules to the free universe.
// Identity when nothing is forced.
RuleSet none_or_all_relaxation(const RuleSet& rs);

// Set-operations route: per-rule unit dictionaries over the free universe
// combined with the if-then formula, intersected across rules, forced set
// unioned into every member. Rules must be unit or unit->unit shaped.
Dictionary derive_algorithm1(const RuleSet& rs, const EnumerationCaps& caps = {});

// Exhaustive route: filters every subset of the free universe through
// satisfies() (evaluated with the forced set joined in), then unions the
// forced set into survivors. Any rule shape. The scan is bounded by
// caps.scan; only survivors are materialized.
Dictionary derive_algorithm2(const RuleSet& rs, const EnumerationCaps& caps = {},
                             int threads = 1);

}  // namespace structsel
