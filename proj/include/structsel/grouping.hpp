#pragma once

#include <optional>
#include <string>
#include <vector>

#include "structsel/dictionary.hpp"
#include "structsel/rules.hpp"
#include "structsel/varset.hpp"

namespace structsel {

// A collection of (possibly overlapping) variable groups with positive
// penalty weights. Fragments produced during synthesis need not cover the
// registry; structures used for fitting must.
struct GroupingStructure {
    RegistryPtr reg;
    std::vector<VarSet> groups;
    std::vector<double> weights;
    std::vector<std::string> names;

    // Default weight is sqrt(|g|); default names g1, g2, ...
    static GroupingStructure make(RegistryPtr reg, std::vector<VarSet> groups,
                                  std::vector<double> weights = {},
                                  std::vector<std::string> names = {});

    std::size_t size() const { return groups.size(); }
    bool covers_universe() const;
    VarSet covered() const;
};

// {union of any subset of groups}. 2^I unions enumerated, deduplicated,
// canonically ordered; needs about 8 * 2^I bytes, I capped by
// caps.materialize.
Dictionary induced_dictionary(const GroupingStructure& g, const EnumerationCaps& caps = {});

// Ordinary-overlapping-group variant: complements of the unions.
Dictionary ogl_induced_dictionary(const GroupingStructure& g, const EnumerationCaps& caps = {});

struct CongruenceResult {
    bool congruent = false;
    std::optional<VarSet> witness;   // first mismatch in canonical mask order
    bool witness_in_induced = false; // true: extra in induced; false: missing from it
    std::string describe() const;
};

// Does the structure induce exactly `target`?
CongruenceResult verify_congruence(const GroupingStructure& g, const Dictionary& target,
                                   const EnumerationCaps& caps = {});

// Same check against the ordinary-overlapping-group dictionary.
CongruenceResult verify_congruence_ogl(const GroupingStructure& g, const Dictionary& target,
                                       const EnumerationCaps& caps = {});

enum class RoadmapKind { AllThenAll, AnyThenAll, AllThenAny, AnyThenAny };

// Grouping fragment for one if-then selection dependency between disjoint
// sets A (antecedent) and B (consequent):
//   all->all : singletons for B's units, plus A ∪ B
//   any->all : singletons for B's units, plus B ∪ {a} per a in A
//   all->any : singletons for B's units, plus unit ∪ A per B unit
//   any->any : singletons for B's units, plus {a} ∪ unit per pair
// Registry bundles inside B act as one unit; A is taken variable by
// variable. Throws OverlapError when A and B intersect.
GroupingStructure synthesize_roadmap(RoadmapKind kind, const VarSet& A, const VarSet& B);

// The selection rule a roadmap fragment induces exactly (bundle-free case).
// The all->* rows carry the A-block none-or-all guard u_{0,|A|}(A): without
// it no union-closed dictionary exists for |A| >= 2.
Rule roadmap_rule(RoadmapKind kind, const VarSet& A, const VarSet& B);

// Union of fragments, deduplicated, plus singletons for uncovered variables.
// When source rules are given, singleton groups whose lone variable cannot
// be selected alone under the rules are dropped (as long as the variable
// stays covered by another group).
GroupingStructure combine_structures(const std::vector<GroupingStructure>& fragments,
                                     const VarSet& universe,
                                     const std::vector<Rule>& source_rules = {});

// Full synthesis pipeline for a rule set: rewrites rules to the free
// universe, classifies each unit->unit rule into a roadmap row, adds the
// forced set as one group, combines, and prunes singletons against the
// rules. none-or-all unit rules become a single block group.
GroupingStructure synthesize_from_rules(const RuleSet& rs);

}  // namespace structsel
