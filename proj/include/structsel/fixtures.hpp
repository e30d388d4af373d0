// Built-in application fixtures: the 28-variable anticoagulant registry, its
// ten selection rules, the 19-group structure, and the DOAC odds-ratio
// contrast preset.
#pragma once

#include <map>
#include <string>

#include "structsel/grouping.hpp"
#include "structsel/model.hpp"
#include "structsel/rules.hpp"

namespace structsel {
namespace fixtures {

// 28 binary covariates: 13 baseline/comorbidity flags, the DOAC indicator
// coding, adherence, co-medication, and the product interactions.
RegistryPtr application_registry();

// The ten rules in the shipped rule-file syntax: strong-heredity if-then
// rules for the drug indicators and interactions, plus the forced block of
// ten pre-selected variables.
std::string application_rules_text();

RuleSet application_rules();

// The hand-specified 19-group structure the rules induce.
GroupingStructure application_grouping();

// Odds-ratio contrasts of each DOAC category versus warfarin. Warfarin is
// included as the reference row (empty sum, ratio 1).
std::vector<Contrast> doac_contrast_preset();

// Marginal prevalences used by the synthetic sampler for the non-derived
// covariates.
const std::map<std::string, double>& default_prevalences();

}  // namespace fixtures
}  // namespace structsel
