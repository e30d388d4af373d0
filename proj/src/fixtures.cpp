#include "structsel/fixtures.hpp"

#include "structsel/rule_parser.hpp"

namespace structsel {
namespace fixtures {

RegistryPtr application_registry() {
    static const RegistryPtr reg = VarRegistry::create({
        "Age",
        "Sex",
        "CHA2DS2VASc",
        "Stroke",
        "Anemia",
        "Malignancy",
        "LiverDisease",
        "MajorBleedingHistory",
        "RenalDisease",
        "HeartDisease",
        "Diabetes",
        "COPD",
        "Dyslipidemia",
        "DOAC",
        "Apixaban",
        "Dabigatran",
        "HighDoseDOAC",
        "HighAdherence",
        "DOACxHighAdherence",
        "HighDoseDOACxHighAdherence",
        "Antiplatelets",
        "NSAIDs",
        "Antidepressants",
        "PPIs",
        "DOACxAntiplatelets",
        "DOACxNSAIDs",
        "DOACxAntidepressants",
        "DOACxPPIs",
    });
    return reg;
}

std::string application_rules_text() {
    return R"(# Anticoagulant study selection rules.
# r1.*: interpretability of the drug coding; r2.*: strong heredity for
# drug-drug interactions; base: pre-selected variables, always in the model.

r1.1 : u({HighDoseDOAC}, {1}) -> u({DOAC}, {1})
r1.2 : u({Apixaban}, {1}) -> u({DOAC}, {1})
r1.3 : u({Dabigatran}, {1}) -> u({DOAC}, {1})
r1.4 : u({DOACxHighAdherence}, {1}) -> u({DOAC, HighAdherence}, {2})
r1.5 : u({HighDoseDOACxHighAdherence}, {1}) -> u({DOAC, HighAdherence, HighDoseDOAC, DOACxHighAdherence}, {4})

r2.1 : u({DOACxAntiplatelets}, {1}) -> u({DOAC, Antiplatelets}, {2})
r2.2 : u({DOACxNSAIDs}, {1}) -> u({DOAC, NSAIDs}, {2})
r2.3 : u({DOACxAntidepressants}, {1}) -> u({DOAC, Antidepressants}, {2})
r2.4 : u({DOACxPPIs}, {1}) -> u({DOAC, PPIs}, {2})

forced: base : u({Age, Sex, Stroke, Anemia, Malignancy, LiverDisease, MajorBleedingHistory, RenalDisease, Antiplatelets, NSAIDs}, all)
)";
}

RuleSet application_rules() {
    return parse_rule_file(application_rules_text(), application_registry());
}

GroupingStructure application_grouping() {
    RegistryPtr reg = application_registry();
    auto v = [&](std::initializer_list<std::string> names) {
        return VarSet::of(reg, std::vector<std::string>(names));
    };
    std::vector<VarSet> groups = {
        v({"CHA2DS2VASc"}),
        v({"HeartDisease"}),
        v({"Diabetes"}),
        v({"COPD"}),
        v({"Dyslipidemia"}),
        v({"DOAC"}),
        v({"DOAC", "HighDoseDOAC"}),
        v({"DOAC", "Apixaban"}),
        v({"DOAC", "Dabigatran"}),
        v({"HighAdherence"}),
        v({"DOAC", "HighAdherence", "DOACxHighAdherence"}),
        v({"DOAC", "HighAdherence", "DOACxHighAdherence", "HighDoseDOAC",
           "HighDoseDOACxHighAdherence"}),
        v({"DOAC", "DOACxAntiplatelets"}),
        v({"DOAC", "DOACxNSAIDs"}),
        v({"Antidepressants"}),
        v({"DOAC", "Antidepressants", "DOACxAntidepressants"}),
        v({"PPIs"}),
        v({"DOAC", "PPIs", "DOACxPPIs"}),
        v({"Age", "MajorBleedingHistory", "Stroke", "Anemia", "Sex", "RenalDisease",
           "LiverDisease", "Malignancy", "Antiplatelets", "NSAIDs"}),
    };
    return GroupingStructure::make(reg, groups);
}

std::vector<Contrast> doac_contrast_preset() {
    return {
        {"Warfarin", {}, {}},
        {"HighDoseApixaban", {"DOAC", "HighDoseDOAC", "Apixaban"}, {}},
        {"HighDoseDabigatran", {"DOAC", "HighDoseDOAC", "Dabigatran"}, {}},
        {"HighDoseRivaroxaban", {"DOAC", "HighDoseDOAC"}, {}},
        {"LowDoseApixaban", {"DOAC", "Apixaban"}, {}},
        {"LowDoseDabigatran", {"DOAC", "Dabigatran"}, {}},
        {"LowDoseRivaroxaban", {"DOAC"}, {}},
    };
}

const std::map<std::string, double>& default_prevalences() {
    static const std::map<std::string, double> p = {
        {"Age", 0.77},
        {"Sex", 0.58},
        {"CHA2DS2VASc", 0.88},
        {"Stroke", 0.28},
        {"Anemia", 0.10},
        {"Malignancy", 0.26},
        {"LiverDisease", 0.02},
        {"MajorBleedingHistory", 0.34},
        {"RenalDisease", 0.27},
        {"HeartDisease", 0.63},
        {"Diabetes", 0.36},
        {"COPD", 0.39},
        {"Dyslipidemia", 0.58},
        {"Antiplatelets", 0.32},
        {"NSAIDs", 0.01},
        {"Antidepressants", 0.18},
        {"PPIs", 0.44},
    };
    return p;
}

}  // namespace fixtures
}  // namespace structsel
