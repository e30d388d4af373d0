// Cross-validation over a lambda path and synthetic data generation.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "structsel/model.hpp"

namespace structsel {

enum class RiskKind { Deviance, SquaredError, Misclassification };

std::string risk_name(RiskKind kind);

struct CVConfig {
    int folds = 10;
    // default: deviance for binary outcomes, squared error for continuous
    std::optional<RiskKind> risk;
    std::uint64_t seed = 0;
    bool stratified = true;
};

// Fold label per row. Stratified binary assignment shuffles each class
// separately and deals the classes round-robin through a shared counter,
// so fold sizes differ by at most one overall and per class.
std::vector<int> cv_fold_assignment(const Eigen::VectorXd& y, OutcomeKind kind,
                                    const CVConfig& cfg);

// Mean held-out risk of (beta, intercept) on the given rows.
double prediction_risk(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, OutcomeKind kind,
                       const Eigen::VectorXd& beta, double intercept, RiskKind risk);

struct PathConfig {
    PenaltyKind kind = PenaltyKind::L2;
    double gamma = 0.0;  // ignored for L2
    int n_lambda = 50;
    double lambda_min_ratio = 1e-3;
    FitOptions fit;
};

struct CVResult {
    std::vector<double> lambdas;          // shared full-data grid, descending
    Eigen::MatrixXd fold_risks;           // folds x lambdas
    std::vector<double> mean_risk;
    std::vector<double> sd_risk;
    std::vector<int> fold_of_row;
    int selected_index = 0;
    double selected_lambda = 0.0;
    RiskKind risk = RiskKind::Deviance;
    std::uint64_t seed = 0;
    FitResult final_fit;                  // full-data fit at selected_lambda
};

// K-fold CV over one penalty path. The grid comes from the full data and is
// shared by every fold. Selection: smallest mean risk, ties resolved toward
// the larger lambda. Throws DegenerateFold if some training split ends up
// with a single outcome class.
CVResult cross_validate(const Design& design, const GroupingStructure& groups,
                        const PathConfig& path, const CVConfig& cfg);

struct SyntheticSpec {
    int n = 250;
    RegistryPtr reg;  // null: the built-in application registry
    OutcomeKind kind = OutcomeKind::Binary;
    std::uint64_t seed = 1;
    double intercept = 0.0;
    std::map<std::string, double> beta;  // sparse truth, by variable name
    double sigma = 1.0;                  // continuous-outcome noise sd
    std::optional<Dictionary> target;    // if set, beta support must be a member

    // drug-category sampler knobs (application registry only)
    double p_warfarin = 0.43, p_high = 0.32, p_low = 0.24;  // normalized internally
    std::vector<double> brand_split_high{0.54, 0.11, 0.35};  // apixaban, dabigatran, rivaroxaban
    std::vector<double> brand_split_low{0.50, 0.28, 0.22};
    double p_high_adherence = 0.87;
};

// Draws covariates (drug category first, indicator coding after, interactions
// as products), then the outcome from the linear or logistic model at the
// true coefficients. Throws InfeasibleSpec when a target dictionary is given
// and the truth's support is not a member; UnknownVariable for bad beta keys.
Design generate_synthetic(const SyntheticSpec& spec);

}  // namespace structsel
