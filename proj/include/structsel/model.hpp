#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "structsel/grouping.hpp"

namespace structsel {

enum class OutcomeKind { Continuous, Binary };

struct Design {
    Eigen::MatrixXd X;  // n x p, columns in registry order
    Eigen::VectorXd y;
    RegistryPtr reg;
    OutcomeKind kind = OutcomeKind::Continuous;

    void validate() const;
};

enum class PenaltyKind { L2, MCP, SCAD };

double default_gamma(PenaltyKind kind);  // MCP 3, SCAD 4
std::string penalty_name(PenaltyKind kind);

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::L2;
    double lambda = 0.0;
    double gamma = 0.0;

    static PenaltySpec l2(double lambda);
    static PenaltySpec mcp(double lambda, double gamma = 3.0);
    static PenaltySpec scad(double lambda, double gamma = 4.0);
    void validate() const;  // lambda >= 0, MCP gamma > 1, SCAD gamma > 2

    PenaltySpec with_lambda(double l) const {
        PenaltySpec s = *this;
        s.lambda = l;
        return s;
    }
};

// Penalty applied to a group-norm value x >= 0:
//   L2   lambda*x
//   MCP  lambda*x - x^2/(2 gamma) for x <= gamma*lambda, else gamma*lambda^2/2
//   SCAD lambda*x for x <= lambda;
//        (2 gamma lambda x - x^2 - lambda^2)/(2(gamma-1)) for lambda < x < gamma*lambda;
//        lambda^2 (gamma+1)/2 for x >= gamma*lambda
double penalty_value(double x, const PenaltySpec& spec);

// Exact argmin_u 0.5*||u-v||^2 + step*weight*Omega(||u||; spec). The radial
// problem is solved over closed-form regional candidates plus breakpoints,
// so the global minimizer is returned even in the nonconvex regime; ties go
// to the smaller radius (zero first).
Eigen::VectorXd group_prox(const Eigen::VectorXd& v, double weight, double step,
                           const PenaltySpec& spec);

// Smooth part of the objective and its gradient at (beta, intercept):
// continuous: (1/2n)||y - eta||^2; binary: (1/n) sum log(1+exp(eta)) - y*eta.
double loss_value_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, OutcomeKind kind,
                       const Eigen::VectorXd& beta, double intercept,
                       Eigen::VectorXd* grad_beta = nullptr, double* grad_intercept = nullptr);

struct FitOptions {
    double tol = 1e-8;  // relative objective change
    int max_iter = 10000;
    bool standardize = true;
    bool trace = false;  // record accepted objective values in FitResult
};

struct GroupCoef {
    std::string name;
    VarSet members;
    double weight;
    Eigen::VectorXd alpha;  // standardized scale
};

struct FitResult {
    PenaltySpec penalty;
    double intercept = 0.0;  // original scale
    Eigen::VectorXd beta;    // original scale
    double intercept_std = 0.0;
    Eigen::VectorXd beta_std;
    std::vector<GroupCoef> latent;
    std::vector<int> selected_groups;  // indices with nonzero latent block
    VarSet support;                    // union of selected groups
    double objective = 0.0;            // penalized, standardized scale
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

// Smallest lambda at which every group stays at zero: the max over groups of
// ||group gradient at the null model||_2 / weight.
double lambda_max(const Design& design, const GroupingStructure& groups,
                  const FitOptions& opts = {});

// Latent overlapping group fit: one latent block per group constrained to
// its variables, beta the sum of blocks, intercept unpenalized. Accelerated
// proximal gradient with halving backtracking; momentum restarts keep the
// objective non-increasing.
FitResult fit_logl(const Design& design, const GroupingStructure& groups,
                   const PenaltySpec& spec, const FitOptions& opts = {});

// Warm-started fits over a geometric grid from lambda_max down to
// lambda_max*lambda_min_ratio, or over an explicit grid. A failed point is
// reported unconverged and the path continues.
std::vector<FitResult> fit_path(const Design& design, const GroupingStructure& groups,
                                PenaltyKind kind, double gamma, int n_lambda,
                                double lambda_min_ratio, const FitOptions& opts = {});
std::vector<FitResult> fit_path(const Design& design, const GroupingStructure& groups,
                                PenaltyKind kind, double gamma,
                                const std::vector<double>& lambdas,
                                const FitOptions& opts = {});

struct Contrast {
    std::string name;
    std::vector<std::string> plus;
    std::vector<std::string> minus;
};

// Odds-ratio style contrasts: exp(sum beta[plus] - sum beta[minus]) on the
// original coefficient scale.
std::vector<std::pair<std::string, double>> estimate_contrasts(
    const FitResult& fit, const RegistryPtr& reg, const std::vector<Contrast>& contrasts);

}  // namespace structsel
