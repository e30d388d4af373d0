#include "structsel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "structsel/fixtures.hpp"

namespace structsel {

std::string risk_name(RiskKind kind) {
    switch (kind) {
        case RiskKind::Deviance: return "deviance";
        case RiskKind::SquaredError: return "squared_error";
        case RiskKind::Misclassification: return "misclassification";
    }
    return "?";
}

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log1pexp(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace

std::vector<int> cv_fold_assignment(const Eigen::VectorXd& y, OutcomeKind kind,
                                    const CVConfig& cfg) {
    const int n = static_cast<int>(y.size());
    if (cfg.folds < 2) throw Error("cross-validation needs at least 2 folds");
    if (cfg.folds > n) throw Error("more folds than rows");
    std::mt19937_64 rng(cfg.seed);
    std::vector<int> fold(n, -1);
    int next = 0;
    auto deal = [&](std::vector<int>& rows) {
        std::shuffle(rows.begin(), rows.end(), rng);
        for (int r : rows) fold[r] = next++ % cfg.folds;
    };
    if (kind == OutcomeKind::Binary && cfg.stratified) {
        std::vector<int> ones, zeros;
        for (int i = 0; i < n; ++i) (y[i] > 0.5 ? ones : zeros).push_back(i);
        deal(ones);
        deal(zeros);
    } else {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        deal(all);
    }
    return fold;
}

double prediction_risk(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, OutcomeKind kind,
                       const Eigen::VectorXd& beta, double intercept, RiskKind risk) {
    if (X.rows() == 0) throw Error("prediction_risk on zero rows");
    if (X.cols() != beta.size()) throw DimensionMismatch("beta length does not match X columns");
    Eigen::VectorXd eta = (X * beta).array() + intercept;
    const double n = static_cast<double>(X.rows());
    double acc = 0.0;
    switch (risk) {
        case RiskKind::SquaredError:
            return (y - eta).squaredNorm() / n;
        case RiskKind::Deviance:
            if (kind != OutcomeKind::Binary) throw Error("deviance risk needs a binary outcome");
            for (Eigen::Index i = 0; i < eta.size(); ++i)
                acc += 2.0 * (log1pexp(eta[i]) - y[i] * eta[i]);
            return acc / n;
        case RiskKind::Misclassification:
            if (kind != OutcomeKind::Binary)
                throw Error("misclassification risk needs a binary outcome");
            for (Eigen::Index i = 0; i < eta.size(); ++i)
                acc += (eta[i] > 0.0) != (y[i] > 0.5) ? 1.0 : 0.0;
            return acc / n;
    }
    return acc;
}

CVResult cross_validate(const Design& design, const GroupingStructure& groups,
                        const PathConfig& path, const CVConfig& cfg) {
    design.validate();
    const int n = static_cast<int>(design.X.rows());
    const RiskKind risk = cfg.risk.value_or(
        design.kind == OutcomeKind::Binary ? RiskKind::Deviance : RiskKind::SquaredError);
    const double gamma = path.gamma > 0 ? path.gamma : default_gamma(path.kind);

    std::vector<FitResult> full = fit_path(design, groups, path.kind, gamma, path.n_lambda,
                                           path.lambda_min_ratio, path.fit);
    std::vector<double> lambdas;
    lambdas.reserve(full.size());
    for (const auto& r : full) lambdas.push_back(r.penalty.lambda);

    CVResult res;
    res.lambdas = lambdas;
    res.fold_of_row = cv_fold_assignment(design.y, design.kind, cfg);
    res.risk = risk;
    res.seed = cfg.seed;
    res.fold_risks.setConstant(cfg.folds, static_cast<Eigen::Index>(lambdas.size()),
                               std::numeric_limits<double>::quiet_NaN());

    for (int f = 0; f < cfg.folds; ++f) {
        std::vector<int> train, test;
        for (int i = 0; i < n; ++i) (res.fold_of_row[i] == f ? test : train).push_back(i);
        if (test.empty()) continue;

        Design tr;
        tr.X.resize(static_cast<Eigen::Index>(train.size()), design.X.cols());
        tr.y.resize(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            tr.X.row(static_cast<Eigen::Index>(i)) = design.X.row(train[i]);
            tr.y[static_cast<Eigen::Index>(i)] = design.y[train[i]];
        }
        tr.reg = design.reg;
        tr.kind = design.kind;
        if (design.kind == OutcomeKind::Binary) {
            const double m = tr.y.mean();
            if (!(m > 0.0) || !(m < 1.0))
                throw DegenerateFold("training split for fold " + std::to_string(f) +
                                     " has a single outcome class");
        }

        Eigen::MatrixXd Xte(static_cast<Eigen::Index>(test.size()), design.X.cols());
        Eigen::VectorXd yte(static_cast<Eigen::Index>(test.size()));
        for (std::size_t i = 0; i < test.size(); ++i) {
            Xte.row(static_cast<Eigen::Index>(i)) = design.X.row(test[i]);
            yte[static_cast<Eigen::Index>(i)] = design.y[test[i]];
        }

        std::vector<FitResult> fits = fit_path(tr, groups, path.kind, gamma, lambdas, path.fit);
        for (std::size_t j = 0; j < fits.size(); ++j) {
            if (fits[j].beta.size() != design.X.cols()) continue;  // failed point stays NaN
            res.fold_risks(f, static_cast<Eigen::Index>(j)) =
                prediction_risk(Xte, yte, design.kind, fits[j].beta, fits[j].intercept, risk);
        }
    }

    const std::size_t L = lambdas.size();
    res.mean_risk.resize(L);
    res.sd_risk.resize(L);
    for (std::size_t j = 0; j < L; ++j) {
        const auto col = res.fold_risks.col(static_cast<Eigen::Index>(j));
        const double m = col.mean();
        res.mean_risk[j] = m;
        double ss = 0.0;
        for (int f = 0; f < cfg.folds; ++f) ss += (col[f] - m) * (col[f] - m);
        res.sd_risk[j] = cfg.folds > 1 ? std::sqrt(ss / (cfg.folds - 1)) : 0.0;
    }

    // ascending scan with strict improvement: ties resolve to the larger
    // lambda, which comes first on the descending grid
    int best = 0;
    for (std::size_t j = 1; j < L; ++j)
        if (res.mean_risk[j] < res.mean_risk[best]) best = static_cast<int>(j);
    res.selected_index = best;
    res.selected_lambda = lambdas[best];
    res.final_fit = full[best];
    return res;
}

namespace {

int draw_category(std::mt19937_64& rng, const std::vector<double>& cum) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t k = 0; k < cum.size(); ++k)
        if (u < cum[k]) return static_cast<int>(k);
    return static_cast<int>(cum.size()) - 1;
}

}  // namespace

Design generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 1) throw Error("synthetic spec needs n >= 1");
    RegistryPtr reg = spec.reg ? spec.reg : fixtures::application_registry();
    const int p = static_cast<int>(reg->size());

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    std::uint64_t support = 0;
    for (const auto& [name, value] : spec.beta) {
        const int j = reg->index(name);
        beta[j] = value;
        if (value != 0.0) support |= std::uint64_t{1} << j;
    }
    if (spec.target) {
        check_same_registry(reg, spec.target->registry());
        if (!spec.target->contains(support))
            throw InfeasibleSpec("true support " + VarSet(reg, support).to_string() +
                                 " is not a member of the target dictionary");
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(spec.n, p);

    const bool app_schema = reg->same_as(*fixtures::application_registry());
    if (app_schema) {
        if (spec.brand_split_high.size() != 3 || spec.brand_split_low.size() != 3)
            throw Error("brand splits need exactly 3 entries (apixaban, dabigatran, rivaroxaban)");
        // categories: warfarin, then high-dose x brand, then low-dose x brand
        std::vector<double> w = {spec.p_warfarin,
                                 spec.p_high * spec.brand_split_high[0],
                                 spec.p_high * spec.brand_split_high[1],
                                 spec.p_high * spec.brand_split_high[2],
                                 spec.p_low * spec.brand_split_low[0],
                                 spec.p_low * spec.brand_split_low[1],
                                 spec.p_low * spec.brand_split_low[2]};
        double total = 0.0;
        for (double x : w) {
            if (x < 0) throw Error("category probabilities must be non-negative");
            total += x;
        }
        if (!(total > 0)) throw Error("category probabilities sum to zero");
        std::vector<double> cum(w.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            acc += w[k] / total;
            cum[k] = acc;
        }

        const auto& prev = fixtures::default_prevalences();
        const int iDOAC = reg->index("DOAC");
        const int iApix = reg->index("Apixaban");
        const int iDabi = reg->index("Dabigatran");
        const int iHigh = reg->index("HighDoseDOAC");
        const int iHA = reg->index("HighAdherence");

        for (int i = 0; i < spec.n; ++i) {
            for (int j = 0; j < p; ++j) {
                auto it = prev.find(reg->name(j));
                if (it != prev.end()) X(i, j) = unif(rng) < it->second ? 1.0 : 0.0;
            }
            const int cat = draw_category(rng, cum);
            if (cat > 0) {
                X(i, iDOAC) = 1.0;
                if (cat <= 3) X(i, iHigh) = 1.0;
                if (cat == 1 || cat == 4) X(i, iApix) = 1.0;
                if (cat == 2 || cat == 5) X(i, iDabi) = 1.0;
            }
            X(i, iHA) = unif(rng) < spec.p_high_adherence ? 1.0 : 0.0;
            X(i, reg->index("DOACxHighAdherence")) = X(i, iDOAC) * X(i, iHA);
            X(i, reg->index("HighDoseDOACxHighAdherence")) = X(i, iHigh) * X(i, iHA);
            X(i, reg->index("DOACxAntiplatelets")) = X(i, iDOAC) * X(i, reg->index("Antiplatelets"));
            X(i, reg->index("DOACxNSAIDs")) = X(i, iDOAC) * X(i, reg->index("NSAIDs"));
            X(i, reg->index("DOACxAntidepressants")) =
                X(i, iDOAC) * X(i, reg->index("Antidepressants"));
            X(i, reg->index("DOACxPPIs")) = X(i, iDOAC) * X(i, reg->index("PPIs"));
        }
    } else {
        for (int i = 0; i < spec.n; ++i)
            for (int j = 0; j < p; ++j) X(i, j) = unif(rng) < 0.5 ? 1.0 : 0.0;
    }

    Design d;
    d.X = X;
    d.reg = reg;
    d.kind = spec.kind;
    d.y.resize(spec.n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < spec.n; ++i) {
        const double eta = spec.intercept + X.row(i).dot(beta);
        if (spec.kind == OutcomeKind::Binary)
            d.y[i] = unif(rng) < sigmoid(eta) ? 1.0 : 0.0;
        else
            d.y[i] = eta + spec.sigma * gauss(rng);
    }
    d.validate();
    return d;
}

}  // namespace structsel
