#include "structsel/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace structsel {

void Design::validate() const {
    if (!reg) throw Error("design has no registry");
    if (X.cols() != static_cast<Eigen::Index>(reg->size()))
        throw DimensionMismatch("design has " + std::to_string(X.cols()) +
                                " columns for a registry of " + std::to_string(reg->size()));
    if (X.rows() != y.size())
        throw DimensionMismatch("X has " + std::to_string(X.rows()) + " rows but y has " +
                                std::to_string(y.size()));
    if (X.rows() == 0) throw DimensionMismatch("design is empty");
    if (kind == OutcomeKind::Binary) {
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 0.0 && y[i] != 1.0)
                throw Error("binary outcome must be coded 0/1");
    }
}

double default_gamma(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::MCP: return 3.0;
        case PenaltyKind::SCAD: return 4.0;
        case PenaltyKind::L2: return 0.0;
    }
    return 0.0;
}

std::string penalty_name(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::L2: return "l2";
        case PenaltyKind::MCP: return "mcp";
        case PenaltyKind::SCAD: return "scad";
    }
    return "?";
}

PenaltySpec PenaltySpec::l2(double lambda) { return {PenaltyKind::L2, lambda, 0.0}; }
PenaltySpec PenaltySpec::mcp(double lambda, double gamma) { return {PenaltyKind::MCP, lambda, gamma}; }
PenaltySpec PenaltySpec::scad(double lambda, double gamma) { return {PenaltyKind::SCAD, lambda, gamma}; }

void PenaltySpec::validate() const {
    if (!(lambda >= 0)) throw Error("lambda must be non-negative");
    if (kind == PenaltyKind::MCP && !(gamma > 1))
        throw InvalidGamma("MCP requires gamma > 1, got " + std::to_string(gamma));
    if (kind == PenaltyKind::SCAD && !(gamma > 2))
        throw InvalidGamma("SCAD requires gamma > 2, got " + std::to_string(gamma));
}

double penalty_value(double x, const PenaltySpec& spec) {
    spec.validate();
    if (x < 0) x = -x;
    const double l = spec.lambda;
    const double g = spec.gamma;
    switch (spec.kind) {
        case PenaltyKind::L2:
            return l * x;
        case PenaltyKind::MCP:
            if (x <= g * l) return l * x - x * x / (2.0 * g);
            return g * l * l / 2.0;
        case PenaltyKind::SCAD:
            if (x <= l) return l * x;
            if (x < g * l) return (2.0 * g * l * x - x * x - l * l) / (2.0 * (g - 1.0));
            return l * l * (g + 1.0) / 2.0;
    }
    return 0.0;
}

Eigen::VectorXd group_prox(const Eigen::VectorXd& v, double weight, double step,
                           const PenaltySpec& spec) {
    spec.validate();
    if (!(weight > 0) || !(step > 0)) throw Error("group_prox needs positive weight and step");
    const double z = v.norm();
    if (z == 0.0) return Eigen::VectorXd::Zero(v.size());

    const double tw = step * weight;
    const double l = spec.lambda;
    double best_s = 0.0;

    if (spec.kind == PenaltyKind::L2) {
        best_s = std::max(0.0, z - tw * l);
    } else {
        const double g = spec.gamma;
        std::vector<double> cand{0.0};
        if (spec.kind == PenaltyKind::MCP) {
            const double a = 1.0 - tw / g;
            if (a > 0) {
                const double r = (z - tw * l) / a;
                if (r > 0) cand.push_back(std::clamp(r, 0.0, g * l));
            }
            cand.push_back(g * l);
            cand.push_back(std::max(z, g * l));
        } else {  // SCAD
            const double r0 = z - tw * l;
            if (r0 > 0) cand.push_back(std::min(r0, l));
            cand.push_back(l);
            const double b = 1.0 - tw / (g - 1.0);
            if (b > 0) {
                const double r1 = (z - tw * g * l / (g - 1.0)) / b;
                if (r1 > l && r1 < g * l) cand.push_back(r1);
            }
            cand.push_back(g * l);
            cand.push_back(std::max(z, g * l));
        }
        std::sort(cand.begin(), cand.end());
        double best_phi = std::numeric_limits<double>::infinity();
        for (double s : cand) {
            if (s < 0) continue;
            const double phi = 0.5 * (s - z) * (s - z) + tw * penalty_value(s, spec);
            if (phi < best_phi) {  // strict: ties keep the smaller radius
                best_phi = phi;
                best_s = s;
            }
        }
    }
    if (best_s == 0.0) return Eigen::VectorXd::Zero(v.size());
    return v * (best_s / z);
}

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log1pexp(double x) {  // log(1 + exp(x)) without overflow
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace

double loss_value_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, OutcomeKind kind,
                       const Eigen::VectorXd& beta, double intercept,
                       Eigen::VectorXd* grad_beta, double* grad_intercept) {
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd eta = (X * beta).array() + intercept;
    double value = 0.0;
    Eigen::VectorXd geta(eta.size());
    if (kind == OutcomeKind::Continuous) {
        geta = (eta - y) / n;
        value = (eta - y).squaredNorm() / (2.0 * n);
    } else {
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            value += log1pexp(eta[i]) - y[i] * eta[i];
            geta[i] = (sigmoid(eta[i]) - y[i]) / n;
        }
        value /= n;
    }
    if (grad_beta) *grad_beta = X.transpose() * geta;
    if (grad_intercept) *grad_intercept = geta.sum();
    return value;
}

namespace {

struct GroupLayout {
    std::vector<std::vector<int>> cols;
    std::vector<int> offset;
    int total = 0;
};

GroupLayout layout_of(const GroupingStructure& groups) {
    GroupLayout lay;
    lay.cols.reserve(groups.size());
    lay.offset.reserve(groups.size());
    for (const auto& g : groups.groups) {
        lay.offset.push_back(lay.total);
        lay.cols.push_back(g.indices());
        lay.total += g.count();
    }
    return lay;
}

// Standardized view of the design plus everything the solver iterates on.
struct Problem {
    Eigen::MatrixXd Xs;
    Eigen::VectorXd y;
    OutcomeKind kind;
    Eigen::VectorXd mean, scale;
    GroupLayout lay;
    const GroupingStructure* groups = nullptr;

    Eigen::VectorXd beta_of(const Eigen::VectorXd& alpha) const {
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(Xs.cols());
        for (std::size_t i = 0; i < lay.cols.size(); ++i)
            for (std::size_t j = 0; j < lay.cols[i].size(); ++j)
                beta[lay.cols[i][j]] += alpha[lay.offset[i] + j];
        return beta;
    }

    double loss(const Eigen::VectorXd& alpha, double b0, Eigen::VectorXd* grad_alpha,
                double* grad_b0) const {
        Eigen::VectorXd gb;
        const double v = loss_value_grad(Xs, y, kind, beta_of(alpha), b0,
                                         grad_alpha ? &gb : nullptr, grad_b0);
        if (grad_alpha) {
            grad_alpha->resize(lay.total);
            for (std::size_t i = 0; i < lay.cols.size(); ++i)
                for (std::size_t j = 0; j < lay.cols[i].size(); ++j)
                    (*grad_alpha)[lay.offset[i] + j] = gb[lay.cols[i][j]];
        }
        return v;
    }

    double penalty(const Eigen::VectorXd& alpha, const PenaltySpec& spec,
                   const std::vector<double>& w) const {
        double p = 0.0;
        for (std::size_t i = 0; i < lay.cols.size(); ++i) {
            const double nrm =
                alpha.segment(lay.offset[i], static_cast<int>(lay.cols[i].size())).norm();
            p += w[i] * penalty_value(nrm, spec);
        }
        return p;
    }
};

Problem build_problem(const Design& design, const GroupingStructure& groups,
                      const FitOptions& opts) {
    design.validate();
    check_same_registry(design.reg, groups.reg);
    if (!groups.covers_universe())
        throw Error("grouping structure does not cover every design column");
    Problem pr;
    pr.y = design.y;
    pr.kind = design.kind;
    pr.lay = layout_of(groups);
    pr.groups = &groups;
    const Eigen::Index n = design.X.rows();
    const Eigen::Index p = design.X.cols();
    pr.mean = Eigen::VectorXd::Zero(p);
    pr.scale = Eigen::VectorXd::Ones(p);
    if (opts.standardize) {
        pr.mean = design.X.colwise().mean();
        pr.Xs = design.X.rowwise() - pr.mean.transpose();
        for (Eigen::Index j = 0; j < p; ++j) {
            const double sd = std::sqrt(pr.Xs.col(j).squaredNorm() / static_cast<double>(n));
            pr.scale[j] = sd > 1e-12 ? sd : 1.0;
            pr.Xs.col(j) /= pr.scale[j];
        }
    } else {
        pr.Xs = design.X;
    }
    return pr;
}

double null_intercept(const Problem& pr) {
    if (pr.kind == OutcomeKind::Continuous) return pr.y.mean();
    const double p = pr.y.mean();
    if (!(p > 0.0) || !(p < 1.0)) throw Error("binary outcome needs both classes to fit");
    return std::log(p / (1.0 - p));
}

struct FitState {
    Eigen::VectorXd alpha;
    double b0 = 0.0;
};

FitResult fit_logl_impl(const Design& design, const GroupingStructure& groups,
                        const PenaltySpec& spec, const FitOptions& opts,
                        const FitState* warm) {
    spec.validate();
    Problem pr = build_problem(design, groups, opts);
    const std::vector<double>& w = groups.weights;

    FitState x;
    if (warm && warm->alpha.size() == pr.lay.total) {
        x = *warm;
    } else {
        x.alpha = Eigen::VectorXd::Zero(pr.lay.total);
        x.b0 = null_intercept(pr);
    }

    double Fx = pr.loss(x.alpha, x.b0, nullptr, nullptr) + pr.penalty(x.alpha, spec, w);
    FitState y = x;
    double theta = 1.0;
    double t = 1.0;

    FitResult res;
    res.penalty = spec;
    res.support = VarSet::empty(design.reg);
    if (opts.trace) res.trace.push_back(Fx);

    // One backtracked proximal step from `from`; returns the candidate and
    // its smooth loss. Guaranteed to majorize, hence F(cand) <= F(from) when
    // `from` is the incumbent.
    auto prox_step = [&](const FitState& from, FitState& cand, double& loss_cand) -> bool {
        Eigen::VectorXd grad;
        double gb0 = 0.0;
        const double f0 = pr.loss(from.alpha, from.b0, &grad, &gb0);
        while (true) {
            cand.alpha.resize(pr.lay.total);
            for (std::size_t i = 0; i < pr.lay.cols.size(); ++i) {
                const int off = pr.lay.offset[i];
                const int sz = static_cast<int>(pr.lay.cols[i].size());
                Eigen::VectorXd v = from.alpha.segment(off, sz) - t * grad.segment(off, sz);
                cand.alpha.segment(off, sz) = group_prox(v, w[i], t, spec);
            }
            cand.b0 = from.b0 - t * gb0;
            const double fc = pr.loss(cand.alpha, cand.b0, nullptr, nullptr);
            const Eigen::VectorXd da = cand.alpha - from.alpha;
            const double db = cand.b0 - from.b0;
            const double quad = f0 + grad.dot(da) + gb0 * db +
                                (da.squaredNorm() + db * db) / (2.0 * t) +
                                1e-12 * (1.0 + std::abs(f0));
            if (fc <= quad) {
                loss_cand = fc;
                return true;
            }
            t *= 0.5;
            if (t < 1e-20) return false;
        }
    };

    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iter; ++iter) {
        FitState cand;
        double loss_cand = 0.0;
        if (!prox_step(y, cand, loss_cand)) break;
        double Fc = loss_cand + pr.penalty(cand.alpha, spec, w);

        if (Fc > Fx + 1e-10 * std::max(1.0, std::abs(Fx))) {
            // momentum overshoot: restart from the incumbent
            theta = 1.0;
            if (!prox_step(x, cand, loss_cand)) break;
            Fc = loss_cand + pr.penalty(cand.alpha, spec, w);
        }

        const double theta_new = (1.0 + std::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
        const double mom = (theta - 1.0) / theta_new;
        y.alpha = cand.alpha + mom * (cand.alpha - x.alpha);
        y.b0 = cand.b0 + mom * (cand.b0 - x.b0);
        theta = theta_new;

        const double rel = std::abs(Fx - Fc) / std::max(1.0, std::abs(Fx));
        x = cand;
        Fx = Fc;
        if (opts.trace) res.trace.push_back(Fx);
        if (rel < opts.tol) {
            converged = true;
            ++iter;
            break;
        }
    }

    res.iterations = iter;
    res.converged = converged;
    res.objective = Fx;
    res.intercept_std = x.b0;
    res.beta_std = pr.beta_of(x.alpha);

    res.beta = res.beta_std.array() / pr.scale.array();
    res.intercept = x.b0 - (res.beta_std.array() * pr.mean.array() / pr.scale.array()).sum();

    std::uint64_t support_mask = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const int off = pr.lay.offset[i];
        const int sz = static_cast<int>(pr.lay.cols[i].size());
        Eigen::VectorXd a = x.alpha.segment(off, sz);
        res.latent.push_back({groups.names[i], groups.groups[i], w[i], a});
        if (a.norm() > 0.0) {
            res.selected_groups.push_back(static_cast<int>(i));
            support_mask |= groups.groups[i].mask();
        }
    }
    res.support = VarSet(design.reg, support_mask);
    return res;
}

}  // namespace

double lambda_max(const Design& design, const GroupingStructure& groups, const FitOptions& opts) {
    Problem pr = build_problem(design, groups, opts);
    const double b0 = null_intercept(pr);
    Eigen::VectorXd grad;
    double gb0 = 0.0;
    pr.loss(Eigen::VectorXd::Zero(pr.lay.total), b0, &grad, &gb0);
    double lmax = 0.0;
    for (std::size_t i = 0; i < pr.lay.cols.size(); ++i) {
        const int off = pr.lay.offset[i];
        const int sz = static_cast<int>(pr.lay.cols[i].size());
        lmax = std::max(lmax, grad.segment(off, sz).norm() / groups.weights[i]);
    }
    // nudged up so the boundary group rounds to zero rather than 1 ulp above
    return lmax * (1.0 + 1e-9);
}

FitResult fit_logl(const Design& design, const GroupingStructure& groups, const PenaltySpec& spec,
                   const FitOptions& opts) {
    return fit_logl_impl(design, groups, spec, opts, nullptr);
}

std::vector<FitResult> fit_path(const Design& design, const GroupingStructure& groups,
                                PenaltyKind kind, double gamma,
                                const std::vector<double>& lambdas, const FitOptions& opts) {
    std::vector<FitResult> out;
    out.reserve(lambdas.size());
    FitState warm;
    bool have_warm = false;
    for (double l : lambdas) {
        PenaltySpec spec{kind, l, gamma};
        try {
            FitResult r =
                fit_logl_impl(design, groups, spec, opts, have_warm ? &warm : nullptr);
            Eigen::Index total = 0;
            for (const auto& gc : r.latent) total += gc.alpha.size();
            warm.alpha.resize(total);
            Eigen::Index at = 0;
            for (const auto& gc : r.latent) {
                warm.alpha.segment(at, gc.alpha.size()) = gc.alpha;
                at += gc.alpha.size();
            }
            warm.b0 = r.intercept_std;
            have_warm = true;
            out.push_back(std::move(r));
        } catch (const Error&) {
            FitResult failed;
            failed.penalty = spec;
            failed.support = VarSet::empty(design.reg);
            failed.converged = false;
            failed.objective = std::numeric_limits<double>::quiet_NaN();
            out.push_back(std::move(failed));
            have_warm = false;
        }
    }
    return out;
}

std::vector<FitResult> fit_path(const Design& design, const GroupingStructure& groups,
                                PenaltyKind kind, double gamma, int n_lambda,
                                double lambda_min_ratio, const FitOptions& opts) {
    if (n_lambda < 1) throw Error("n_lambda must be at least 1");
    if (!(lambda_min_ratio > 0) || lambda_min_ratio > 1)
        throw Error("lambda_min_ratio must be in (0, 1]");
    const double lmax = lambda_max(design, groups, opts);
    std::vector<double> grid;
    grid.reserve(n_lambda);
    for (int i = 0; i < n_lambda; ++i) {
        const double f = n_lambda == 1 ? 0.0 : static_cast<double>(i) / (n_lambda - 1);
        grid.push_back(lmax * std::pow(lambda_min_ratio, f));
    }
    return fit_path(design, groups, kind, gamma, grid, opts);
}

std::vector<std::pair<std::string, double>> estimate_contrasts(
    const FitResult& fit, const RegistryPtr& reg, const std::vector<Contrast>& contrasts) {
    if (fit.beta.size() != static_cast<Eigen::Index>(reg->size()))
        throw DimensionMismatch("fit and registry sizes differ");
    std::vector<std::pair<std::string, double>> out;
    out.reserve(contrasts.size());
    for (const auto& c : contrasts) {
        double s = 0.0;
        for (const auto& n : c.plus) s += fit.beta[reg->index(n)];
        for (const auto& n : c.minus) s -= fit.beta[reg->index(n)];
        out.emplace_back(c.name, std::exp(s));
    }
    return out;
}

}  // namespace structsel
