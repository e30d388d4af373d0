#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "structsel/model.hpp"

using namespace structsel;

namespace {

RegistryPtr reg3() { return VarRegistry::create({"x1", "x2", "x3"}); }

GroupingStructure singletons(const RegistryPtr& reg) {
    std::vector<VarSet> g;
    for (std::size_t i = 0; i < reg->size(); ++i) g.push_back(VarSet(reg, 1ull << i));
    return GroupingStructure::make(reg, g);
}

Design random_design(const RegistryPtr& reg, int n, OutcomeKind kind, std::uint64_t seed,
                     const Eigen::VectorXd& beta, double b0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution flip;
    Design d;
    d.reg = reg;
    d.kind = kind;
    d.X.resize(n, static_cast<Eigen::Index>(reg->size()));
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d.X.cols(); ++j) d.X(i, j) = gauss(rng);
    Eigen::VectorXd eta = (d.X * beta).array() + b0;
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        if (kind == OutcomeKind::Continuous)
            d.y[i] = eta[i] + gauss(rng);
        else
            d.y[i] = std::bernoulli_distribution(oracles::sigmoid(eta[i]))(rng) ? 1.0 : 0.0;
    }
    return d;
}

}  // namespace

TEST_CASE("design validation") {
    auto reg = reg3();
    Design d;
    d.reg = reg;
    d.X = Eigen::MatrixXd::Zero(4, 3);
    d.y = Eigen::VectorXd::Zero(4);
    d.kind = OutcomeKind::Continuous;
    CHECK_NOTHROW(d.validate());

    Design bad_rows = d;
    bad_rows.y = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(bad_rows.validate(), DimensionMismatch);

    Design bad_cols = d;
    bad_cols.X = Eigen::MatrixXd::Zero(4, 2);
    CHECK_THROWS_AS(bad_cols.validate(), DimensionMismatch);

    Design bad_binary = d;
    bad_binary.kind = OutcomeKind::Binary;
    bad_binary.y[1] = 0.5;
    CHECK_THROWS_AS(bad_binary.validate(), Error);
    bad_binary.y[1] = 1.0;
    CHECK_NOTHROW(bad_binary.validate());
}

TEST_CASE("penalty specs and their guards") {
    CHECK(default_gamma(PenaltyKind::MCP) == doctest::Approx(3.0));
    CHECK(default_gamma(PenaltyKind::SCAD) == doctest::Approx(4.0));
    CHECK(penalty_name(PenaltyKind::L2) == "l2");
    CHECK(penalty_name(PenaltyKind::MCP) == "mcp");
    CHECK(penalty_name(PenaltyKind::SCAD) == "scad");

    CHECK(PenaltySpec::mcp(0.5).gamma == doctest::Approx(3.0));
    CHECK(PenaltySpec::scad(0.5).gamma == doctest::Approx(4.0));
    CHECK(PenaltySpec::l2(0.5).with_lambda(0.25).lambda == doctest::Approx(0.25));

    CHECK_THROWS_AS(PenaltySpec::l2(-0.1).validate(), Error);
    CHECK_THROWS_AS(PenaltySpec::mcp(0.5, 1.0).validate(), InvalidGamma);
    CHECK_THROWS_AS(PenaltySpec::scad(0.5, 2.0).validate(), InvalidGamma);
    CHECK_NOTHROW(PenaltySpec::mcp(0.5, 1.01).validate());
    CHECK_NOTHROW(PenaltySpec::scad(0.5, 2.01).validate());
}

TEST_CASE("penalty values piece by piece") {
    const double lam = 0.7, gam = 3.0;
    auto l2 = PenaltySpec::l2(lam);
    auto mcp = PenaltySpec::mcp(lam, gam);
    auto scad = PenaltySpec::scad(lam, 3.7);

    CHECK(penalty_value(0.0, l2) == 0.0);
    CHECK(penalty_value(2.0, l2) == doctest::Approx(1.4));

    CHECK(penalty_value(0.0, mcp) == 0.0);
    CHECK(penalty_value(1.0, mcp) == doctest::Approx(lam - 1.0 / (2 * gam)));
    CHECK(penalty_value(gam * lam, mcp) == doctest::Approx(gam * lam * lam / 2));
    CHECK(penalty_value(100.0, mcp) == doctest::Approx(gam * lam * lam / 2));

    const double g2 = 3.7;
    CHECK(penalty_value(0.5, scad) == doctest::Approx(lam * 0.5));
    CHECK(penalty_value(lam, scad) == doctest::Approx(lam * lam));
    const double mid = 2.0;
    CHECK(penalty_value(mid, scad) ==
          doctest::Approx((2 * g2 * lam * mid - mid * mid - lam * lam) / (2 * (g2 - 1))));
    CHECK(penalty_value(g2 * lam, scad) == doctest::Approx(lam * lam * (g2 + 1) / 2));
    CHECK(penalty_value(50.0, scad) == doctest::Approx(lam * lam * (g2 + 1) / 2));

    // continuity across the regional boundaries
    for (auto spec : {mcp, scad}) {
        for (double x : {spec.lambda, spec.gamma * spec.lambda}) {
            CHECK(penalty_value(x - 1e-9, spec) ==
                  doctest::Approx(penalty_value(x + 1e-9, spec)).epsilon(1e-6));
        }
    }
}

TEST_CASE("group prox closed forms") {
    Eigen::VectorXd v(2);
    v << 3.0, 4.0;  // norm 5

    SUBCASE("l2 soft thresholds the norm") {
        Eigen::VectorXd p = group_prox(v, 1.0, 1.0, PenaltySpec::l2(2.0));
        CHECK(p.norm() == doctest::Approx(3.0));
        CHECK(p[0] / p.norm() == doctest::Approx(0.6));
        Eigen::VectorXd z = group_prox(v, 1.0, 1.0, PenaltySpec::l2(5.0));
        CHECK(z.norm() == 0.0);
        Eigen::VectorXd w = group_prox(v, 2.0, 1.5, PenaltySpec::l2(1.0));
        CHECK(w.norm() == doctest::Approx(2.0));
    }

    SUBCASE("mcp and scad leave large norms untouched") {
        auto mcp = PenaltySpec::mcp(1.0, 3.0);
        auto scad = PenaltySpec::scad(1.0, 3.7);
        CHECK((group_prox(v, 1.0, 1.0, mcp) - v).norm() == doctest::Approx(0.0));
        CHECK((group_prox(v, 1.0, 1.0, scad) - v).norm() == doctest::Approx(0.0));
        Eigen::VectorXd small = 0.1 * v;
        CHECK(group_prox(small, 1.0, 1.0, mcp).norm() == 0.0);
        CHECK(group_prox(small, 1.0, 1.0, scad).norm() == 0.0);
    }

    SUBCASE("zero input stays zero") {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
        CHECK(group_prox(z, 1.0, 1.0, PenaltySpec::mcp(0.5)).norm() == 0.0);
    }

    SUBCASE("output is a nonnegative rescale of the input") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> gauss(0.0, 2.0);
        std::uniform_real_distribution<double> lam(0.0, 2.0);
        for (int rep = 0; rep < 200; ++rep) {
            Eigen::VectorXd u(3);
            u << gauss(rng), gauss(rng), gauss(rng);
            for (auto spec : {PenaltySpec::l2(lam(rng)), PenaltySpec::mcp(lam(rng), 2.5),
                              PenaltySpec::scad(lam(rng), 3.2)}) {
                Eigen::VectorXd p = group_prox(u, 1.3, 0.7, spec);
                if (p.norm() > 0) {
                    CHECK((p / p.norm() - u / u.norm()).norm() == doctest::Approx(0.0));
                    CHECK(p.norm() <= u.norm() + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("loss values and gradients") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 0.5, -0.25, 0.0;
    Design d = random_design(reg, 40, OutcomeKind::Continuous, 2, beta, 0.3);

    SUBCASE("continuous loss is half mean squared residual") {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
        const double v = loss_value_grad(d.X, d.y, d.kind, b, 0.0);
        CHECK(v == doctest::Approx(d.y.squaredNorm() / (2.0 * d.y.size())));
    }

    SUBCASE("binary loss at zero is log 2") {
        Design b = random_design(reg, 40, OutcomeKind::Binary, 3, beta, 0.0);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
        CHECK(loss_value_grad(b.X, b.y, b.kind, z, 0.0) == doctest::Approx(std::log(2.0)));
    }

    SUBCASE("gradients match central differences") {
        for (OutcomeKind kind : {OutcomeKind::Continuous, OutcomeKind::Binary}) {
            Design dd = random_design(reg, 30, kind, 4, beta, -0.2);
            Eigen::VectorXd at(3);
            at << 0.3, -0.1, 0.7;
            Eigen::VectorXd grad(3);
            double gi = 0.0;
            loss_value_grad(dd.X, dd.y, dd.kind, at, 0.4, &grad, &gi);
            auto f = [&](const Eigen::VectorXd& bb) {
                return loss_value_grad(dd.X, dd.y, dd.kind, bb, 0.4);
            };
            Eigen::VectorXd fd = oracles::fd_gradient(f, at);
            CHECK((grad - fd).lpNorm<Eigen::Infinity>() < 1e-7);

            const double up = loss_value_grad(dd.X, dd.y, dd.kind, at, 0.4 + 1e-5);
            const double dn = loss_value_grad(dd.X, dd.y, dd.kind, at, 0.4 - 1e-5);
            CHECK(gi == doctest::Approx((up - dn) / 2e-5).epsilon(1e-6));
        }
    }
}

TEST_CASE("lambda max pins the first support to empty") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 1.0, -0.8, 0.6;
    for (OutcomeKind kind : {OutcomeKind::Continuous, OutcomeKind::Binary}) {
        Design d = random_design(reg, 80, kind, 7, beta, 0.2);
        GroupingStructure g = singletons(reg);
        const double lmax = lambda_max(d, g);
        FitResult at = fit_logl(d, g, PenaltySpec::l2(lmax));
        CHECK(at.support.is_empty());
        CHECK(at.selected_groups.empty());
        FitResult below = fit_logl(d, g, PenaltySpec::l2(0.9 * lmax));
        CHECK_FALSE(below.support.is_empty());
    }
}

TEST_CASE("unpenalized continuous fit recovers least squares") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 0.9, -0.4, 0.15;
    Design d = random_design(reg, 60, OutcomeKind::Continuous, 11, beta, 1.5);
    GroupingStructure g = singletons(reg);
    FitOptions opts;
    opts.tol = 1e-14;
    opts.max_iter = 200000;
    FitResult fit = fit_logl(d, g, PenaltySpec::l2(0.0), opts);
    auto [b0, bh] = oracles::ols(d.X, d.y);
    CHECK((fit.beta - bh).lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK(fit.intercept == doctest::Approx(b0).epsilon(1e-7));
    CHECK(fit.converged);
}

TEST_CASE("fit invariants hold with overlapping groups") {
    auto reg = VarRegistry::create({"a", "b", "c", "d"});
    Eigen::VectorXd beta(4);
    beta << 1.2, 0.0, -0.7, 0.4;
    Design d = random_design(reg, 100, OutcomeKind::Continuous, 13, beta, 0.0);
    auto g = GroupingStructure::make(
        reg, {VarSet::of(reg, {"a"}), VarSet::of(reg, {"a", "b"}),
              VarSet::of(reg, {"b", "c", "d"}), VarSet::of(reg, {"d"})});
    FitOptions opts;
    opts.trace = true;
    FitResult fit = fit_logl(d, g, PenaltySpec::l2(0.05), opts);

    // objective trace never increases
    for (std::size_t i = 1; i < fit.trace.size(); ++i)
        CHECK(fit.trace[i] <= fit.trace[i - 1] + 1e-12);

    // support is exactly the union of the selected latent blocks
    VarSet uni = VarSet::empty(reg);
    for (int gi : fit.selected_groups) uni = uni.set_union(g.groups[gi]);
    CHECK(fit.support == uni);
    REQUIRE(fit.latent.size() == g.size());
    for (std::size_t gi = 0; gi < g.size(); ++gi) {
        CHECK(fit.latent[gi].members == g.groups[gi]);
        CHECK(fit.latent[gi].alpha.size() == g.groups[gi].count());
    }

    // standardized coefficients are the scatter sum of the latent blocks
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
    for (std::size_t gi = 0; gi < g.size(); ++gi) {
        auto idx = g.groups[gi].indices();
        for (std::size_t k = 0; k < idx.size(); ++k) sum[idx[k]] += fit.latent[gi].alpha[k];
    }
    CHECK((fit.beta_std - sum).lpNorm<Eigen::Infinity>() < 1e-12);

    // original and standardized coordinates describe the same predictions
    Eigen::MatrixXd Z = oracles::standardize(d.X);
    Eigen::VectorXd eta1 = (d.X * fit.beta).array() + fit.intercept;
    Eigen::VectorXd eta2 = (Z * fit.beta_std).array() + fit.intercept_std;
    CHECK((eta1 - eta2).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("standardization can be switched off") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 0.5, -0.5, 0.25;
    Design d = random_design(reg, 50, OutcomeKind::Continuous, 17, beta, 0.0);
    d.X.col(1) *= 40.0;  // inflate one column's scale
    FitOptions raw;
    raw.standardize = false;
    FitResult fit = fit_logl(d, singletons(reg), PenaltySpec::l2(0.1), raw);
    CHECK((fit.beta - fit.beta_std).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(fit.intercept == fit.intercept_std);

    FitResult std_fit = fit_logl(d, singletons(reg), PenaltySpec::l2(0.1));
    CHECK((fit.beta - std_fit.beta).lpNorm<Eigen::Infinity>() > 1e-6);
}

TEST_CASE("constant columns are tolerated") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 0.8, 0.0, -0.3;
    Design d = random_design(reg, 50, OutcomeKind::Continuous, 19, beta, 0.4);
    d.X.col(1).setConstant(2.5);
    FitResult fit = fit_logl(d, singletons(reg), PenaltySpec::l2(0.05));
    CHECK(std::isfinite(fit.objective));
    CHECK(std::isfinite(fit.beta[1]));
}

TEST_CASE("binary fits need both classes") {
    auto reg = reg3();
    Design d;
    d.reg = reg;
    d.kind = OutcomeKind::Binary;
    d.X = Eigen::MatrixXd::Random(10, 3);
    d.y = Eigen::VectorXd::Ones(10);
    CHECK_THROWS_AS(fit_logl(d, singletons(reg), PenaltySpec::l2(0.1)), Error);
}

TEST_CASE("heavier group weights zero a group sooner") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 1.0, 1.0, 1.0;
    Design d = random_design(reg, 120, OutcomeKind::Continuous, 23, beta, 0.0);
    auto light = singletons(reg);
    std::vector<double> w = {1.0, 1.0, 60.0};
    auto heavy = GroupingStructure::make(reg, light.groups, w);
    FitResult fit = fit_logl(d, heavy, PenaltySpec::l2(0.05));
    CHECK_FALSE(fit.support.contains("x3"));
    CHECK(fit.support.contains("x1"));
}

TEST_CASE("path grids are geometric and warm started") {
    auto reg = reg3();
    Eigen::VectorXd beta(3);
    beta << 1.0, -0.6, 0.3;
    Design d = random_design(reg, 90, OutcomeKind::Continuous, 29, beta, 0.1);
    GroupingStructure g = singletons(reg);

    auto path = fit_path(d, g, PenaltyKind::L2, 0.0, 10, 0.01);
    REQUIRE(path.size() == 10);
    const double lmax = path[0].penalty.lambda;
    for (int i = 0; i < 10; ++i) {
        CHECK(path[i].penalty.lambda ==
              doctest::Approx(lmax * std::pow(0.01, i / 9.0)).epsilon(1e-12));
        CHECK(path[i].converged);
    }
    CHECK(path[0].support.is_empty());
    CHECK_FALSE(path[9].support.is_empty());

    auto single = fit_path(d, g, PenaltyKind::L2, 0.0, 1, 0.01);
    CHECK(single.size() == 1);
    CHECK(single[0].penalty.lambda == doctest::Approx(lmax));

    auto explicit_path = fit_path(d, g, PenaltyKind::MCP, 3.0, {0.4, 0.2, 0.1});
    REQUIRE(explicit_path.size() == 3);
    CHECK(explicit_path[1].penalty.lambda == doctest::Approx(0.2));
    CHECK(explicit_path[1].penalty.gamma == doctest::Approx(3.0));

    CHECK_THROWS_AS(fit_path(d, g, PenaltyKind::L2, 0.0, 0, 0.01), Error);
    CHECK_THROWS_AS(fit_path(d, g, PenaltyKind::L2, 0.0, 5, 1.5), Error);
}

TEST_CASE("contrast estimates exponentiate coefficient sums") {
    auto reg = reg3();
    FitResult fit;
    fit.beta = Eigen::VectorXd::Zero(3);
    fit.beta << 0.5, -1.0, 0.25;
    std::vector<Contrast> cs = {{"ref", {}, {}},
                                {"mix", {"x1", "x3"}, {"x2"}},
                                {"neg", {}, {"x2"}}};
    auto est = estimate_contrasts(fit, reg, cs);
    REQUIRE(est.size() == 3);
    CHECK(est[0].second == doctest::Approx(1.0));
    CHECK(est[1].second == doctest::Approx(std::exp(0.5 + 0.25 + 1.0)));
    CHECK(est[2].second == doctest::Approx(std::exp(1.0)));
    CHECK(est[1].first == "mix");

    FitResult short_fit;
    short_fit.beta = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(estimate_contrasts(short_fit, reg, cs), DimensionMismatch);
    CHECK_THROWS_AS(estimate_contrasts(fit, reg, {{"bad", {"zz"}, {}}}), UnknownVariable);
}
