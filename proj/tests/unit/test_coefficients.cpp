#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nemfp/coefficients.hpp"
#include "nemfp/errors.hpp"

using namespace nemfp;

namespace {

HypothesisGrid small_lattice(double r_max = 3.0) {
    HypothesisGrid g;
    g.t_samples = {0.0, 0.25, 0.5};
    g.x_samples = linspace(-3.0, 3.0, 25);
    g.r_samples = linspace(-r_max, r_max, 41);
    g.r_samples[20] = 0.0;
    return g;
}

CoefficientModel porous_nonlocal(double gamma0, double alpha = 1.0) {
    return make_model({Family::porous_regularized, alpha, 0.0, false}, {Family::constant, 0.0}, gamma0,
                      {Envelope::Kind::constant, 1.0, 1.0});
}

CoefficientModel burgers(double c, double h_scale) {
    return make_model({Family::constant, 1.0}, {Family::burgers_gauss, c}, 1.0, {Envelope::Kind::gauss, h_scale, 1.0});
}

// User model without analytic derivatives.
CoefficientModel user_model(ScalarField a, ScalarField b, double gamma0, Envelope h) {
    CoefficientModel m;
    m.id = "user";
    m.a = std::move(a);
    m.b = std::move(b);
    m.gamma0 = gamma0;
    m.h = h;
    return m;
}

}  // namespace

TEST(Beta, MatchesHandEvaluation) {
    EXPECT_EQ(eval_beta(constant_model(1.0, 0.0), 0.0, 0.0, 2.0), 2.0);
    EXPECT_EQ(eval_beta(porous_nonlocal(1.0), 0.0, 0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_beta(porous_nonlocal(1.0), 0.0, 0.0, 1.0), 1.5);
}

TEST(Bstar, MatchesHandEvaluation) {
    EXPECT_EQ(eval_bstar(constant_model(1.0, 0.0), 0.3, 1.0, 5.0), 0.0);
    EXPECT_EQ(eval_bstar(constant_model(1.0, 0.5), 0.0, 0.0, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(eval_bstar(burgers(1.0, 2.0), 0.0, 0.0, 1.0), 0.5);
}

TEST(Beta, IsExactlyTheProductOnEveryFamily) {
    const CoefficientModel models[] = {
        constant_model(0.7, -0.2),
        make_model({Family::porous_regularized, 1.3, 0.5, true}, {Family::burgers_gauss, 0.8}, 0.4,
                   {Envelope::Kind::gauss, 3.0, 1.5}),
        make_model({Family::decaying, 1.0}, {Family::constant, 0.1}, 0.1, {}),
    };
    for (const auto& m : models) {
        for (double t : {0.0, 0.3}) {
            for (double x : {-2.0, 0.1, 1.7}) {
                for (double r : {-3.0, -0.4, 0.0, 0.9, 4.0}) {
                    EXPECT_EQ(eval_beta(m, t, x, r), m.eval_a(t, x, r) * r);
                    EXPECT_EQ(eval_bstar(m, t, x, r), m.eval_b(t, x, r) * r);
                }
            }
        }
    }
}

TEST(Evaluation, NonFiniteCoefficientThrows) {
    auto m = user_model([](double, double, double r) { return 1.0 / r; }, [](double, double, double) { return 0.0; },
                        1.0, {});
    EXPECT_THROW(eval_beta(m, 0.0, 0.0, 0.0), ModelEvaluationError);
    EXPECT_NO_THROW(eval_beta(m, 0.0, 0.0, 2.0));
}

TEST(MakeModel, RejectsNonPositiveGamma0) {
    EXPECT_THROW(make_model({}, {}, 0.0, {}), ConfigError);
    EXPECT_THROW(make_model({}, {}, -1.0, {}), ConfigError);
}

TEST(FiniteDifference, HalvingTheStepReducesErrorQuadratically) {
    const auto m = make_model({Family::porous_regularized, 1.0, 0.5, true}, {Family::burgers_gauss, 0.7}, 0.5,
                              {Envelope::Kind::gauss, 3.0, 1.4});
    const double t = 0.3, x = 0.4, r = 0.8;
    struct Pair {
        double analytic;
        double (CoefficientModel::*fd)(double, double, double, std::optional<double>) const;
    };
    const Pair pairs[] = {
        {m.da_dr(t, x, r), &CoefficientModel::eval_da_dr},
        {m.db_dr(t, x, r), &CoefficientModel::eval_db_dr},
        {m.da_dx(t, x, r), &CoefficientModel::eval_da_dx},
        {m.db_dx(t, x, r), &CoefficientModel::eval_db_dx},
    };
    for (const auto& p : pairs) {
        const double e1 = std::abs((m.*p.fd)(t, x, r, 1e-2) - p.analytic);
        const double e2 = std::abs((m.*p.fd)(t, x, r, 5e-3) - p.analytic);
        ASSERT_GT(e1, 0.0);
        EXPECT_GE(e1 / e2, 3.5);
    }
}

TEST(Lattice, ValidationRejectsDegenerateGrids) {
    HypothesisGrid g = small_lattice();
    g.r_samples = {0.5, 1.0};
    EXPECT_THROW(g.validate(), ConfigError);
    g = small_lattice();
    g.x_samples.clear();
    EXPECT_THROW(g.validate(), ConfigError);
    EXPECT_THROW(check_monotonicity(constant_model(1.0, 0.0), g), ConfigError);
}

TEST(Monotonicity, LinearBetaReportsItsSlope) {
    const auto m = constant_model(1.0, 0.0);
    const auto rep = check_monotonicity(m, small_lattice());
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.estimated_constant, 1.0, 1e-12);
}

TEST(Monotonicity, ScaledIdentityReportsGamma0) {
    const double gamma0 = 0.37;
    const auto rep = check_monotonicity(constant_model(gamma0, 0.0, gamma0), small_lattice());
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.estimated_constant, gamma0, 1e-12);
}

TEST(Monotonicity, DecayingDiffusionFailsBeyondUnitDensity) {
    const auto m = make_model({Family::decaying, 1.0}, {Family::constant, 0.0}, 0.1, {});
    const auto g = small_lattice();
    const auto rep = check_monotonicity(m, g);
    ASSERT_FALSE(rep.passed);
    ASSERT_TRUE(rep.witness.has_value());
    const auto& w = *rep.witness;
    EXPECT_GT(std::max(std::abs(w.r), std::abs(w.r_bar)), 1.0);

    // Independent oracle: the sign of the beta difference quotient on the same pair.
    const double beta_r = w.r / (1 + w.r * w.r);
    const double beta_rb = w.r_bar / (1 + w.r_bar * w.r_bar);
    EXPECT_LT((beta_r - beta_rb) / (w.r - w.r_bar), m.gamma0);
}

TEST(Monotonicity, PorousFamilyMeetsItsDeclaredConstant) {
    const auto rep = check_monotonicity(porous_nonlocal(0.5), small_lattice(5.0));
    EXPECT_TRUE(rep.passed);
    EXPECT_GE(rep.estimated_constant, 0.5 - 1e-12);
}

TEST(Lipschitz, ZeroDriftHasZeroConstant) {
    const auto rep = check_lipschitz_bstar(constant_model(1.0, 0.0), small_lattice());
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.estimated_constant, 0.0);
}

TEST(Lipschitz, BurgersDriftFitsItsEnvelope) {
    const auto rep = check_lipschitz_bstar(burgers(1.0, 2.0), small_lattice());
    EXPECT_TRUE(rep.passed);
    EXPECT_LE(rep.estimated_constant, 0.5 + 1e-12);
}

TEST(Lipschitz, UnboundedGrowthFailsAwayFromTheOrigin) {
    const auto m = user_model([](double, double, double) { return 1.0; }, [](double, double, double r) { return r; },
                              1.0, {Envelope::Kind::gauss, 1.0, 1.0});
    const auto rep = check_lipschitz_bstar(m, small_lattice());
    ASSERT_FALSE(rep.passed);
    ASSERT_TRUE(rep.witness.has_value());
    EXPECT_GT(std::abs(rep.witness->x), 1.0);
}

TEST(Lipschitz, ZeroEnvelopeWithDriftFailsWithWitness) {
    const auto m = make_model({Family::constant, 1.0}, {Family::constant, 0.5}, 1.0, {Envelope::Kind::constant, 0.0});
    const auto rep = check_lipschitz_bstar(m, small_lattice());
    EXPECT_FALSE(rep.passed);
    EXPECT_TRUE(rep.witness.has_value());
    EXPECT_TRUE(std::isfinite(rep.estimated_constant));
}

TEST(Lambda, VanishesForSpaceIndependentCoefficients) {
    EXPECT_EQ(estimate_lambda(constant_model(1.0, 0.0), small_lattice()).estimated_constant, 0.0);
    EXPECT_EQ(estimate_lambda(constant_model(2.0, 0.3), small_lattice()).estimated_constant, 0.0);
    EXPECT_EQ(estimate_lambda(porous_nonlocal(0.5), small_lattice()).estimated_constant, 0.0);
}

TEST(Lambda, MatchesClosedFormForGaussianDrift) {
    const double c = 0.8;
    const auto m = user_model([](double, double, double) { return 1.0; },
                              [c](double, double x, double) { return c * std::exp(-x * x); }, 1.0, {});
    const auto g = small_lattice();
    double oracle = 0.0;
    for (double x : g.x_samples) {
        for (double r : g.r_samples) oracle = std::max(oracle, std::abs(2 * x * std::exp(-x * x) * c * r));
    }
    const auto rep = estimate_lambda(m, g);
    EXPECT_TRUE(rep.passed);
    EXPECT_NEAR(rep.estimated_constant, oracle, 1e-8 * oracle);
}

TEST(Audit, ConstantFamilyPassesEverything) {
    for (const auto& r : audit_all(constant_model(1.0, 0.3), small_lattice())) {
        EXPECT_TRUE(r.passed) << to_string(r.id);
    }
}

TEST(Audit, PorousWithBurgersPassesEverything) {
    const auto m = make_model({Family::porous_regularized, 1.0, 0.5, true}, {Family::burgers_gauss, 0.5}, 0.5,
                              {Envelope::Kind::gauss, 3.0, std::sqrt(2.0)});
    const auto g = default_lattice(m, -6.0, 6.0, 1.0, 1.1);
    const auto reports = audit_all(m, g);
    ASSERT_EQ(reports.size(), 7u);
    for (const auto& r : reports) EXPECT_TRUE(r.passed) << to_string(r.id);
}

TEST(Audit, OrderIsStableAndPure) {
    const auto m = make_model({Family::decaying, 1.0}, {Family::constant, 0.0}, 0.1, {});
    const auto a = audit_all(m, small_lattice());
    const auto b = audit_all(m, small_lattice());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(static_cast<int>(a[i].id), static_cast<int>(i));
        EXPECT_EQ(a[i].passed, b[i].passed);
        EXPECT_EQ(a[i].estimated_constant, b[i].estimated_constant);
        if (!a[i].passed) {
            EXPECT_TRUE(a[i].witness.has_value());
        }
    }
    EXPECT_FALSE(a[0].passed);
}

TEST(DefaultLattice, CoversTwiceTheProvedRange) {
    const auto m = burgers(2.0, 4.0);
    const double u0_sup = 1.33;
    const auto g = default_lattice(m, -8.0, 8.0, 1.0, u0_sup);
    EXPECT_EQ(g.t_samples.size(), 5u);
    EXPECT_EQ(g.x_samples.size(), 65u);
    ASSERT_EQ(g.r_samples.size(), 65u);
    EXPECT_EQ(g.r_samples[32], 0.0);
    EXPECT_GE(g.r_samples.back(), 2 * u0_sup);
    EXPECT_NO_THROW(g.validate());
}

TEST(Envelope, NormsByQuadrature) {
    const auto n = envelope_norms({Envelope::Kind::gauss, 2.0, 1.0}, -8.0, 8.0);
    EXPECT_NEAR(n.sup, 2.0, 1e-5);
    EXPECT_NEAR(n.l2_squared, 4.0 * std::sqrt(M_PI / 2.0), 1e-8);
}
