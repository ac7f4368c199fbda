#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "nemfp/errors.hpp"
#include "nemfp/fpke.hpp"

using namespace nemfp;

namespace {

GridDensity gaussian_cells(const Grid1D& g, double mean, double sd) {
    std::vector<double> v(g.n_cells);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double a = (g.face(i) - mean) / (sd * std::sqrt(2.0));
        const double b = (g.face(i + 1) - mean) / (sd * std::sqrt(2.0));
        v[i] = 0.5 * (std::erf(b) - std::erf(a)) / g.dx();
    }
    return GridDensity(g, v);
}

ProfileSpec gaussian(double mean, double sd) {
    ProfileSpec s;
    s.kind = ProfileSpec::Kind::gaussian;
    s.mean = mean;
    s.sd = sd;
    return s;
}

ProfileSpec bump(double center, double width) {
    ProfileSpec s;
    s.kind = ProfileSpec::Kind::bump;
    s.center = center;
    s.width = width;
    return s;
}

double explicit_dt(const CoefficientModel& m, const GridDensity& u, double T, double fraction = 0.8) {
    return aligned_dt(fraction * stable_dt(m, u, 0.0), T);
}

CoefficientModel porous(bool localized, double kappa = 0.5) {
    return make_model({Family::porous_regularized, 1.0, kappa, localized}, {Family::burgers_gauss, 0.5}, 0.5,
                      {Envelope::Kind::gauss, 3.0, std::sqrt(2.0)});
}

}  // namespace

TEST(Solve, ZeroHorizonOrZeroStepReturnsInitialState) {
    const Grid1D g(-4.0, 4.0, 64);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const auto m = constant_model(1.0, 0.0);
    for (auto [T, dt] : {std::pair{0.0, 0.01}, std::pair{0.5, 0.0}}) {
        const auto sol = solve_fpke(m, u0, T, dt);
        ASSERT_EQ(sol.snapshots.size(), 1u);
        EXPECT_EQ(sol.snapshots[0].values, u0.values);
        EXPECT_EQ(sol.snapshots[0].time_stamp, 0.0);
    }
}

TEST(Solve, RejectsMisalignedHorizonAndBadInitialData) {
    const Grid1D g(-4.0, 4.0, 64);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const auto m = constant_model(1.0, 0.0);
    EXPECT_THROW(solve_fpke(m, u0, 0.1, 0.003), ConfigError);
    GridDensity half = u0;
    for (double& v : half.values) v *= 0.5;
    EXPECT_THROW(solve_fpke(m, half, 0.1, 1e-3), PreconditionError);
    GridDensity negative = u0;
    negative.values[10] = -1.0;
    EXPECT_THROW(solve_fpke(m, negative, 0.1, 1e-3), PreconditionError);
}

TEST(Solve, StepAboveStabilityRuleFailsNamingTheRule) {
    const Grid1D g(-4.0, 4.0, 128);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const auto m = constant_model(1.0, 0.0);
    try {
        solve_fpke(m, u0, 0.1, 0.01);
        FAIL() << "expected SchemeFailure";
    } catch (const SchemeFailure& e) {
        EXPECT_NE(std::string(e.what()).find("stability rule"), std::string::npos);
        EXPECT_EQ(e.step(), 0u);
    }
}

TEST(StableDt, MatchesTheRuleForConstantCoefficients) {
    const Grid1D g(-4.0, 4.0, 80);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const double dx = g.dx();
    EXPECT_DOUBLE_EQ(stable_dt(constant_model(2.0, 3.0), u0, 0.0), 0.4 * std::min(dx * dx / 4.0, dx / 3.0));
    SchemeOptions semi;
    semi.stepping = TimeStepping::semi_implicit;
    EXPECT_DOUBLE_EQ(stable_dt(constant_model(2.0, 3.0), u0, 0.0, semi), 0.4 * dx / 3.0);
    EXPECT_TRUE(std::isinf(stable_dt(constant_model(2.0, 0.0), u0, 0.0, semi)));
}

TEST(AlignedDt, DividesTheInterval) {
    EXPECT_DOUBLE_EQ(aligned_dt(0.3, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(aligned_dt(1.0, 0.5), 0.5);
    const double dt = aligned_dt(1.7e-4, 0.5);
    EXPECT_LE(dt, 1.7e-4);
    EXPECT_NEAR(0.5 / dt, std::round(0.5 / dt), 1e-9);
}

TEST(Solve, HeatMatchesAnalyticKernelAndConvergesAtSecondOrder) {
    const auto m = constant_model(1.0, 0.0);
    const double T = 0.25;
    double errors[2];
    for (int l = 0; l < 2; ++l) {
        const Grid1D g(-8.0, 8.0, 128u << l);
        const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
        const double dt = aligned_dt(0.4 * g.dx() * g.dx() / 2.0 * 0.5, T);
        SchemeOptions o;
        o.snapshot_stride = 0;
        const auto sol = solve_fpke(m, u0, T, dt, o);
        errors[l] = l1_distance(sol.snapshots.back(), gaussian_cells(g, 0.0, std::sqrt(0.25 + 2 * T)));
    }
    EXPECT_LE(errors[1], 2e-3);
    EXPECT_GE(errors[0] / errors[1], 1.8);
}

TEST(Solve, AdvectionDiffusionTranslatesTheKernel) {
    const auto m = constant_model(1.0, 1.0);
    const double T = 0.5;
    double errors[2];
    for (int l = 0; l < 2; ++l) {
        const Grid1D g(-8.0, 8.0, 256u << l);
        const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
        SchemeOptions o;
        o.snapshot_stride = 0;
        const auto sol = solve_fpke(m, u0, T, explicit_dt(m, u0, T), o);
        errors[l] = l1_distance(sol.snapshots.back(), gaussian_cells(g, 1.0 * T, std::sqrt(0.25 + 2 * T)));
    }
    EXPECT_LE(errors[1], 2e-2);
    EXPECT_LT(errors[1], errors[0]);
}

TEST(Solve, ConservesMassKeepsPositivityAndL1Norm) {
    const auto m = porous(true);
    const Grid1D g(-6.0, 6.0, 192);
    const auto u0 = reference_profile(bump(-0.5, 1.0), g);
    for (auto stepping : {TimeStepping::explicit_euler, TimeStepping::semi_implicit}) {
        SchemeOptions o;
        o.stepping = stepping;
        o.snapshot_stride = 5;
        const double dt = stepping == TimeStepping::explicit_euler ? explicit_dt(m, u0, 0.5) : 1.0 / 256;
        const auto sol = solve_fpke(m, u0, 0.5, dt, o);
        EXPECT_NEAR(sol.horizon(), 0.5, 1e-12);
        for (const auto& s : sol.snapshots) {
            EXPECT_LE(std::abs(s.mass() - 1.0), 1e-10);
            EXPECT_GE(s.min(), 0.0);
            double l1 = 0.0;
            for (double v : s.values) l1 += std::abs(v) * g.dx();
            EXPECT_LE(l1, 1.0 + 1e-10);
        }
    }
}

TEST(Solve, SnapshotsAreEquallySpacedAndEndAtTheHorizon) {
    const auto m = constant_model(1.0, 0.2);
    const Grid1D g(-6.0, 6.0, 64);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    SchemeOptions o;
    o.snapshot_stride = 7;
    const double dt = 1.0 / 512;
    const auto sol = solve_fpke(m, u0, 0.25, dt, o);
    EXPECT_EQ(sol.snapshots.front().time_stamp, 0.0);
    EXPECT_NEAR(sol.snapshots.back().time_stamp, 0.25, 1e-15);
    for (std::size_t k = 1; k + 1 < sol.snapshots.size(); ++k) {
        EXPECT_NEAR(sol.snapshots[k].time_stamp - sol.snapshots[k - 1].time_stamp, 7 * dt, 1e-12);
    }
    const double t_left = sol.at(0.1).time_stamp;
    EXPECT_LE(t_left, 0.1);
    EXPECT_GT(t_left, 0.1 - 7 * dt);
}

TEST(Solve, SemiImplicitAgreesWithExplicitAtSmallSteps) {
    const auto m = porous(true);
    const Grid1D g(-6.0, 6.0, 128);
    const auto u0 = reference_profile(bump(0.0, 1.0), g);
    SchemeOptions ex;
    ex.snapshot_stride = 0;
    SchemeOptions si = ex;
    si.stepping = TimeStepping::semi_implicit;
    const double dt = explicit_dt(m, u0, 0.25);
    double gap[2];
    for (int l = 0; l < 2; ++l) {
        const double h = dt / (1 << l);
        gap[l] = l1_distance(solve_fpke(m, u0, 0.25, h, ex).snapshots.back(),
                             solve_fpke(m, u0, 0.25, h, si).snapshots.back());
    }
    EXPECT_LT(gap[1], 1e-3);
    EXPECT_LT(gap[1], 0.6 * gap[0]);
}

TEST(Solve, NarrowContinuityOfMoments) {
    const auto m = porous(true);
    const Grid1D g(-6.0, 6.0, 128);
    const auto u0 = reference_profile(bump(0.0, 1.0), g);
    SchemeOptions o;
    o.stepping = TimeStepping::semi_implicit;
    const double dt = 1.0 / 256;
    const auto sol = solve_fpke(m, u0, 0.5, dt, o);
    auto moment = [&](const GridDensity& u) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) s += std::atan(g.center(i)) * u.values[i] * g.dx();
        return s;
    };
    double worst = 0.0;
    for (std::size_t k = 1; k < sol.snapshots.size(); ++k) {
        worst = std::max(worst, std::abs(moment(sol.snapshots[k]) - moment(sol.snapshots[k - 1])) / dt);
    }
    EXPECT_LT(worst, 5.0);
}

TEST(WeakResidual, VanishesAtTimeZero) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D g(-6.0, 6.0, 128);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const auto sol = solve_fpke(m, u0, 0.1, explicit_dt(m, u0, 0.1));
    EXPECT_EQ(weak_residual(sol, m, smooth_bump(0.3, 1.5), 0.0), 0.0);
}

TEST(WeakResidual, HeatResidualShrinksWithResolution) {
    const auto m = constant_model(1.0, 0.0);
    double res[2];
    for (int l = 0; l < 2; ++l) {
        const Grid1D g(-8.0, 8.0, 128u << l);
        const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
        const auto sol = solve_fpke(m, u0, 0.5, explicit_dt(m, u0, 0.5));
        res[l] = weak_residual(sol, m, smooth_bump(0.0, 2.0), 0.5);
    }
    EXPECT_LT(res[1], 1e-3);
    EXPECT_LT(res[1], res[0]);
}

TEST(WeakResidual, RejectsBoundarySupportAndOffSnapshotTimes) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D g(-4.0, 4.0, 64);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const double T = 0.1;
    const double dt = explicit_dt(m, u0, T);
    const auto sol = solve_fpke(m, u0, T, dt);
    EXPECT_THROW(weak_residual(sol, m, smooth_bump(3.5, 1.0), T), PreconditionError);
    EXPECT_THROW(weak_residual(sol, m, smooth_bump(0.0, 1.0), 0.5 * dt), PreconditionError);
}

TEST(SmoothBump, DerivativesMatchDifferences) {
    const auto phi = smooth_bump(0.2, 0.9);
    const double h = 1e-5;
    for (double x : {-0.3, 0.1, 0.55}) {
        EXPECT_NEAR(phi.d1(x), (phi.value(x + h) - phi.value(x - h)) / (2 * h), 1e-6);
        EXPECT_NEAR(phi.d2(x), (phi.d1(x + h) - phi.d1(x - h)) / (2 * h), 1e-5);
    }
    EXPECT_EQ(phi.value(1.2), 0.0);
    EXPECT_DOUBLE_EQ(phi.support_lo, -0.7);
}

TEST(Contraction, IdenticalInitialDataHaveZeroExcess) {
    const auto m = porous(true);
    const Grid1D g(-6.0, 6.0, 96);
    const auto u0 = reference_profile(bump(0.0, 1.0), g);
    SchemeOptions o;
    o.stepping = TimeStepping::semi_implicit;
    const auto r = l1_contraction_check(m, u0, u0, 0.25, 1.0 / 128, 1e-3, o);
    EXPECT_EQ(r.report.value, 0.0);
    EXPECT_TRUE(r.report.passed);
}

TEST(Contraction, HeatFlowKeepsTheDistanceOfShiftedGaussians) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D g(-8.0, 8.0, 256);
    const auto u0 = reference_profile(gaussian(-0.5, 0.5), g);
    const auto v0 = reference_profile(gaussian(0.5, 0.5), g);
    const auto r = l1_contraction_check(m, u0, v0, 0.5, explicit_dt(m, u0, 0.5), 1e-3);
    EXPECT_TRUE(r.report.passed);
    EXPECT_LE(r.report.value, 1e-12);
    for (std::size_t k = 1; k < r.distances.size(); ++k) EXPECT_LE(r.distances[k], r.distances[k - 1] + 1e-12);
}

TEST(Contraction, PorousBumpsContract) {
    const auto m = porous(true);
    const Grid1D g(-6.0, 6.0, 256);
    SchemeOptions o;
    o.stepping = TimeStepping::semi_implicit;
    const double dt = 1.0 / 256;
    const auto r = l1_contraction_check(m, reference_profile(bump(-0.5, 1.0), g), reference_profile(bump(0.5, 1.0), g),
                                        1.0, dt, 1e-3, o);
    EXPECT_TRUE(r.report.passed);
    EXPECT_LT(r.distances.back(), r.distances.front());
}

TEST(ContractionTolerance, HasTheFloor) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D g(-8.0, 8.0, 128);
    ProfileFactory f = [](const Grid1D& gg) { return reference_profile(gaussian(0.0, 0.5), gg); };
    EXPECT_GE(contraction_tolerance(m, f, g, 0.1, aligned_dt(0.4 * g.dx() * g.dx() / 2 * 0.5, 0.1)), 1e-3);
    EXPECT_THROW(contraction_tolerance(m, f, Grid1D(-8.0, 8.0, 129), 0.1, 1e-3), ConfigError);
}

TEST(LinfBound, HeatFlowNeedsNoGrowth) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D g(-6.0, 6.0, 128);
    const auto u0 = reference_profile(gaussian(0.0, 0.5), g);
    const auto sol = solve_fpke(m, u0, 0.5, explicit_dt(m, u0, 0.5));
    const auto r = linf_bound_check(sol, 0.0);
    EXPECT_TRUE(r.passed);
    EXPECT_DOUBLE_EQ(r.value, u0.sup());
    EXPECT_DOUBLE_EQ(r.threshold, u0.sup() + default_linf_tolerance(g));
}

TEST(LinfBound, SpaceIndependentNonlinearFamilyStaysBelowInitialSup) {
    const auto m = porous(false);
    const Grid1D g(-6.0, 6.0, 128);
    const auto u0 = reference_profile(bump(0.0, 0.8), g);
    SchemeOptions o;
    o.stepping = TimeStepping::semi_implicit;
    const auto lattice = default_lattice(m, g.x_min, g.x_max, 0.5, u0.sup());
    const double lambda = estimate_lambda(m, lattice).estimated_constant;
    const auto sol = solve_fpke(m, u0, 0.5, 1.0 / 256, o);
    EXPECT_TRUE(linf_bound_check(sol, lambda).passed);
}

TEST(RefineStudy, HeatIsSecondOrder) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D base(-8.0, 8.0, 64);
    ProfileFactory f = [](const Grid1D& g) { return reference_profile(gaussian(0.0, 0.5), g); };
    const double dt0 = aligned_dt(0.4 * base.dx() * base.dx() / 32, 0.25);
    const auto t = refine_study(m, f, base, 0.25, dt0, 3);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_GE(t.fitted_order, 1.8);
    EXPECT_EQ(t.rows[1].n_cells, 128u);
}

TEST(RefineStudy, UpwindAdvectionIsFirstOrder) {
    const auto m = constant_model(0.01, 1.0, 0.01);
    const Grid1D base(-4.0, 4.0, 128);
    ProfileFactory f = [](const Grid1D& g) { return reference_profile(gaussian(-1.0, 0.4), g); };
    const double dt0 = aligned_dt(0.6 * 0.4 * base.dx(), 0.5);
    const auto t = refine_study(m, f, base, 0.5, dt0, 3);
    EXPECT_GE(t.fitted_order, 0.8);
}

TEST(RefineStudy, StationaryStateHasZeroSelfDistance) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D base(-1.0, 1.0, 16);
    ProfileFactory f = [](const Grid1D& g) {
        ProfileSpec s;
        s.kind = ProfileSpec::Kind::uniform;
        s.lo = -1.0;
        s.hi = 1.0;
        return reference_profile(s, g);
    };
    const auto t = refine_study(m, f, base, 0.01, 1e-3, 2);
    EXPECT_NEAR(t.rows[0].self_distance, 0.0, 1e-13);
    EXPECT_THROW(refine_study(m, f, base, 0.01, 1e-3, 1), ConfigError);
}

TEST(InitialRegularity, FlagsDiscontinuousData) {
    const auto m = constant_model(1.0, 0.0);
    const Grid1D coarse(-4.0, 4.0, 256), fine(-4.0, 4.0, 512);
    EXPECT_FALSE(initial_regularity(m, reference_profile(gaussian(0.0, 0.5), coarse),
                                    reference_profile(gaussian(0.0, 0.5), fine))
                     .flagged);
    ProfileSpec s;
    s.kind = ProfileSpec::Kind::uniform;
    s.lo = -1.01;
    s.hi = 1.01;
    const auto rep = initial_regularity(m, reference_profile(s, coarse), reference_profile(s, fine));
    EXPECT_TRUE(rep.flagged);
    EXPECT_GT(rep.growth, 1.2);
}
