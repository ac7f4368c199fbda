#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nemfp/coefficients.hpp"
#include "nemfp/grid.hpp"
#include "nemfp/stats.hpp"

namespace nemfp {

enum class TimeStepping { explicit_euler, semi_implicit };

struct SchemeOptions {
    TimeStepping stepping = TimeStepping::explicit_euler;
    // Keep every `snapshot_stride`-th step; 0 keeps only the initial and
    // final states. The final state is always kept.
    std::size_t snapshot_stride = 1;
    double cfl_safety = 0.4;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    // Initial data must be a probability density (mass 1 within 1e-8).
    bool require_probability = true;
};

inline constexpr double kPositivityFloor = -1e-12;
inline constexpr double kBoundaryMassFlag = 1e-6;

struct FpkeSolution {
    Grid1D grid;
    double dt = 0.0;
    std::vector<GridDensity> snapshots;
    std::string model_id;
    // Largest dx*(u_0 + u_{n-1}) seen over the run (truncation monitor).
    double max_boundary_mass = 0.0;

    double horizon() const { return snapshots.empty() ? 0.0 : snapshots.back().time_stamp; }
    bool boundary_flagged() const { return max_boundary_mass > kBoundaryMassFlag; }
    // Snapshot in force at time t (left endpoint).
    const GridDensity& at(double t) const;
};

// Largest dt admitted by the stability rule for the given state:
//   explicit:       cfl * min(dx^2 / (2 D), dx / V)
//   semi-implicit:  cfl * dx / V
// where D = max over cells of max(a, d beta/dr) and V = max of |b| at faces
// and |d b*/dr| at cells. Returns +inf when unconstrained.
double stable_dt(const CoefficientModel& m, const GridDensity& u, double t, const SchemeOptions& opts = {});

// Largest dt <= dt_max that divides `interval` into an integer number of steps.
double aligned_dt(double dt_max, double interval);

// Conservative finite-volume solve on [0, T] with zero-flux walls. The flux at
// an interior face is upwinded b* minus the centered gradient of beta:
//   F = b+(x_f, u_L) u_L + b-(x_f, u_R) u_R - (beta_R - beta_L)/dx.
// T must be an integer multiple of dt; T == 0 or dt == 0 returns u0 alone.
FpkeSolution solve_fpke(const CoefficientModel& m, const GridDensity& u0, double horizon, double dt,
                        const SchemeOptions& opts = {});

// Smooth compactly supported test function with first and second derivatives.
struct TestFunction {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    double support_lo = 0.0;
    double support_hi = 0.0;
};

// exp(-1/(1-s^2)) with s = (x - center)/radius.
TestFunction smooth_bump(double center, double radius);

// |int phi u(t) - int phi u0 - int_0^t int (b phi' + a phi'') u dx ds|, midpoint
// in x and trapezoid over the snapshot times in s.
double weak_residual(const FpkeSolution& sol, const CoefficientModel& m, const TestFunction& phi, double t);

struct ContractionResult {
    MatchReport report;        // value = max_t excess (>= 0 since t = 0 is included)
    std::vector<double> times;
    std::vector<double> distances;  // ||u(t) - u_bar(t)||_1
};

ContractionResult l1_contraction_check(const CoefficientModel& m, const GridDensity& u0, const GridDensity& u0_bar,
                                       double horizon, double dt, double tol, const SchemeOptions& opts = {});

// Default L-infinity tolerance 1e-6 + 2 dx.
double default_linf_tolerance(const Grid1D& g);

MatchReport linf_bound_check(const FpkeSolution& sol, double lambda_hat, double tol = -1.0);

using ProfileFactory = std::function<GridDensity(const Grid1D&)>;

struct RefinementRow {
    std::size_t level = 0;
    std::size_t n_cells = 0;
    double dt = 0.0;
    double self_distance = 0.0;  // L1 to the next level on this level's grid
};

struct ConvergenceTable {
    std::vector<RefinementRow> rows;  // one per consecutive pair
    double fitted_order = 0.0;        // NaN when fewer than two positive distances
};

// Solves at n_cells * 2^l and dt / 2^l for l < levels and compares final
// states level-to-level. levels < 2 is a configuration error.
ConvergenceTable refine_study(const CoefficientModel& m, const ProfileFactory& u0, const Grid1D& base, double horizon,
                              double dt0, int levels, const SchemeOptions& opts = {});

// max(1e-3, 5 * self-distance between the half-resolution and full-resolution
// solutions at the final time).
double contraction_tolerance(const CoefficientModel& m, const ProfileFactory& u0, const Grid1D& grid,
                             double horizon, double dt, const SchemeOptions& opts = {});

// Discrete H^1 norm of beta(0, ., u) on the grid.
double discrete_h1_norm_beta(const CoefficientModel& m, const GridDensity& u);

struct InitialRegularityReport {
    double coarse_norm = 0.0;
    double fine_norm = 0.0;
    double growth = 0.0;
    bool flagged = false;  // growth > 1.2 suggests beta(0, ., u0) is not in H^1
};

InitialRegularityReport initial_regularity(const CoefficientModel& m, const GridDensity& coarse,
                                           const GridDensity& fine);

}  // namespace nemfp
