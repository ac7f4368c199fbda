#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "nemfp/coefficients.hpp"
#include "nemfp/fpke.hpp"
#include "nemfp/grid.hpp"

namespace nemfp {

// Brownian path stored by its values W(t_k), k = 0..n_steps, with W(0) = 0.
// Refinement inserts bridge midpoints and never touches existing values, so
// coarse partial sums survive refinement bit for bit.
struct BrownianPath {
    double dt = 0.0;
    std::uint64_t seed = 0;
    unsigned level = 0;
    std::vector<double> points{0.0};

    std::size_t n_steps() const { return points.size() - 1; }
    double increment(std::size_t k) const { return points[k + 1] - points[k]; }
    std::vector<double> increments() const;
};

// Increments ~ N(0, dt) from the counter stream keyed by (seed, level 0).
BrownianPath sample_brownian(std::size_t n_steps, double dt, std::uint64_t seed);

// Halves dt: midpoint k ~ N((W_k + W_{k+1})/2, dt/4) from the stream keyed by
// (seed, level + 1).
BrownianPath refine_brownian(const BrownianPath& path);

// C^1 extension of sqrt restricted to [floor, inf): linear continuation below
// the floor with matching slope.
double extended_sqrt(double v, double floor);

// Coefficients of the linearized SDE with the density frozen in:
//   b_u(t, x) = b(t, x, u_hat(t, x)),  sqrt2a_u(t, x) = sqrt(2 a(t, x, u_hat(t, x)))
// u_hat is piecewise linear in x (zero outside the box) and left-endpoint
// piecewise constant in t over the solution snapshots. Immutable, shareable
// across threads.
class FrozenCoefficients {
public:
    FrozenCoefficients(CoefficientModel model, std::shared_ptr<const FpkeSolution> solution);

    double density(double t, double x) const { return solution_->at(t).evaluate(x); }
    double drift(double t, double x) const;
    double diffusion(double t, double x) const;
    double horizon() const { return solution_->horizon(); }
    double diffusion_floor() const;

    const CoefficientModel& model() const { return model_; }
    const FpkeSolution& solution() const { return *solution_; }

private:
    CoefficientModel model_;
    std::shared_ptr<const FpkeSolution> solution_;
};

// Throws ConfigError when the solution was produced by another model.
FrozenCoefficients freeze_coefficients(const CoefficientModel& m, std::shared_ptr<const FpkeSolution> sol);
FrozenCoefficients freeze_coefficients(const CoefficientModel& m, const FpkeSolution& sol);

enum class Integrator { euler, heun_drift };

std::string_view to_string(Integrator i);
Integrator parse_integrator(std::string_view name);

struct SdePath {
    std::vector<double> times;
    std::vector<double> states;
    std::uint64_t initial_seed = 0;
    std::uint64_t noise_seed = 0;
    Integrator integrator = Integrator::euler;
};

// Inverse CDF of the piecewise-constant density: locate the cell by
// cumulative cell masses, then place linearly inside it.
double inverse_cdf(const GridDensity& u0, double uniform01);
double sample_initial(const GridDensity& u0, std::uint64_t initial_seed);

// euler:      X+ = X + b_u(t, X) dt + s(t, X) dW
// heun_drift: drift averaged over (t, X) and the Euler predictor at t + dt;
//             diffusion kept at (t, X) with the same dW.
// The noise horizon must not exceed the frozen solution's horizon.
SdePath solve_sde(const FrozenCoefficients& frozen, const BrownianPath& noise, std::uint64_t initial_seed,
                  Integrator integrator);

// Same as solve_sde with an explicit initial state.
SdePath solve_sde_from(const FrozenCoefficients& frozen, const BrownianPath& noise, double x0, Integrator integrator);

struct GapRow {
    unsigned level = 0;
    double dt = 0.0;
    double sup_gap = 0.0;
};

struct GapTable {
    std::vector<GapRow> rows;
    // Least-squares slope of -log2(sup_gap) against level; NaN unless every
    // level has a positive gap.
    double slope = 0.0;
    bool exactly_zero = false;
};

// Euler versus heun_drift on the same bridge-refined noise, levels 0..levels-1.
GapTable pathwise_gap(const FrozenCoefficients& frozen, std::uint64_t initial_seed, const BrownianPath& noise,
                      int levels);

// Mean over n_paths of the per-path sup gap; path i uses seeds derived from
// (base_seed, i). Reduces the variance of the single-path proxy.
GapTable mean_pathwise_gap(const FrozenCoefficients& frozen, std::uint64_t base_seed, std::size_t n_paths,
                           double dt0, int levels, unsigned workers = 1);

struct EnsembleOptions {
    double dt = 1.0 / 128;
    Integrator integrator = Integrator::euler;
    unsigned workers = 1;
};

// Seeds for path i of an ensemble.
std::uint64_t path_initial_seed(std::uint64_t base_seed, std::uint64_t path);
std::uint64_t path_noise_seed(std::uint64_t base_seed, std::uint64_t path);

// States of n_paths independent solves at each requested time, shape
// [time][path]. Times must be multiples of opts.dt within the horizon.
std::vector<std::vector<double>> ensemble_states(const FrozenCoefficients& frozen, std::size_t n_paths,
                                                 const std::vector<double>& times, std::uint64_t base_seed,
                                                 const EnsembleOptions& opts);

// Histogram of positions on `grid` normalized to unit mass; positions
// outside the box are assigned to the nearest wall cell.
GridDensity histogram_density(const std::vector<double>& positions, const Grid1D& grid, double time_stamp);

std::vector<GridDensity> ensemble_marginals(const FrozenCoefficients& frozen, std::size_t n_paths,
                                            const std::vector<double>& times, std::uint64_t base_seed,
                                            const EnsembleOptions& opts);

GridDensity ensemble_marginal(const FrozenCoefficients& frozen, std::size_t n_paths, double t,
                              std::uint64_t base_seed, const EnsembleOptions& opts);

// Chain-rule check of the weak x-gradients of b_u and sqrt(a_u) at the cell
// centers of the snapshot in force at t: centered differences of the frozen
// fields versus (D_x b) + (d_r b) u' and ((d_x a) + (d_r a) u') / (2 sqrt(a)).
struct WeakGradientReport {
    double max_drift_gap = 0.0;
    double max_root_gap = 0.0;
    double dx = 0.0;
};

WeakGradientReport weak_gradient_check(const FrozenCoefficients& frozen, double t);

}  // namespace nemfp
