#include "nemfp/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nemfp/errors.hpp"
#include "nemfp/parallel.hpp"
#include "nemfp/rng.hpp"

namespace nemfp {

namespace {

constexpr std::uint64_t kInitialTag = 0x1;
constexpr std::uint64_t kNoiseTag = 0x2;

double fit_decay_slope(const std::vector<GapRow>& rows) {
    const double n = static_cast<double>(rows.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        const double x = r.level;
        const double y = -std::log2(r.sup_gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void finish_gap_table(GapTable& table) {
    const bool all_positive =
        std::all_of(table.rows.begin(), table.rows.end(), [](const GapRow& r) { return r.sup_gap > 0; });
    table.exactly_zero =
        std::all_of(table.rows.begin(), table.rows.end(), [](const GapRow& r) { return r.sup_gap == 0; });
    table.slope = all_positive && table.rows.size() >= 2 ? fit_decay_slope(table.rows)
                                                         : std::numeric_limits<double>::quiet_NaN();
}

double sup_gap(const SdePath& a, const SdePath& b) {
    double g = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) g = std::max(g, std::abs(a.states[k] - b.states[k]));
    return g;
}

}  // namespace

std::vector<double> BrownianPath::increments() const {
    std::vector<double> out(n_steps());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = increment(k);
    return out;
}

BrownianPath sample_brownian(std::size_t n_steps, double dt, std::uint64_t seed) {
    if (!(dt > 0) && n_steps > 0) throw ConfigError("sample_brownian: dt must be positive");
    BrownianPath p;
    p.dt = dt;
    p.seed = seed;
    p.level = 0;
    p.points.resize(n_steps + 1);
    p.points[0] = 0.0;
    const CounterStream stream(derive_seed(seed, 0));
    const double sd = std::sqrt(dt);
    for (std::size_t k = 0; k < n_steps; ++k) p.points[k + 1] = p.points[k] + sd * stream.normal(k);
    return p;
}

BrownianPath refine_brownian(const BrownianPath& path) {
    BrownianPath out;
    out.dt = path.dt / 2;
    out.seed = path.seed;
    out.level = path.level + 1;
    const std::size_t n = path.n_steps();
    out.points.resize(2 * n + 1);
    const CounterStream stream(derive_seed(path.seed, out.level));
    const double sd = std::sqrt(path.dt / 4);
    for (std::size_t k = 0; k < n; ++k) {
        out.points[2 * k] = path.points[k];
        out.points[2 * k + 1] = 0.5 * (path.points[k] + path.points[k + 1]) + sd * stream.normal(k);
    }
    out.points[2 * n] = path.points[n];
    return out;
}

double extended_sqrt(double v, double floor) {
    if (v >= floor) return std::sqrt(v);
    const double root = std::sqrt(floor);
    return root + (v - floor) / (2 * root);
}

FrozenCoefficients::FrozenCoefficients(CoefficientModel model, std::shared_ptr<const FpkeSolution> solution)
    : model_(std::move(model)), solution_(std::move(solution)) {
    if (!solution_ || solution_->snapshots.empty()) throw ConfigError("freeze: empty FPKE solution");
}

double FrozenCoefficients::drift(double t, double x) const { return model_.eval_b(t, x, density(t, x)); }

double FrozenCoefficients::diffusion(double t, double x) const {
    return std::sqrt(2.0) * extended_sqrt(model_.eval_a(t, x, density(t, x)), model_.gamma0);
}

double FrozenCoefficients::diffusion_floor() const { return std::sqrt(2 * model_.gamma0); }

FrozenCoefficients freeze_coefficients(const CoefficientModel& m, std::shared_ptr<const FpkeSolution> sol) {
    if (!sol) throw ConfigError("freeze: missing FPKE solution");
    if (sol->model_id != m.id) {
        throw ConfigError("freeze: solution was produced by model '" + sol->model_id + "', not '" + m.id + "'");
    }
    return FrozenCoefficients(m, std::move(sol));
}

FrozenCoefficients freeze_coefficients(const CoefficientModel& m, const FpkeSolution& sol) {
    return freeze_coefficients(m, std::make_shared<const FpkeSolution>(sol));
}

std::string_view to_string(Integrator i) { return i == Integrator::euler ? "euler" : "heun-drift"; }

Integrator parse_integrator(std::string_view name) {
    if (name == "euler") return Integrator::euler;
    if (name == "heun-drift") return Integrator::heun_drift;
    throw ConfigError("unknown integrator '" + std::string(name) + "'");
}

double inverse_cdf(const GridDensity& u0, double uniform01) {
    const Grid1D& g = u0.grid;
    const double dx = g.dx();
    const double total = u0.mass();
    if (!(total > 0)) throw PreconditionError("sample_initial: density has no mass");
    const double target = uniform01 * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double cell = std::max(u0.values[i], 0.0) * dx;
        if (cell > 0 && cum + cell >= target) {
            const double frac = std::clamp((target - cum) / cell, 0.0, 1.0);
            return g.face(i) + frac * dx;
        }
        cum += cell;
    }
    // Rounding left target above the accumulated mass: place in the last
    // cell carrying mass.
    for (std::size_t i = g.n_cells; i-- > 0;) {
        if (u0.values[i] > 0) return g.face(i + 1);
    }
    return g.x_max;
}

double sample_initial(const GridDensity& u0, std::uint64_t initial_seed) {
    return inverse_cdf(u0, CounterStream(derive_seed(initial_seed, 0)).uniform(0));
}

SdePath solve_sde_from(const FrozenCoefficients& frozen, const BrownianPath& noise, double x0,
                       Integrator integrator) {
    const double horizon = noise.dt * static_cast<double>(noise.n_steps());
    if (horizon > frozen.horizon() * (1 + 1e-9) + 1e-12) {
        throw PreconditionError("solve_sde: noise horizon exceeds the frozen solution's horizon");
    }
    SdePath path;
    path.integrator = integrator;
    path.noise_seed = noise.seed;
    const std::size_t n = noise.n_steps();
    path.times.resize(n + 1);
    path.states.resize(n + 1);
    double x = x0;
    path.times[0] = 0.0;
    path.states[0] = x;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * noise.dt;
        const double dw = noise.increment(k);
        const double b0 = frozen.drift(t, x);
        const double noise_term = frozen.diffusion(t, x) * dw;
        if (integrator == Integrator::euler) {
            x = x + b0 * noise.dt + noise_term;
        } else {
            const double predictor = x + b0 * noise.dt + noise_term;
            const double b1 = frozen.drift(t + noise.dt, predictor);
            x = x + 0.5 * (b0 + b1) * noise.dt + noise_term;
        }
        if (!std::isfinite(x)) throw IntegrationFailure("non-finite SDE state", k + 1);
        path.times[k + 1] = static_cast<double>(k + 1) * noise.dt;
        path.states[k + 1] = x;
    }
    return path;
}

SdePath solve_sde(const FrozenCoefficients& frozen, const BrownianPath& noise, std::uint64_t initial_seed,
                  Integrator integrator) {
    const GridDensity& u0 = frozen.solution().snapshots.front();
    SdePath path = solve_sde_from(frozen, noise, sample_initial(u0, initial_seed), integrator);
    path.initial_seed = initial_seed;
    return path;
}

GapTable pathwise_gap(const FrozenCoefficients& frozen, std::uint64_t initial_seed, const BrownianPath& noise,
                      int levels) {
    if (levels < 2) throw ConfigError("pathwise_gap: levels must be at least 2");
    GapTable table;
    const double x0 = sample_initial(frozen.solution().snapshots.front(), initial_seed);
    BrownianPath w = noise;
    for (int l = 0; l < levels; ++l) {
        if (l > 0) w = refine_brownian(w);
        const SdePath e = solve_sde_from(frozen, w, x0, Integrator::euler);
        const SdePath h = solve_sde_from(frozen, w, x0, Integrator::heun_drift);
        table.rows.push_back({static_cast<unsigned>(l), w.dt, sup_gap(e, h)});
    }
    finish_gap_table(table);
    return table;
}

std::uint64_t path_initial_seed(std::uint64_t base_seed, std::uint64_t path) {
    return derive_seed(base_seed, path, kInitialTag);
}

std::uint64_t path_noise_seed(std::uint64_t base_seed, std::uint64_t path) {
    return derive_seed(base_seed, path, kNoiseTag);
}

namespace {

std::size_t steps_for(double horizon, double dt) {
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    if (std::abs(static_cast<double>(n) * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw ConfigError("time is not an integer multiple of the SDE step");
    }
    return n;
}

}  // namespace

GapTable mean_pathwise_gap(const FrozenCoefficients& frozen, std::uint64_t base_seed, std::size_t n_paths,
                           double dt0, int levels, unsigned workers) {
    if (levels < 2) throw ConfigError("mean_pathwise_gap: levels must be at least 2");
    if (n_paths == 0) throw ConfigError("mean_pathwise_gap: n_paths must be positive");
    const std::size_t n = steps_for(frozen.horizon(), dt0);
    const auto L = static_cast<std::size_t>(levels);
    std::vector<double> gaps(n_paths * L);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        const BrownianPath w = sample_brownian(n, dt0, path_noise_seed(base_seed, i));
        const GapTable t = pathwise_gap(frozen, path_initial_seed(base_seed, i), w, levels);
        for (std::size_t l = 0; l < L; ++l) gaps[i * L + l] = t.rows[l].sup_gap;
    });
    GapTable table;
    for (std::size_t l = 0; l < L; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_paths; ++i) s += gaps[i * L + l];
        table.rows.push_back({static_cast<unsigned>(l), dt0 / std::ldexp(1.0, static_cast<int>(l)),
                              s / static_cast<double>(n_paths)});
    }
    finish_gap_table(table);
    return table;
}

std::vector<std::vector<double>> ensemble_states(const FrozenCoefficients& frozen, std::size_t n_paths,
                                                 const std::vector<double>& times, std::uint64_t base_seed,
                                                 const EnsembleOptions& opts) {
    if (!(opts.dt > 0)) throw ConfigError("ensemble: dt must be positive");
    std::vector<std::size_t> indices;
    std::size_t n_steps = 0;
    for (double t : times) {
        if (t < 0 || t > frozen.horizon() * (1 + 1e-9)) throw ConfigError("ensemble: time outside the horizon");
        indices.push_back(steps_for(t, opts.dt));
        n_steps = std::max(n_steps, indices.back());
    }
    std::vector<std::vector<double>> out(times.size(), std::vector<double>(n_paths));
    parallel_for(n_paths, opts.workers, [&](std::size_t i) {
        const BrownianPath w = sample_brownian(n_steps, opts.dt, path_noise_seed(base_seed, i));
        const SdePath p = solve_sde(frozen, w, path_initial_seed(base_seed, i), opts.integrator);
        for (std::size_t j = 0; j < indices.size(); ++j) out[j][i] = p.states[indices[j]];
    });
    return out;
}

GridDensity histogram_density(const std::vector<double>& positions, const Grid1D& grid, double time_stamp) {
    if (positions.empty()) throw PreconditionError("histogram of an empty sample");
    std::vector<double> counts(grid.n_cells, 0.0);
    for (double x : positions) counts[grid.locate(x)] += 1.0;
    const double scale = 1.0 / (static_cast<double>(positions.size()) * grid.dx());
    for (double& c : counts) c *= scale;
    return GridDensity(grid, std::move(counts), time_stamp);
}

std::vector<GridDensity> ensemble_marginals(const FrozenCoefficients& frozen, std::size_t n_paths,
                                            const std::vector<double>& times, std::uint64_t base_seed,
                                            const EnsembleOptions& opts) {
    const auto states = ensemble_states(frozen, n_paths, times, base_seed, opts);
    std::vector<GridDensity> out;
    for (std::size_t j = 0; j < times.size(); ++j) {
        out.push_back(histogram_density(states[j], frozen.solution().grid, times[j]));
    }
    return out;
}

GridDensity ensemble_marginal(const FrozenCoefficients& frozen, std::size_t n_paths, double t,
                              std::uint64_t base_seed, const EnsembleOptions& opts) {
    return ensemble_marginals(frozen, n_paths, {t}, base_seed, opts).front();
}

WeakGradientReport weak_gradient_check(const FrozenCoefficients& frozen, double t) {
    const GridDensity& u = frozen.solution().at(t);
    const Grid1D& g = u.grid;
    const CoefficientModel& m = frozen.model();
    const double dx = g.dx();
    const double tt = u.time_stamp;
    WeakGradientReport rep;
    rep.dx = dx;
    auto root_a = [&](double x) { return extended_sqrt(m.eval_a(tt, x, u.evaluate(x)), m.gamma0); };
    for (std::size_t i = 1; i + 1 < g.n_cells; ++i) {
        const double x = g.center(i);
        const double r = u.values[i];
        const double du = (u.values[i + 1] - u.values[i - 1]) / (2 * dx);
        const double xl = g.center(i - 1);
        const double xr = g.center(i + 1);

        const double fd_b = (frozen.drift(tt, xr) - frozen.drift(tt, xl)) / (2 * dx);
        const double chain_b = m.eval_db_dx(tt, x, r) + m.eval_db_dr(tt, x, r) * du;
        rep.max_drift_gap = std::max(rep.max_drift_gap, std::abs(fd_b - chain_b));

        const double fd_root = (root_a(xr) - root_a(xl)) / (2 * dx);
        const double chain_root =
            (m.eval_da_dx(tt, x, r) + m.eval_da_dr(tt, x, r) * du) / (2 * std::sqrt(m.eval_a(tt, x, r)));
        rep.max_root_gap = std::max(rep.max_root_gap, std::abs(fd_root - chain_root));
    }
    return rep;
}

}  // namespace nemfp
