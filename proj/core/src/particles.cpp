#include "nemfp/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nemfp/errors.hpp"
#include "nemfp/parallel.hpp"
#include "nemfp/rng.hpp"
#include "nemfp/sde.hpp"

namespace nemfp {

namespace {

constexpr std::uint64_t kParticleInitTag = 0x11;
constexpr std::uint64_t kParticleNoiseTag = 0x12;

}  // namespace

std::string_view to_string(EstimatorKind k) { return k == EstimatorKind::histogram ? "histogram" : "gaussian-kernel"; }

EstimatorKind parse_estimator(std::string_view name) {
    if (name == "histogram") return EstimatorKind::histogram;
    if (name == "gaussian-kernel") return EstimatorKind::gaussian_kernel;
    throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

BandwidthRule parse_bandwidth_rule(std::string_view name) {
    if (name == "fixed") return BandwidthRule::fixed;
    if (name == "scott") return BandwidthRule::scott;
    throw ConfigError("unknown bandwidth rule '" + std::string(name) + "'");
}

double scott_bandwidth(const std::vector<double>& positions) {
    const auto n = static_cast<double>(positions.size());
    const double mean = std::accumulate(positions.begin(), positions.end(), 0.0) / n;
    double var = 0.0;
    for (double x : positions) var += (x - mean) * (x - mean);
    var /= std::max(n - 1, 1.0);
    return std::sqrt(var) * std::pow(n, -0.2);
}

GridDensity estimate_density(const ParticleEnsemble& ens, const EstimatorConfig& cfg) {
    if (ens.positions.empty()) throw PreconditionError("estimate_density: empty ensemble");
    if (cfg.kind == EstimatorKind::histogram) return histogram_density(ens.positions, cfg.grid, ens.time_stamp);

    double h = cfg.bandwidth;
    if (cfg.bandwidth_rule == BandwidthRule::scott) h = scott_bandwidth(ens.positions);
    if (!(h > 0)) {
        if (cfg.bandwidth_rule == BandwidthRule::fixed) throw ConfigError("kernel bandwidth must be positive");
        h = cfg.grid.dx();  // degenerate sample (all positions equal)
    }
    std::vector<double> sorted = ens.positions;
    std::sort(sorted.begin(), sorted.end());
    const Grid1D& g = cfg.grid;
    std::vector<double> v(g.n_cells, 0.0);
    const double cutoff = 8 * h;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.center(i);
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - cutoff);
        auto hi = std::upper_bound(lo, sorted.end(), x + cutoff);
        double s = 0.0;
        for (auto it = lo; it != hi; ++it) {
            const double z = (x - *it) / h;
            s += std::exp(-0.5 * z * z);
        }
        v[i] = s;
    }
    double mass = std::accumulate(v.begin(), v.end(), 0.0) * g.dx();
    if (!(mass > 0)) {
        // Every particle sits farther than the cutoff from the box.
        std::fill(v.begin(), v.end(), 0.0);
        v[g.locate(sorted[sorted.size() / 2])] = 1.0;
        mass = g.dx();
    }
    for (double& x : v) x /= mass;
    return GridDensity(g, std::move(v), ens.time_stamp);
}

ParticleEnsemble step_mv(const ParticleEnsemble& ens, const CoefficientModel& m, double dt,
                         const EstimatorConfig& cfg, std::size_t step_index, unsigned workers) {
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("step_mv: dt must be positive and finite");
    const GridDensity u = estimate_density(ens, cfg);
    const double t = ens.time_stamp;
    const double sd = std::sqrt(dt);
    ParticleEnsemble next;
    next.base_seed = ens.base_seed;
    next.time_stamp = t + dt;
    next.positions.resize(ens.positions.size());
    parallel_for(ens.positions.size(), workers, [&](std::size_t i) {
        const double x = ens.positions[i];
        const double r = u.evaluate(x);
        const CounterStream stream(derive_seed(ens.base_seed, i, kParticleNoiseTag));
        const double dw = sd * stream.normal(step_index);
        const double y = x + m.eval_b(t, x, r) * dt + std::sqrt(2 * m.eval_a(t, x, r)) * dw;
        if (!std::isfinite(y)) throw IntegrationFailure("non-finite particle position", i);
        next.positions[i] = y;
    });
    return next;
}

std::vector<ParticleEnsemble> simulate_mv(const GridDensity& u0, const CoefficientModel& m, double horizon, double dt,
                                          std::size_t n_particles, const EstimatorConfig& cfg,
                                          std::uint64_t base_seed, const MvOptions& opts) {
    if (n_particles == 0) throw ConfigError("simulate_mv: N must be at least 1");
    ParticleEnsemble ens;
    ens.base_seed = base_seed;
    ens.positions.resize(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) {
        const CounterStream stream(derive_seed(base_seed, i, kParticleInitTag));
        ens.positions[i] = inverse_cdf(u0, stream.uniform(0));
    }
    std::vector<ParticleEnsemble> out{ens};
    if (horizon == 0) return out;
    if (!(dt > 0)) throw ConfigError("simulate_mv: dt must be positive");
    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
    if (n_steps == 0 || std::abs(static_cast<double>(n_steps) * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw ConfigError("horizon T must be an integer multiple of dt");
    }
    for (std::size_t k = 0; k < n_steps; ++k) {
        ens = step_mv(ens, m, dt, cfg, k, opts.workers);
        ens.time_stamp = static_cast<double>(k + 1) * dt;
        const bool last = k + 1 == n_steps;
        if (last) ens.time_stamp = horizon;
        if (last || (opts.snapshot_stride > 0 && (k + 1) % opts.snapshot_stride == 0)) out.push_back(ens);
    }
    return out;
}

}  // namespace nemfp
