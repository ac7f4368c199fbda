#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nemfp/coefficients.hpp"
#include "nemfp/grid.hpp"

namespace nemfp {

struct ParticleEnsemble {
    std::vector<double> positions;
    double time_stamp = 0.0;
    std::uint64_t base_seed = 0;
};

enum class EstimatorKind { histogram, gaussian_kernel };
enum class BandwidthRule { fixed, scott };

std::string_view to_string(EstimatorKind k);
EstimatorKind parse_estimator(std::string_view name);
BandwidthRule parse_bandwidth_rule(std::string_view name);

// Density estimator feeding the particle coefficients. The output always
// lives on `grid`; kernel sums are evaluated at its cell centers.
struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::histogram;
    Grid1D grid;
    double bandwidth = 0.0;
    BandwidthRule bandwidth_rule = BandwidthRule::scott;
};

// Scott's rule: sample sd * N^(-1/5).
double scott_bandwidth(const std::vector<double>& positions);

GridDensity estimate_density(const ParticleEnsemble& ens, const EstimatorConfig& cfg);

// One Euler step with the density estimated once from the current ensemble:
//   X_i += b(t, X_i, u(X_i)) dt + sqrt(2 a(t, X_i, u(X_i))) dW_{i,k}
// dW_{i,k} comes from the counter stream of (base_seed, i) at counter k.
ParticleEnsemble step_mv(const ParticleEnsemble& ens, const CoefficientModel& m, double dt,
                         const EstimatorConfig& cfg, std::size_t step_index, unsigned workers = 1);

struct MvOptions {
    std::size_t snapshot_stride = 1;  // 0 keeps the initial and final ensembles only
    unsigned workers = 1;
};

// Samples N initial positions from u0 by inverse CDF and iterates step_mv up
// to T. T must be an integer multiple of dt.
std::vector<ParticleEnsemble> simulate_mv(const GridDensity& u0, const CoefficientModel& m, double horizon, double dt,
                                          std::size_t n_particles, const EstimatorConfig& cfg,
                                          std::uint64_t base_seed, const MvOptions& opts = {});

}  // namespace nemfp
