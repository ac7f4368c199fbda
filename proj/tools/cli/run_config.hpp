#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nemfp/coefficients.hpp"
#include "nemfp/fpke.hpp"
#include "nemfp/particles.hpp"
#include "nemfp/sde.hpp"
#include "nemfp/stats.hpp"

namespace nemfp::cli {

// Flat `key = value` file with `#` comments. Duplicate keys and lines
// without `=` are configuration errors.
struct RawEntry {
    std::string value;
    int line = 0;
};
using RawConfig = std::map<std::string, RawEntry>;

RawConfig parse_raw_config(std::istream& is);
RawConfig parse_raw_config_file(const std::string& path);

struct InitialSpec {
    bool from_csv = false;
    ProfileSpec profile;
    std::string csv_path;
};

struct SdeSettings {
    bool enabled = false;
    std::size_t n_paths = 50000;
    double dt = 1.0 / 128;
    std::vector<Integrator> integrators{Integrator::euler, Integrator::heun_drift};
    int levels = 4;
    std::size_t gap_paths = 200;
    std::size_t trajectories = 16;
    std::uint64_t seed = 0;
};

struct ParticleSettings {
    bool enabled = false;
    std::size_t n = 50000;
    double dt = 1.0 / 128;
    EstimatorKind estimator = EstimatorKind::histogram;
    BandwidthRule bandwidth_rule = BandwidthRule::scott;
    double bandwidth = 0.0;
    std::size_t snapshot_stride = 0;
    std::uint64_t seed = 0;
};

struct CheckSettings {
    bool conditions = true;
    bool linf = true;
    bool d0_regularity = true;
    double mass_tol = 1e-10;
    std::optional<double> contraction_tol;  // auto when empty
    std::optional<double> linf_tol;         // 1e-6 + 2 dx when empty
    double w1_sde = 0.02;
    double w1_particles = 0.05;
    double gap_slope = 0.4;
    std::vector<double> times{0.25, 0.5};
};

struct RunConfig {
    CoefficientModel model;
    double x_min = 0.0;
    double x_max = 0.0;
    Grid1D grid;
    double horizon = 0.0;
    std::optional<double> dt;  // auto when empty
    SchemeOptions scheme;

    InitialSpec initial;
    std::optional<InitialSpec> initial2;

    SdeSettings sde;
    ParticleSettings particles;
    CheckSettings checks;

    std::string output_dir = "out";
    unsigned workers = 1;
};

// Validates every key; unknown keys, missing required keys and malformed
// values throw ConfigError naming the key.
RunConfig parse_run_config(const RawConfig& raw);
RunConfig load_run_config(const std::string& path);

// Replaces every stochastic seed.
void apply_seed_override(RunConfig& cfg, std::uint64_t seed);

GridDensity build_initial(const InitialSpec& spec, const Grid1D& grid);

}  // namespace nemfp::cli
