#pragma once

#include <string>
#include <string_view>

#include "nemfp/grid.hpp"

namespace nemfp {

enum class Metric { l1, linf, w1 };

std::string_view to_string(Metric m);

struct MatchReport {
    Metric metric = Metric::l1;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
    std::string context;
};

// passed is always value <= threshold.
MatchReport make_report(Metric metric, double value, double threshold, std::string context);

// dx * sum |p_i - q_i|.
double l1_distance(const GridDensity& p, const GridDensity& q);

// max_i |p_i - q_i|.
double linf_distance(const GridDensity& p, const GridDensity& q);

// 1-D Wasserstein-1 through cumulative distributions evaluated at the right
// cell faces: dx * sum |F_p(x_i) - F_q(x_i)|. Masses must agree within 1e-8.
double w1_distance(const GridDensity& p, const GridDensity& q);

struct ProfileSpec {
    enum class Kind { gaussian, bump, uniform };

    Kind kind = Kind::gaussian;
    double mean = 0.0;    // gaussian
    double sd = 1.0;      // gaussian
    double center = 0.0;  // bump
    double width = 1.0;   // bump half-width
    double lo = -1.0;     // uniform
    double hi = 1.0;      // uniform
};

// Parses "gaussian" | "bump" | "uniform"; throws ConfigError otherwise.
ProfileSpec::Kind parse_profile_kind(std::string_view name);

// Reference densities normalized to unit mass on the grid.
//   gaussian: exact cell averages of N(mean, sd^2)
//   bump:     (1 - s^2)^3 on |s| < 1, s = (x - center)/width (C^2, compact)
//   uniform:  exact cell averages of the indicator of [lo, hi]
GridDensity reference_profile(const ProfileSpec& spec, const Grid1D& grid);

// Piecewise-linear resampling onto another grid, renormalized to the
// source mass.
GridDensity resample_linear(const GridDensity& src, const Grid1D& target);

// Conservative restriction of a 2n-cell density onto its n-cell parent grid.
GridDensity restrict_to_coarse(const GridDensity& fine, const Grid1D& coarse);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace nemfp
