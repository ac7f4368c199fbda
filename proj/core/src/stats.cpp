#include "nemfp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nemfp/errors.hpp"

namespace nemfp {

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::l1: return "L1";
        case Metric::linf: return "Linf";
        case Metric::w1: return "W1";
    }
    return "?";
}

MatchReport make_report(Metric metric, double value, double threshold, std::string context) {
    return {metric, value, threshold, value <= threshold, std::move(context)};
}

double l1_distance(const GridDensity& p, const GridDensity& q) {
    require_same_grid(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) s += std::abs(p.values[i] - q.values[i]);
    return p.grid.dx() * s;
}

double linf_distance(const GridDensity& p, const GridDensity& q) {
    require_same_grid(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) s = std::max(s, std::abs(p.values[i] - q.values[i]));
    return s;
}

double w1_distance(const GridDensity& p, const GridDensity& q) {
    require_same_grid(p, q);
    if (std::abs(p.mass() - q.mass()) > 1e-8) throw ConfigError("w1_distance: densities carry different mass");
    const double dx = p.grid.dx();
    // Accumulate the difference directly so equal inputs give exactly zero.
    double cdf_gap = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        cdf_gap += dx * (p.values[i] - q.values[i]);
        s += std::abs(cdf_gap);
    }
    return dx * s;
}

ProfileSpec::Kind parse_profile_kind(std::string_view name) {
    if (name == "gaussian") return ProfileSpec::Kind::gaussian;
    if (name == "bump") return ProfileSpec::Kind::bump;
    if (name == "uniform") return ProfileSpec::Kind::uniform;
    throw ConfigError("unsupported profile kind '" + std::string(name) + "'");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {

void normalize(std::vector<double>& v, double dx) {
    double mass = 0.0;
    for (double x : v) mass += x;
    mass *= dx;
    if (!(mass > 0)) throw ConfigError("reference profile has no mass on the grid");
    for (double& x : v) x /= mass;
}

}  // namespace

GridDensity reference_profile(const ProfileSpec& spec, const Grid1D& grid) {
    const double dx = grid.dx();
    std::vector<double> v(grid.n_cells);
    switch (spec.kind) {
        case ProfileSpec::Kind::gaussian:
            if (!(spec.sd > 0)) throw ConfigError("gaussian profile: sd must be positive");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double lo = (grid.face(i) - spec.mean) / spec.sd;
                const double hi = (grid.face(i + 1) - spec.mean) / spec.sd;
                // Tail-stable difference of the two CDF values.
                v[i] = (lo > 0 ? normal_cdf(-lo) - normal_cdf(-hi) : normal_cdf(hi) - normal_cdf(lo)) / dx;
            }
            break;
        case ProfileSpec::Kind::bump:
            if (!(spec.width > 0)) throw ConfigError("bump profile: width must be positive");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double s = (grid.center(i) - spec.center) / spec.width;
                const double q = 1 - s * s;
                v[i] = q > 0 ? q * q * q : 0.0;
            }
            break;
        case ProfileSpec::Kind::uniform:
            if (!(spec.hi > spec.lo)) throw ConfigError("uniform profile: require lo < hi");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double overlap = std::min(grid.face(i + 1), spec.hi) - std::max(grid.face(i), spec.lo);
                v[i] = std::max(overlap, 0.0) / dx;
            }
            break;
    }
    normalize(v, dx);
    return GridDensity(grid, std::move(v), 0.0);
}

GridDensity resample_linear(const GridDensity& src, const Grid1D& target) {
    std::vector<double> v(target.n_cells);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(src.evaluate(target.center(i)), 0.0);
    GridDensity out(target, std::move(v), src.time_stamp);
    const double m = out.mass();
    if (m > 0) {
        const double scale = src.mass() / m;
        for (double& x : out.values) x *= scale;
    }
    return out;
}

GridDensity restrict_to_coarse(const GridDensity& fine, const Grid1D& coarse) {
    if (fine.grid.n_cells != 2 * coarse.n_cells || fine.grid.x_min != coarse.x_min ||
        fine.grid.x_max != coarse.x_max) {
        throw ConfigError("restrict_to_coarse: fine grid is not a 2x refinement of the coarse grid");
    }
    std::vector<double> v(coarse.n_cells);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (fine.values[2 * i] + fine.values[2 * i + 1]);
    return GridDensity(coarse, std::move(v), fine.time_stamp);
}

}  // namespace nemfp
