#include "nemfp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nemfp/errors.hpp"

namespace nemfp {

Grid1D::Grid1D(double lo, double hi, std::size_t n) : x_min(lo), x_max(hi), n_cells(n) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw ConfigError("grid: require x_min < x_max");
    if (n < 8) throw ConfigError("grid: n_cells must be at least 8");
}

std::size_t Grid1D::locate(double x) const {
    const double s = std::floor((x - x_min) / dx());
    if (!(s > 0)) return 0;
    return std::min(static_cast<std::size_t>(s), n_cells - 1);
}

GridDensity::GridDensity(Grid1D g, std::vector<double> v, double t)
    : grid(g), values(std::move(v)), time_stamp(t) {
    if (values.size() != grid.n_cells) throw ConfigError("density: value count does not match grid");
}

double GridDensity::mass() const { return grid.dx() * std::accumulate(values.begin(), values.end(), 0.0); }

double GridDensity::sup() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }

double GridDensity::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

double GridDensity::evaluate(double x) const {
    if (!grid.contains(x)) return 0.0;
    const double s = (x - grid.x_min) / grid.dx() - 0.5;
    if (s <= 0) return values.front();
    const auto last = static_cast<double>(grid.n_cells - 1);
    if (s >= last) return values.back();
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return (1 - w) * values[i] + w * values[i + 1];
}

void require_same_grid(const GridDensity& p, const GridDensity& q) {
    if (!(p.grid == q.grid)) throw ConfigError("densities live on different grids");
}

}  // namespace nemfp
