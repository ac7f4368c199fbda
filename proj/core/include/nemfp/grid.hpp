#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nemfp {

// Uniform cell-centered grid on [x_min, x_max].
struct Grid1D {
    double x_min = -1.0;
    double x_max = 1.0;
    std::size_t n_cells = 8;

    Grid1D() = default;
    // Validates: x_min < x_max, n_cells >= 8.
    Grid1D(double lo, double hi, std::size_t n);

    double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
    double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * dx(); }
    // Face i sits between cells i-1 and i; face 0 and face n_cells are the walls.
    double face(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    bool contains(double x) const { return x >= x_min && x <= x_max; }
    // Index of the cell containing x, clamped to [0, n_cells).
    std::size_t locate(double x) const;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

// Cell-averaged density on a Grid1D.
struct GridDensity {
    Grid1D grid;
    std::vector<double> values;
    double time_stamp = 0.0;

    GridDensity() = default;
    GridDensity(Grid1D g, std::vector<double> v, double t = 0.0);

    double mass() const;
    double sup() const;
    double min() const;

    // Piecewise-linear through cell centers, constant to the walls in the
    // outer half cells, zero outside the box.
    double evaluate(double x) const;
};

// Throws ConfigError unless both densities live on the same grid.
void require_same_grid(const GridDensity& p, const GridDensity& q);

}  // namespace nemfp
