#include "nemfp/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "nemfp/errors.hpp"

namespace nemfp::io {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_density_csv(std::ostream& os, std::span<const GridDensity> snapshots) {
    os << "t,x,u\n";
    for (const auto& s : snapshots) {
        const std::string t = format_real(s.time_stamp);
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            os << t << ',' << format_real(s.grid.center(i)) << ',' << format_real(s.values[i]) << '\n';
        }
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_real(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("density CSV line " + std::to_string(line_no) + ": '" + s + "' is not a number");
    }
}

}  // namespace

GridDensity read_density_csv(std::istream& is, const Grid1D& grid) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("density CSV is empty");
    const auto header = split(line);
    std::ptrdiff_t u_col = -1;
    std::ptrdiff_t t_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "u") u_col = static_cast<std::ptrdiff_t>(i);
        if (header[i] == "t") t_col = static_cast<std::ptrdiff_t>(i);
    }
    if (u_col < 0) throw ConfigError("density CSV has no 'u' column");
    std::vector<double> values;
    bool have_t = false;
    double first_t = 0.0;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ConfigError("density CSV line " + std::to_string(line_no) + ": wrong column count");
        }
        if (t_col >= 0) {
            const double t = parse_real(cells[static_cast<std::size_t>(t_col)], line_no);
            if (!have_t) {
                first_t = t;
                have_t = true;
            } else if (t != first_t) {
                break;
            }
        }
        values.push_back(parse_real(cells[static_cast<std::size_t>(u_col)], line_no));
    }
    if (values.size() != grid.n_cells) {
        throw ConfigError("density CSV has " + std::to_string(values.size()) + " cells, grid expects " +
                          std::to_string(grid.n_cells));
    }
    for (double v : values) {
        if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("density CSV contains a negative or non-finite value");
    }
    return GridDensity(grid, std::move(values), 0.0);
}

void write_trajectories_csv(std::ostream& os, std::span<const SdePath> paths) {
    os << "path_id,t,x\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t k = 0; k < paths[p].states.size(); ++k) {
            os << p << ',' << format_real(paths[p].times[k]) << ',' << format_real(paths[p].states[k]) << '\n';
        }
    }
}

void write_gap_table_csv(std::ostream& os, const GapTable& table) {
    os << "level,dt,sup_gap\n";
    for (const auto& r : table.rows) os << r.level << ',' << format_real(r.dt) << ',' << format_real(r.sup_gap) << '\n';
}

void write_particles_csv(std::ostream& os, std::span<const ParticleEnsemble> snapshots) {
    os << "t,particle_id,x\n";
    for (const auto& s : snapshots) {
        const std::string t = format_real(s.time_stamp);
        for (std::size_t i = 0; i < s.positions.size(); ++i) os << t << ',' << i << ',' << format_real(s.positions[i]) << '\n';
    }
}

void write_conditions_csv(std::ostream& os, std::span<const ConditionReport> reports) {
    os << "condition_id,passed,estimated_constant,witness_t,witness_x,witness_r,witness_r_bar\n";
    for (const auto& r : reports) {
        os << to_string(r.id) << ',' << (r.passed ? 1 : 0) << ',' << format_real(r.estimated_constant);
        if (r.witness) {
            os << ',' << format_real(r.witness->t) << ',' << format_real(r.witness->x) << ','
               << format_real(r.witness->r) << ',' << format_real(r.witness->r_bar);
        } else {
            os << ",,,,";
        }
        os << '\n';
    }
}

}  // namespace nemfp::io
