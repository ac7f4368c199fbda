#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nemfp/coefficients.hpp"
#include "nemfp/grid.hpp"
#include "nemfp/particles.hpp"
#include "nemfp/sde.hpp"

namespace nemfp::io {

// Fixed 17-significant-digit rendering used by every CSV writer.
std::string format_real(double v);

// Header `t,x,u`; one row per (snapshot, cell).
void write_density_csv(std::ostream& os, std::span<const GridDensity> snapshots);

// Reads cell values for `grid` from a CSV with a `u` column. When a `t`
// column is present only rows of the first time stamp are used. Throws
// ConfigError on malformed input or a cell-count mismatch.
GridDensity read_density_csv(std::istream& is, const Grid1D& grid);

// Long format `path_id,t,x`.
void write_trajectories_csv(std::ostream& os, std::span<const SdePath> paths);

// `level,dt,sup_gap`.
void write_gap_table_csv(std::ostream& os, const GapTable& table);

// Long format `t,particle_id,x`.
void write_particles_csv(std::ostream& os, std::span<const ParticleEnsemble> snapshots);

// `condition_id,passed,estimated_constant,witness_t,witness_x,witness_r,witness_r_bar`.
void write_conditions_csv(std::ostream& os, std::span<const ConditionReport> reports);

}  // namespace nemfp::io
