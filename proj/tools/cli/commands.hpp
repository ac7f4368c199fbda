#pragma once

#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace nemfp::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

struct CommandOptions {
    std::string out_dir;  // overrides output.dir when non-empty
    bool quiet = false;
};

// Each command writes its CSVs plus report.txt into the output directory and
// returns kExitPass only when every enabled check passes. Library exceptions
// propagate; run_guarded maps them to exit statuses.
int cmd_check_conditions(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_solve_fpke(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_verify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

// Loads the config, applies the seed override and dispatches `command`.
// ConfigError -> kExitConfig; any other error -> kExitFailure. Diagnostics go
// to `err`.
int run_guarded(const std::string& command, const std::string& config_path, const CommandOptions& opts,
                const std::optional<std::uint64_t>& seed_override, std::ostream& log, std::ostream& err);

}  // namespace nemfp::cli
