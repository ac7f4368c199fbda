#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Nemytskii-type nonlinear Fokker-Planck and McKean-Vlasov verification pipeline", "nemfp"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool quiet = false;

    const std::pair<const char*, const char*> commands[] = {
        {"check-conditions", "Audit the coefficient hypotheses on a lattice; writes conditions.csv"},
        {"solve-fpke", "Solve the nonlinear FPKE; writes densities.csv and fpke_summary.csv"},
        {"simulate", "Run the SDE_u ensemble and/or the particle system against the FPKE"},
        {"verify", "Run every stage in sequence into one report"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "Run configuration file")->required();
        sub->add_option("--out", out, "Output directory (overrides output.dir)");
        sub->add_option("--seed-override", seed, "Replace every stochastic seed");
        sub->add_flag("--quiet", quiet, "Suppress progress output");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nemfp::cli::kExitConfig;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    std::optional<std::uint64_t> override;
    if (chosen->count("--seed-override") > 0) override = seed;
    nemfp::cli::CommandOptions opts{out, quiet};
    return nemfp::cli::run_guarded(chosen->get_name(), config, opts, override, std::cerr, std::cerr);
}
