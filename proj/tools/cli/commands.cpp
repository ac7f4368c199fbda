#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "nemfp/errors.hpp"
#include "nemfp/io.hpp"

namespace nemfp::cli {

namespace {

namespace fs = std::filesystem;
using io::format_real;

double dx_sum_abs(const GridDensity& u) {
    double s = 0.0;
    for (double v : u.values) s += std::abs(v);
    return s * u.grid.dx();
}

class Report {
public:
    void line(const std::string& text) { lines_.push_back(text); }

    void check(const MatchReport& r) {
        all_pass_ = all_pass_ && r.passed;
        std::ostringstream os;
        os << (r.passed ? "[PASS] " : "[FAIL] ") << r.context << ": " << to_string(r.metric)
           << " value=" << format_real(r.value) << " threshold=" << format_real(r.threshold);
        lines_.push_back(os.str());
    }

    void condition(const ConditionReport& c) {
        all_pass_ = all_pass_ && c.passed;
        std::ostringstream os;
        os << (c.passed ? "[PASS] " : "[FAIL] ") << to_string(c.id)
           << " estimated_constant=" << format_real(c.estimated_constant);
        if (c.witness) {
            os << " witness=(t=" << format_real(c.witness->t) << ", x=" << format_real(c.witness->x)
               << ", r=" << format_real(c.witness->r) << ", r_bar=" << format_real(c.witness->r_bar) << ")";
        }
        lines_.push_back(os.str());
    }

    void fail(const std::string& text) {
        all_pass_ = false;
        lines_.push_back("[FAIL] " + text);
    }

    void file(const std::string& name) {
        if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    }

    bool all_pass() const { return all_pass_; }

    void write(std::ostream& os, const std::string& model_id) const {
        os << "nemfp verification report\n";
        os << "model: " << model_id << "\n\n";
        for (const auto& l : lines_) os << l << '\n';
        os << "\nfiles:\n";
        for (const auto& f : files_) os << "  " << f << '\n';
        os << "  report.txt\n";
        os << "\nstatus: " << (all_pass_ ? "PASS" : "FAIL") << '\n';
    }

private:
    std::vector<std::string> lines_;
    std::vector<std::string> files_;
    bool all_pass_ = true;
};

// Shared state of one command invocation.
struct Context {
    const RunConfig& cfg;
    fs::path out;
    bool quiet;
    std::ostream& log;
    Report report;
    GridDensity u0;
    std::shared_ptr<const FpkeSolution> solution;
    double dt = 0.0;

    void note(const std::string& text) const {
        if (!quiet) log << text << '\n';
    }

    std::ofstream open(const std::string& name) {
        std::ofstream os(out / name);
        if (!os) throw Error("cannot write '" + (out / name).string() + "'");
        report.file(name);
        return os;
    }
};

Context make_context(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    Context ctx{cfg, fs::path(opts.out_dir.empty() ? cfg.output_dir : opts.out_dir), opts.quiet, log, {}, {}, {}, 0.0};
    fs::create_directories(ctx.out);
    ctx.u0 = build_initial(cfg.initial, cfg.grid);
    return ctx;
}

int finish(Context& ctx) {
    {
        std::ofstream os(ctx.out / "report.txt");
        if (!os) throw Error("cannot write report.txt");
        ctx.report.write(os, ctx.cfg.model.id);
    }
    ctx.note(std::string("status: ") + (ctx.report.all_pass() ? "PASS" : "FAIL") + " (" +
             (ctx.out / "report.txt").string() + ")");
    return ctx.report.all_pass() ? kExitPass : kExitFailure;
}

double resolve_dt(const RunConfig& cfg, const GridDensity& u0) {
    if (cfg.horizon == 0) return 0.0;
    if (cfg.dt) return *cfg.dt;
    return aligned_dt(0.5 * stable_dt(cfg.model, u0, 0.0, cfg.scheme), cfg.horizon);
}

void ensure_solution(Context& ctx) {
    if (ctx.solution) return;
    ctx.dt = resolve_dt(ctx.cfg, ctx.u0);
    ctx.note("solving FPKE: " + std::to_string(ctx.cfg.grid.n_cells) + " cells, dt=" + format_real(ctx.dt));
    ctx.solution = std::make_shared<const FpkeSolution>(solve_fpke(ctx.cfg.model, ctx.u0, ctx.cfg.horizon, ctx.dt,
                                                                   ctx.cfg.scheme));
}

const GridDensity& snapshot_at(const FpkeSolution& sol, double t) {
    const GridDensity& s = sol.at(t);
    if (std::abs(s.time_stamp - t) > 1e-9) {
        throw ConfigError("checks.times: t=" + format_real(t) +
                          " is not an FPKE snapshot time (adjust fpke.snapshot_stride or time.dt)");
    }
    return s;
}

std::string time_label(double t) {
    std::ostringstream os;
    os << "t=" << t;
    return os.str();
}

// ---- stages -----------------------------------------------------------------

void stage_conditions(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const HypothesisGrid lattice = default_lattice(cfg.model, cfg.x_min, cfg.x_max, cfg.horizon, ctx.u0.sup());
    const auto reports = audit_all(cfg.model, lattice);
    {
        auto os = ctx.open("conditions.csv");
        io::write_conditions_csv(os, reports);
    }
    ctx.report.line("# hypothesis audit (r in [" + format_real(lattice.r_samples.front()) + ", " +
                    format_real(lattice.r_samples.back()) + "])");
    for (const auto& r : reports) {
        if (cfg.checks.conditions) {
            ctx.report.condition(r);
        } else {
            ctx.report.line("[INFO] " + std::string(to_string(r.id)) + " passed=" + (r.passed ? "1" : "0"));
        }
    }
    if (cfg.checks.d0_regularity && !cfg.initial.from_csv) {
        const Grid1D fine(cfg.x_min, cfg.x_max, 2 * cfg.grid.n_cells);
        const auto reg = initial_regularity(cfg.model, ctx.u0, build_initial(cfg.initial, fine));
        ctx.report.line(std::string(reg.flagged ? "[WARN] " : "[INFO] ") +
                        "D0 regularity: H1 norm of beta(0,.,u0) coarse=" + format_real(reg.coarse_norm) +
                        " fine=" + format_real(reg.fine_norm) + " growth=" + format_real(reg.growth) +
                        (reg.flagged ? " (beta(0,.,u0) may not be in H1)" : ""));
    }
    ctx.note("conditions: " + std::to_string(reports.size()) + " checks written");
}

void stage_fpke(Context& ctx) {
    const auto& cfg = ctx.cfg;
    ensure_solution(ctx);
    const FpkeSolution& sol = *ctx.solution;
    {
        auto os = ctx.open("densities.csv");
        io::write_density_csv(os, sol.snapshots);
    }

    std::optional<FpkeSolution> second;
    if (cfg.initial2) {
        const GridDensity v0 = build_initial(*cfg.initial2, cfg.grid);
        second = solve_fpke(cfg.model, v0, cfg.horizon, ctx.dt, cfg.scheme);
    }

    const double l1_initial = dx_sum_abs(sol.snapshots.front());
    double mass_drift = 0.0, negativity = 0.0, l1_growth = 0.0, excess = 0.0;
    {
        auto os = ctx.open("fpke_summary.csv");
        os << "t,mass,mass_drift,min_value,linf_norm,contraction_excess\n";
        const double d0 = second ? l1_distance(sol.snapshots.front(), second->snapshots.front()) : 0.0;
        for (std::size_t k = 0; k < sol.snapshots.size(); ++k) {
            const GridDensity& s = sol.snapshots[k];
            const double drift = std::abs(s.mass() - 1.0);
            mass_drift = std::max(mass_drift, drift);
            negativity = std::max(negativity, -s.min());
            l1_growth = std::max(l1_growth, dx_sum_abs(s) - l1_initial);
            os << format_real(s.time_stamp) << ',' << format_real(s.mass()) << ',' << format_real(drift) << ','
               << format_real(s.min()) << ',' << format_real(s.sup()) << ',';
            if (second) {
                const double e = std::max(0.0, l1_distance(s, second->snapshots[k]) - d0);
                excess = std::max(excess, e);
                os << format_real(e);
            }
            os << '\n';
        }
    }
    ctx.report.line("# FPKE (" + std::to_string(sol.snapshots.size()) + " snapshots, dt=" + format_real(ctx.dt) +
                    ")");
    ctx.report.check(make_report(Metric::l1, mass_drift, cfg.checks.mass_tol, "mass drift"));
    ctx.report.check(make_report(Metric::linf, negativity, 0.0, "positivity (max negative part)"));
    ctx.report.check(make_report(Metric::l1, std::max(0.0, l1_growth), 1e-10, "L1 norm growth"));
    if (sol.boundary_flagged()) {
        ctx.report.line("[WARN] boundary mass " + format_real(sol.max_boundary_mass) +
                        " exceeds the truncation monitor; enlarge the domain");
    }
    if (cfg.checks.linf && cfg.horizon > 0) {
        const HypothesisGrid lattice = default_lattice(cfg.model, cfg.x_min, cfg.x_max, cfg.horizon, ctx.u0.sup());
        const double lambda = estimate_lambda(cfg.model, lattice).estimated_constant;
        MatchReport r = linf_bound_check(sol, lambda, cfg.checks.linf_tol.value_or(-1.0));
        r.context += " (lambda_hat=" + format_real(lambda) + ")";
        ctx.report.check(r);
    }
    if (second) {
        double tol = 0.0;
        if (cfg.checks.contraction_tol) {
            tol = *cfg.checks.contraction_tol;
        } else {
            const InitialSpec spec = cfg.initial;
            const GridDensity base = ctx.u0;
            ProfileFactory factory = [spec, base](const Grid1D& g) {
                return spec.from_csv ? resample_linear(base, g) : reference_profile(spec.profile, g);
            };
            tol = contraction_tolerance(cfg.model, factory, cfg.grid, cfg.horizon, ctx.dt, cfg.scheme);
        }
        ctx.report.check(make_report(Metric::l1, excess, tol, "L1 contraction excess"));
    }
    ctx.note("fpke: mass drift " + format_real(mass_drift));
}

std::size_t steps_of(double t, double dt) { return static_cast<std::size_t>(std::llround(t / dt)); }

void require_multiple(double t, double dt, const char* key) {
    const double k = t / dt;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
        throw ConfigError(std::string(key) + ": T and every check time must be multiples of the step");
    }
}

void stage_sde(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& s = cfg.sde;
    ensure_solution(ctx);
    const FrozenCoefficients frozen = freeze_coefficients(cfg.model, ctx.solution);
    require_multiple(cfg.horizon, s.dt, "sde.dt");
    for (double t : cfg.checks.times) require_multiple(t, s.dt, "sde.dt");

    EnsembleOptions eo;
    eo.dt = s.dt;
    eo.integrator = s.integrators.front();
    eo.workers = cfg.workers;
    ctx.note("sde: " + std::to_string(s.n_paths) + " paths, integrator " + std::string(to_string(eo.integrator)));
    const auto marginals = ensemble_marginals(frozen, s.n_paths, cfg.checks.times, s.seed, eo);
    {
        auto os = ctx.open("marginals_sde.csv");
        io::write_density_csv(os, marginals);
    }
    std::vector<GridDensity> reference;
    for (double t : cfg.checks.times) reference.push_back(snapshot_at(*ctx.solution, t));
    {
        auto os = ctx.open("marginals_fpke.csv");
        io::write_density_csv(os, reference);
    }
    ctx.report.line("# SDE_u superposition (" + std::to_string(s.n_paths) + " paths, dt=" + format_real(s.dt) + ")");
    for (std::size_t j = 0; j < marginals.size(); ++j) {
        ctx.report.check(make_report(Metric::w1, w1_distance(marginals[j], reference[j]), cfg.checks.w1_sde,
                                     "SDE marginal vs FPKE " + time_label(cfg.checks.times[j])));
    }

    const std::size_t n_traj = std::min(s.trajectories, s.n_paths);
    if (n_traj > 0) {
        const std::size_t n_steps = steps_of(cfg.horizon, s.dt);
        std::vector<SdePath> paths;
        for (std::size_t i = 0; i < n_traj; ++i) {
            const BrownianPath w = sample_brownian(n_steps, s.dt, path_noise_seed(s.seed, i));
            paths.push_back(solve_sde(frozen, w, path_initial_seed(s.seed, i), eo.integrator));
        }
        auto os = ctx.open("trajectories.csv");
        io::write_trajectories_csv(os, paths);
    }

    const bool has_pair = std::find(s.integrators.begin(), s.integrators.end(), Integrator::euler) !=
                              s.integrators.end() &&
                          std::find(s.integrators.begin(), s.integrators.end(), Integrator::heun_drift) !=
                              s.integrators.end();
    if (has_pair) {
        const GapTable gap = mean_pathwise_gap(frozen, s.seed, s.gap_paths, s.dt, s.levels, cfg.workers);
        {
            auto os = ctx.open("gap_table.csv");
            io::write_gap_table_csv(os, gap);
        }
        if (cfg.model.drift_family == Family::constant) {
            const double worst = std::accumulate(gap.rows.begin(), gap.rows.end(), 0.0,
                                                 [](double a, const GapRow& r) { return std::max(a, r.sup_gap); });
            ctx.report.check(make_report(Metric::linf, worst, 0.0, "pathwise gap (constant drift, exact)"));
        } else if (std::isnan(gap.slope)) {
            ctx.report.fail("pathwise gap slope undefined (a level has zero gap)");
        } else {
            // Reported as a shortfall so that passed <=> value <= threshold.
            MatchReport r = make_report(Metric::linf, std::max(0.0, cfg.checks.gap_slope - gap.slope), 0.0,
                                        "pathwise gap slope shortfall (slope=" + format_real(gap.slope) +
                                            ", required " + format_real(cfg.checks.gap_slope) + ")");
            ctx.report.check(r);
        }
    }
}

void stage_particles(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& p = cfg.particles;
    ensure_solution(ctx);
    require_multiple(cfg.horizon, p.dt, "particles.dt");
    std::size_t stride = p.snapshot_stride;
    if (stride == 0) {
        stride = steps_of(cfg.horizon, p.dt);
        for (double t : cfg.checks.times) {
            require_multiple(t, p.dt, "particles.dt");
            if (t > 0) stride = std::gcd(stride, steps_of(t, p.dt));
        }
    }
    EstimatorConfig ec;
    ec.kind = p.estimator;
    ec.grid = cfg.grid;
    ec.bandwidth = p.bandwidth;
    ec.bandwidth_rule = p.bandwidth_rule;
    MvOptions mo;
    mo.snapshot_stride = stride;
    mo.workers = cfg.workers;
    ctx.note("particles: " + std::to_string(p.n) + " particles, estimator " + std::string(to_string(p.estimator)));
    const auto snapshots = simulate_mv(ctx.u0, cfg.model, cfg.horizon, p.dt, p.n, ec, p.seed, mo);
    {
        auto os = ctx.open("particles.csv");
        io::write_particles_csv(os, snapshots);
    }
    std::vector<GridDensity> marginals;
    ctx.report.line("# particle system (" + std::to_string(p.n) + " particles, dt=" + format_real(p.dt) + ")");
    for (double t : cfg.checks.times) {
        auto it = std::find_if(snapshots.begin(), snapshots.end(),
                               [t](const ParticleEnsemble& e) { return std::abs(e.time_stamp - t) <= 1e-9; });
        if (it == snapshots.end()) {
            throw ConfigError("particles.snapshot_stride: no particle snapshot at " + time_label(t));
        }
        marginals.push_back(histogram_density(it->positions, cfg.grid, t));
        ctx.report.check(make_report(Metric::w1, w1_distance(marginals.back(), snapshot_at(*ctx.solution, t)),
                                     cfg.checks.w1_particles, "particle marginal vs FPKE " + time_label(t)));
    }
    auto os = ctx.open("marginals_particles.csv");
    io::write_density_csv(os, marginals);
}

}  // namespace

int cmd_check_conditions(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    Context ctx = make_context(cfg, opts, log);
    stage_conditions(ctx);
    return finish(ctx);
}

int cmd_solve_fpke(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    Context ctx = make_context(cfg, opts, log);
    stage_fpke(ctx);
    return finish(ctx);
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    if (!cfg.sde.enabled && !cfg.particles.enabled) {
        throw ConfigError("simulate: enable sde.enabled or particles.enabled");
    }
    Context ctx = make_context(cfg, opts, log);
    if (cfg.sde.enabled) stage_sde(ctx);
    if (cfg.particles.enabled) stage_particles(ctx);
    return finish(ctx);
}

int cmd_verify(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
    Context ctx = make_context(cfg, opts, log);
    stage_conditions(ctx);
    stage_fpke(ctx);
    if (cfg.sde.enabled) stage_sde(ctx);
    if (cfg.particles.enabled) stage_particles(ctx);
    return finish(ctx);
}

int run_guarded(const std::string& command, const std::string& config_path, const CommandOptions& opts,
                const std::optional<std::uint64_t>& seed_override, std::ostream& log, std::ostream& err) {
    try {
        RunConfig cfg = load_run_config(config_path);
        if (seed_override) apply_seed_override(cfg, *seed_override);
        if (command == "check-conditions") return cmd_check_conditions(cfg, opts, log);
        if (command == "solve-fpke") return cmd_solve_fpke(cfg, opts, log);
        if (command == "simulate") return cmd_simulate(cfg, opts, log);
        if (command == "verify") return cmd_verify(cfg, opts, log);
        err << "error: unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SchemeFailure& e) {
        err << "scheme failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const IterationFailure& e) {
        err << "iteration failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const IntegrationFailure& e) {
        err << "integration failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace nemfp::cli
