#include "run_config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "nemfp/errors.hpp"
#include "nemfp/io.hpp"

namespace nemfp::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Typed, consumption-tracking view over the raw entries.
class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    bool has(const std::string& key) const { return raw_.count(key) != 0; }

    const std::string* find(const std::string& key) {
        auto it = raw_.find(key);
        if (it == raw_.end()) return nullptr;
        used_.insert(key);
        return &it->second.value;
    }

    const std::string& require(const std::string& key) {
        const std::string* v = find(key);
        if (!v) throw ConfigError("missing required key '" + key + "'");
        return *v;
    }

    double number(const std::string& key, const std::string& text) const {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
            throw ConfigError(where(key) + ": expected a finite number, got '" + text + "'");
        }
        return v;
    }

    double real(const std::string& key) { return number(key, require(key)); }
    double real(const std::string& key, double fallback) {
        const std::string* v = find(key);
        return v ? number(key, *v) : fallback;
    }

    std::optional<double> real_or_auto(const std::string& key) {
        const std::string* v = find(key);
        if (!v || *v == "auto") return std::nullopt;
        return number(key, *v);
    }

    std::uint64_t unsigned_int(const std::string& key, const std::string& text) const {
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError(where(key) + ": expected a nonnegative integer, got '" + text + "'");
        }
        errno = 0;
        const unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
        if (errno == ERANGE) throw ConfigError(where(key) + ": integer out of range");
        return v;
    }

    std::uint64_t count(const std::string& key) { return unsigned_int(key, require(key)); }
    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        const std::string* v = find(key);
        return v ? unsigned_int(key, *v) : fallback;
    }

    bool flag(const std::string& key, bool fallback) {
        const std::string* v = find(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "yes" || *v == "on" || *v == "1") return true;
        if (*v == "false" || *v == "no" || *v == "off" || *v == "0") return false;
        throw ConfigError(where(key) + ": expected true or false, got '" + *v + "'");
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const std::string* v = find(key);
        return v ? *v : fallback;
    }

    // Rethrows a library ConfigError with the key attached.
    template <class F>
    auto parsed(const std::string& key, const std::string& text, F parse) {
        try {
            return parse(text);
        } catch (const ConfigError& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    void reject_unused() const {
        for (const auto& [key, entry] : raw_) {
            if (!used_.count(key)) {
                throw ConfigError("unknown key '" + key + "' (line " + std::to_string(entry.line) + ")");
            }
        }
    }

    std::string where(const std::string& key) const {
        auto it = raw_.find(key);
        if (it == raw_.end()) return "key '" + key + "'";
        return "key '" + key + "' (line " + std::to_string(it->second.line) + ")";
    }

private:
    const RawConfig& raw_;
    std::set<std::string> used_;
};

Family parse_diffusion(const std::string& s) {
    if (s == "constant") return Family::constant;
    if (s == "porous-regularized") return Family::porous_regularized;
    if (s == "decaying") return Family::decaying;
    throw ConfigError("unsupported diffusion family '" + s + "'");
}

Family parse_drift(const std::string& s) {
    if (s == "constant") return Family::constant;
    if (s == "burgers-gauss") return Family::burgers_gauss;
    throw ConfigError("unsupported drift family '" + s + "'");
}

Envelope::Kind parse_envelope(const std::string& s) {
    if (s == "gauss") return Envelope::Kind::gauss;
    if (s == "constant") return Envelope::Kind::constant;
    throw ConfigError("unsupported envelope kind '" + s + "'");
}

TimeStepping parse_stepping(const std::string& s) {
    if (s == "explicit") return TimeStepping::explicit_euler;
    if (s == "semi-implicit") return TimeStepping::semi_implicit;
    throw ConfigError("unsupported time stepping '" + s + "' (explicit | semi-implicit)");
}

InitialSpec read_initial(Reader& r, const std::string& prefix) {
    InitialSpec spec;
    const std::string kind_key = prefix + ".kind";
    const std::string kind = r.require(kind_key);
    if (kind == "csv") {
        spec.from_csv = true;
        spec.csv_path = r.require(prefix + ".path");
        return spec;
    }
    spec.profile.kind = r.parsed(kind_key, kind, [](const std::string& s) { return parse_profile_kind(s); });
    switch (spec.profile.kind) {
        case ProfileSpec::Kind::gaussian:
            spec.profile.mean = r.real(prefix + ".mean", 0.0);
            spec.profile.sd = r.real(prefix + ".sd");
            if (!(spec.profile.sd > 0)) throw ConfigError(r.where(prefix + ".sd") + ": must be positive");
            break;
        case ProfileSpec::Kind::bump:
            spec.profile.center = r.real(prefix + ".center", 0.0);
            spec.profile.width = r.real(prefix + ".width");
            if (!(spec.profile.width > 0)) throw ConfigError(r.where(prefix + ".width") + ": must be positive");
            break;
        case ProfileSpec::Kind::uniform:
            spec.profile.lo = r.real(prefix + ".lo");
            spec.profile.hi = r.real(prefix + ".hi");
            if (!(spec.profile.lo < spec.profile.hi)) {
                throw ConfigError(r.where(prefix + ".hi") + ": must exceed " + prefix + ".lo");
            }
            break;
    }
    return spec;
}

}  // namespace

RawConfig parse_raw_config(std::istream& is) {
    RawConfig raw;
    std::string line;
    int number = 0;
    while (std::getline(is, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
        if (raw.count(key)) {
            throw ConfigError("duplicate key '" + key + "' (line " + std::to_string(number) + ")");
        }
        raw[key] = {value, number};
    }
    return raw;
}

RawConfig parse_raw_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_raw_config(in);
}

RunConfig parse_run_config(const RawConfig& raw) {
    Reader r(raw);
    RunConfig cfg;

    DiffusionSpec diffusion;
    diffusion.kind = r.parsed("model.diffusion", r.require("model.diffusion"), parse_diffusion);
    diffusion.alpha = r.real("model.alpha", 1.0);
    diffusion.kappa = r.real("model.kappa", 0.0);
    diffusion.localized = r.flag("model.localized", true);
    DriftSpec drift;
    drift.kind = r.parsed("model.drift", r.require("model.drift"), parse_drift);
    drift.c = r.real("model.c", 0.0);
    const double gamma0 = r.real("model.gamma0");
    if (!(gamma0 > 0)) throw ConfigError(r.where("model.gamma0") + ": must be positive");
    Envelope h;
    h.kind = r.parsed("model.h.kind", r.text("model.h.kind", "gauss"), parse_envelope);
    h.scale = r.real("model.h.scale", 1.0);
    h.length = r.real("model.h.length", 1.0);
    if (h.scale < 0) throw ConfigError(r.where("model.h.scale") + ": must be nonnegative");
    if (!(h.length > 0)) throw ConfigError(r.where("model.h.length") + ": must be positive");
    cfg.model = make_model(diffusion, drift, gamma0, h);

    cfg.x_min = r.real("domain.x_min");
    cfg.x_max = r.real("domain.x_max");
    const std::uint64_t n_cells = r.count("domain.n_cells");
    cfg.grid = r.parsed("domain.n_cells", std::to_string(n_cells),
                        [&](const std::string&) { return Grid1D(cfg.x_min, cfg.x_max, n_cells); });

    cfg.horizon = r.real("time.T");
    if (cfg.horizon < 0) throw ConfigError(r.where("time.T") + ": must be nonnegative");
    cfg.dt = r.real_or_auto("time.dt");
    if (cfg.dt && !(*cfg.dt > 0)) throw ConfigError(r.where("time.dt") + ": must be positive");

    cfg.scheme.stepping = r.parsed("fpke.mode", r.text("fpke.mode", "explicit"), parse_stepping);
    cfg.scheme.snapshot_stride = r.count("fpke.snapshot_stride", 1);
    cfg.scheme.cfl_safety = r.real("fpke.cfl_safety", cfg.scheme.cfl_safety);
    if (!(cfg.scheme.cfl_safety > 0) || cfg.scheme.cfl_safety > 1) {
        throw ConfigError(r.where("fpke.cfl_safety") + ": must lie in (0, 1]");
    }

    cfg.initial = read_initial(r, "initial");
    if (r.has("initial2.kind")) cfg.initial2 = read_initial(r, "initial2");

    auto& s = cfg.sde;
    s.enabled = r.flag("sde.enabled", false);
    {
        s.n_paths = r.count("sde.n_paths", s.n_paths);
        s.dt = r.real("sde.dt", s.dt);
        if (!(s.dt > 0)) throw ConfigError(r.where("sde.dt") + ": must be positive");
        if (const std::string* list = r.find("sde.integrators")) {
            s.integrators.clear();
            for (const auto& name : split_list(*list)) {
                s.integrators.push_back(
                    r.parsed("sde.integrators", name, [](const std::string& v) { return parse_integrator(v); }));
            }
            if (s.integrators.empty()) throw ConfigError(r.where("sde.integrators") + ": empty list");
        }
        s.levels = static_cast<int>(r.count("sde.levels", 4));
        if (s.levels < 2) throw ConfigError(r.where("sde.levels") + ": must be at least 2");
        s.gap_paths = r.count("sde.gap_paths", s.gap_paths);
        s.trajectories = r.count("sde.trajectories", s.trajectories);
        s.seed = s.enabled ? r.count("sde.seed") : r.count("sde.seed", 0);
        if (s.n_paths == 0 || s.gap_paths == 0) throw ConfigError("sde.n_paths and sde.gap_paths must be positive");
    }

    auto& p = cfg.particles;
    p.enabled = r.flag("particles.enabled", false);
    {
        p.n = r.count("particles.n", p.n);
        if (p.n < 2) throw ConfigError(r.where("particles.n") + ": must be at least 2");
        p.dt = r.real("particles.dt", p.dt);
        if (!(p.dt > 0)) throw ConfigError(r.where("particles.dt") + ": must be positive");
        p.estimator = r.parsed("particles.estimator", r.text("particles.estimator", "histogram"),
                               [](const std::string& v) { return parse_estimator(v); });
        p.bandwidth_rule = r.parsed("particles.bandwidth_rule", r.text("particles.bandwidth_rule", "scott"),
                                    [](const std::string& v) { return parse_bandwidth_rule(v); });
        p.bandwidth = r.real("particles.bandwidth", 0.0);
        if (p.estimator == EstimatorKind::gaussian_kernel && p.bandwidth_rule == BandwidthRule::fixed &&
            !(p.bandwidth > 0)) {
            throw ConfigError(r.where("particles.bandwidth") + ": fixed bandwidth must be positive");
        }
        p.snapshot_stride = r.count("particles.snapshot_stride", 0);
        p.seed = p.enabled ? r.count("particles.seed") : r.count("particles.seed", 0);
    }

    auto& c = cfg.checks;
    c.conditions = r.flag("checks.conditions", c.conditions);
    c.linf = r.flag("checks.linf", c.linf);
    c.d0_regularity = r.flag("checks.d0_regularity", c.d0_regularity);
    c.mass_tol = r.real("checks.mass_tol", c.mass_tol);
    c.contraction_tol = r.real_or_auto("checks.contraction_tol");
    c.linf_tol = r.real_or_auto("checks.linf_tol");
    c.w1_sde = r.real("checks.w1_sde", c.w1_sde);
    c.w1_particles = r.real("checks.w1_particles", c.w1_particles);
    c.gap_slope = r.real("checks.gap_slope", c.gap_slope);
    if (const std::string* list = r.find("checks.times")) {
        c.times.clear();
        for (const auto& item : split_list(*list)) c.times.push_back(r.number("checks.times", item));
    }
    if ((s.enabled || p.enabled) && !(cfg.horizon > 0)) {
        throw ConfigError(r.where("time.T") + ": stochastic stages need a positive horizon");
    }
    if (s.enabled || p.enabled) {
        if (c.times.empty()) throw ConfigError(r.where("checks.times") + ": empty list");
        for (double t : c.times) {
            if (t < 0 || t > cfg.horizon) throw ConfigError(r.where("checks.times") + ": times must lie in [0, T]");
        }
    }

    cfg.output_dir = r.text("output.dir", cfg.output_dir);
    cfg.workers = static_cast<unsigned>(r.count("run.workers", 1));
    if (cfg.workers == 0) throw ConfigError(r.where("run.workers") + ": must be positive");

    r.reject_unused();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg = parse_run_config(parse_raw_config_file(path));
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](InitialSpec& spec) {
        if (spec.from_csv && std::filesystem::path(spec.csv_path).is_relative()) {
            spec.csv_path = (base / spec.csv_path).string();
        }
    };
    resolve(cfg.initial);
    if (cfg.initial2) resolve(*cfg.initial2);
    return cfg;
}

void apply_seed_override(RunConfig& cfg, std::uint64_t seed) {
    cfg.sde.seed = seed;
    cfg.particles.seed = seed;
}

GridDensity build_initial(const InitialSpec& spec, const Grid1D& grid) {
    if (!spec.from_csv) return reference_profile(spec.profile, grid);
    std::ifstream in(spec.csv_path);
    if (!in) throw ConfigError("cannot open initial density file '" + spec.csv_path + "'");
    return io::read_density_csv(in, grid);
}

}  // namespace nemfp::cli
