#include "nemfp/fpke.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nemfp/errors.hpp"

namespace nemfp {

const GridDensity& FpkeSolution::at(double t) const {
    if (snapshots.empty()) throw PreconditionError("empty FPKE solution");
    auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t + 1e-12 * std::max(1.0, std::abs(t)),
                               [](double v, const GridDensity& s) { return v < s.time_stamp; });
    if (it == snapshots.begin()) return snapshots.front();
    return *std::prev(it);
}

namespace {

struct RuleBounds {
    double diffusion = 0.0;  // D
    double speed = 0.0;      // V
};

RuleBounds rule_bounds(const CoefficientModel& m, const GridDensity& u, double t) {
    const Grid1D& g = u.grid;
    RuleBounds rb;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.center(i);
        const double r = u.values[i];
        rb.diffusion = std::max({rb.diffusion, m.eval_a(t, x, r), eval_dbeta_dr(m, t, x, r)});
        rb.speed = std::max(rb.speed, std::abs(eval_dbstar_dr(m, t, x, r)));
    }
    for (std::size_t f = 1; f < g.n_cells; ++f) {
        const double xf = g.face(f);
        rb.speed = std::max({rb.speed, std::abs(m.eval_b(t, xf, u.values[f - 1])), std::abs(m.eval_b(t, xf, u.values[f]))});
    }
    return rb;
}

double rule_dt(const RuleBounds& rb, double dx, const SchemeOptions& opts) {
    const double inf = std::numeric_limits<double>::infinity();
    const double adv = rb.speed > 0 ? dx / rb.speed : inf;
    if (opts.stepping == TimeStepping::semi_implicit) return opts.cfl_safety * adv;
    const double dif = rb.diffusion > 0 ? dx * dx / (2 * rb.diffusion) : inf;
    return opts.cfl_safety * std::min(dif, adv);
}

// Advective face fluxes (upwinded b*) into flux[0..n]; walls carry zero flux.
void advective_flux(const CoefficientModel& m, const Grid1D& g, double t, const std::vector<double>& u,
                    std::vector<double>& flux) {
    flux.front() = 0.0;
    flux.back() = 0.0;
    for (std::size_t f = 1; f < g.n_cells; ++f) {
        const double xf = g.face(f);
        const double bl = m.eval_b(t, xf, u[f - 1]);
        const double br = m.eval_b(t, xf, u[f]);
        flux[f] = std::max(bl, 0.0) * u[f - 1] + std::min(br, 0.0) * u[f];
    }
}

void require_nondegenerate(const CoefficientModel& m, double a, std::size_t step) {
    if (a < m.gamma0 - kMonotoneTol) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "diffusion a=%.6g fell below declared gamma0=%.6g", a, m.gamma0);
        throw SchemeFailure(buf, step);
    }
}

void check_state(const std::vector<double>& u, std::size_t step) {
    for (double v : u) {
        if (!std::isfinite(v)) throw SchemeFailure("non-finite density value", step);
        if (v < kPositivityFloor) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "negative density value %.3e", v);
            throw SchemeFailure(buf, step);
        }
    }
}

[[noreturn]] void stability_violation(double dt, double allowed, const SchemeOptions& opts, std::size_t step) {
    char buf[256];
    if (opts.stepping == TimeStepping::semi_implicit) {
        std::snprintf(buf, sizeof buf,
                      "dt=%.6g violates the stability rule dt <= %.3g*dx/sup|b| (allowed %.6g)", dt,
                      opts.cfl_safety, allowed);
    } else {
        std::snprintf(buf, sizeof buf,
                      "dt=%.6g violates the stability rule dt <= %.3g*min(dx^2/(2 sup a), dx/sup|b|) (allowed %.6g)",
                      dt, opts.cfl_safety, allowed);
    }
    throw SchemeFailure(buf, step);
}

// Returns the admissible dt for the pre-step state; the update is applied only
// when dt is admissible.
double explicit_step(const CoefficientModel& m, const Grid1D& g, double t, double dt, const SchemeOptions& opts,
                     std::vector<double>& u, std::vector<double>& beta, std::vector<double>& flux, std::size_t step) {
    const double dx = g.dx();
    RuleBounds rb;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.center(i);
        const double a = m.eval_a(t, x, u[i]);
        require_nondegenerate(m, a, step);
        beta[i] = a * u[i];
        rb.diffusion = std::max({rb.diffusion, a, a + u[i] * m.eval_da_dr(t, x, u[i])});
        rb.speed = std::max(rb.speed, std::abs(eval_dbstar_dr(m, t, x, u[i])));
    }
    flux.front() = 0.0;
    flux.back() = 0.0;
    for (std::size_t f = 1; f < g.n_cells; ++f) {
        const double xf = g.face(f);
        const double bl = m.eval_b(t, xf, u[f - 1]);
        const double br = m.eval_b(t, xf, u[f]);
        rb.speed = std::max({rb.speed, std::abs(bl), std::abs(br)});
        flux[f] = std::max(bl, 0.0) * u[f - 1] + std::min(br, 0.0) * u[f] - (beta[f] - beta[f - 1]) / dx;
    }
    const double allowed = rule_dt(rb, dx, opts);
    if (dt > allowed * (1 + 1e-12)) return allowed;
    const double lam = dt / dx;
    for (std::size_t i = 0; i < g.n_cells; ++i) u[i] -= lam * (flux[i + 1] - flux[i]);
    return allowed;
}

// Solves v - dt * L beta(t, ., v) = rhs with zero-flux walls by damped Newton.
void implicit_diffusion(const CoefficientModel& m, const Grid1D& g, double t, double dt, const SchemeOptions& opts,
                        const std::vector<double>& rhs, std::vector<double>& v, std::size_t step) {
    const std::size_t n = g.n_cells;
    const double dx = g.dx();
    const double mu = dt / (dx * dx);
    std::vector<double> beta(n), dbeta(n), res(n), lower(n), diag(n), upper(n), delta(n), trial(n), cp(n);

    auto residual = [&](const std::vector<double>& w, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = m.eval_a(t, g.center(i), w[i]);
            require_nondegenerate(m, a, step);
            beta[i] = a * w[i];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double lap = 0.0;
            if (i > 0) lap += beta[i - 1] - beta[i];
            if (i + 1 < n) lap += beta[i + 1] - beta[i];
            out[i] = w[i] - mu * lap - rhs[i];
            norm = std::max(norm, std::abs(out[i]));
        }
        return norm;
    };

    v.assign(rhs.begin(), rhs.end());
    for (double& x : v) x = std::max(x, 0.0);
    double rnorm = residual(v, res);
    for (int it = 0; it < opts.newton_max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) dbeta[i] = eval_dbeta_dr(m, t, g.center(i), v[i]);
        for (std::size_t i = 0; i < n; ++i) {
            const double neighbours = (i > 0 ? 1.0 : 0.0) + (i + 1 < n ? 1.0 : 0.0);
            diag[i] = 1 + mu * neighbours * dbeta[i];
            lower[i] = i > 0 ? -mu * dbeta[i - 1] : 0.0;
            upper[i] = i + 1 < n ? -mu * dbeta[i + 1] : 0.0;
        }
        // Thomas algorithm for J delta = -res.
        cp[0] = upper[0] / diag[0];
        delta[0] = -res[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double denom = diag[i] - lower[i] * cp[i - 1];
            cp[i] = upper[i] / denom;
            delta[i] = (-res[i] - lower[i] * delta[i - 1]) / denom;
        }
        for (std::size_t i = n - 1; i-- > 0;) delta[i] -= cp[i] * delta[i + 1];

        double lam = 1.0;
        double trial_norm = 0.0;
        std::vector<double> trial_res(n);
        for (int damp = 0; damp < 12; ++damp, lam *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = v[i] + lam * delta[i];
            trial_norm = residual(trial, trial_res);
            if (trial_norm <= rnorm || trial_norm < opts.newton_tol) break;
        }
        double step_norm = 0.0;
        double vmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            step_norm = std::max(step_norm, std::abs(trial[i] - v[i]));
            vmax = std::max(vmax, std::abs(trial[i]));
        }
        v.swap(trial);
        res.swap(trial_res);
        rnorm = trial_norm;
        if (!std::isfinite(rnorm)) break;
        if (step_norm <= opts.newton_tol * std::max(1.0, vmax) && rnorm <= opts.newton_tol) return;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "semi-implicit Newton did not converge (residual %.3e after %d iterations)", rnorm,
                  opts.newton_max_iter);
    throw IterationFailure(buf, step);
}

double boundary_mass(const GridDensity& u) { return u.grid.dx() * (u.values.front() + u.values.back()); }

}  // namespace

double stable_dt(const CoefficientModel& m, const GridDensity& u, double t, const SchemeOptions& opts) {
    return rule_dt(rule_bounds(m, u, t), u.grid.dx(), opts);
}

double aligned_dt(double dt_max, double interval) {
    if (!(dt_max > 0) || !(interval > 0)) throw ConfigError("aligned_dt: arguments must be positive");
    const double steps = std::ceil(interval / dt_max - 1e-9);
    return interval / std::max(steps, 1.0);
}

FpkeSolution solve_fpke(const CoefficientModel& m, const GridDensity& u0, double horizon, double dt,
                        const SchemeOptions& opts) {
    if (!std::isfinite(horizon) || horizon < 0) throw ConfigError("horizon T must be finite and nonnegative");
    if (!std::isfinite(dt) || dt < 0) throw ConfigError("dt must be finite and nonnegative");
    if (u0.min() < kPositivityFloor) throw PreconditionError("initial density has negative values");
    if (opts.require_probability && std::abs(u0.mass() - 1.0) > 1e-8) {
        throw PreconditionError("initial density does not have unit mass");
    }

    FpkeSolution sol;
    sol.grid = u0.grid;
    sol.dt = dt;
    sol.model_id = m.id;
    GridDensity first = u0;
    first.time_stamp = 0.0;
    sol.max_boundary_mass = boundary_mass(first);
    sol.snapshots.push_back(first);
    if (horizon == 0 || dt == 0) return sol;

    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
    if (n_steps == 0 || std::abs(static_cast<double>(n_steps) * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw ConfigError("horizon T must be an integer multiple of dt");
    }

    const Grid1D& g = u0.grid;
    const std::size_t n = g.n_cells;
    std::vector<double> u = u0.values;
    std::vector<double> beta(n), flux(n + 1), rhs(n), next(n);
    const double dx = g.dx();

    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (opts.stepping == TimeStepping::explicit_euler) {
            const double allowed = explicit_step(m, g, t, dt, opts, u, beta, flux, k);
            if (dt > allowed * (1 + 1e-12)) stability_violation(dt, allowed, opts, k);
        } else {
            const double allowed = stable_dt(m, GridDensity(g, u, t), t, opts);
            if (dt > allowed * (1 + 1e-12)) stability_violation(dt, allowed, opts, k);
            advective_flux(m, g, t, u, flux);
            const double lam = dt / dx;
            for (std::size_t i = 0; i < n; ++i) rhs[i] = u[i] - lam * (flux[i + 1] - flux[i]);
            check_state(rhs, k);
            implicit_diffusion(m, g, t + dt, dt, opts, rhs, next, k);
            u.swap(next);
        }
        check_state(u, k);

        const bool last = k + 1 == n_steps;
        const bool keep = opts.snapshot_stride > 0 && (k + 1) % opts.snapshot_stride == 0;
        GridDensity snap(g, u, last ? horizon : static_cast<double>(k + 1) * dt);
        sol.max_boundary_mass = std::max(sol.max_boundary_mass, boundary_mass(snap));
        if (keep || last) sol.snapshots.push_back(std::move(snap));
    }
    return sol;
}

TestFunction smooth_bump(double center, double radius) {
    if (!(radius > 0)) throw ConfigError("smooth_bump: radius must be positive");
    auto core = [=](double x, int order) {
        const double s = (x - center) / radius;
        const double q = 1 - s * s;
        if (q <= 0) return 0.0;
        const double phi = std::exp(-1 / q);
        if (order == 0) return phi;
        const double g1 = -2 * s / (q * q);
        if (order == 1) return phi * g1 / radius;
        const double g2 = -(2 + 6 * s * s) / (q * q * q);
        return phi * (g1 * g1 + g2) / (radius * radius);
    };
    return {[=](double x) { return core(x, 0); }, [=](double x) { return core(x, 1); },
            [=](double x) { return core(x, 2); }, center - radius, center + radius};
}

double weak_residual(const FpkeSolution& sol, const CoefficientModel& m, const TestFunction& phi, double t) {
    const Grid1D& g = sol.grid;
    if (phi.support_lo <= g.x_min || phi.support_hi >= g.x_max) {
        throw PreconditionError("test function support must lie strictly inside the grid");
    }
    std::size_t last = sol.snapshots.size();
    for (std::size_t k = 0; k < sol.snapshots.size(); ++k) {
        if (std::abs(sol.snapshots[k].time_stamp - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
            last = k;
            break;
        }
    }
    if (last == sol.snapshots.size()) throw PreconditionError("weak_residual: t is not a snapshot time");

    const double dx = g.dx();
    std::vector<double> phi0(g.n_cells), phi1(g.n_cells), phi2(g.n_cells);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        const double x = g.center(i);
        phi0[i] = phi.value(x);
        phi1[i] = phi.d1(x);
        phi2[i] = phi.d2(x);
    }
    auto pairing = [&](const GridDensity& u) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) s += phi0[i] * u.values[i];
        return s * dx;
    };
    auto generator = [&](const GridDensity& u) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            if (phi1[i] == 0 && phi2[i] == 0) continue;
            const double x = g.center(i);
            const double r = u.values[i];
            s += (m.eval_b(u.time_stamp, x, r) * phi1[i] + m.eval_a(u.time_stamp, x, r) * phi2[i]) * r;
        }
        return s * dx;
    };

    double integral = 0.0;
    double prev = generator(sol.snapshots[0]);
    for (std::size_t k = 1; k <= last; ++k) {
        const double cur = generator(sol.snapshots[k]);
        integral += 0.5 * (prev + cur) * (sol.snapshots[k].time_stamp - sol.snapshots[k - 1].time_stamp);
        prev = cur;
    }
    return std::abs(pairing(sol.snapshots[last]) - pairing(sol.snapshots[0]) - integral);
}

ContractionResult l1_contraction_check(const CoefficientModel& m, const GridDensity& u0, const GridDensity& u0_bar,
                                       double horizon, double dt, double tol, const SchemeOptions& opts) {
    require_same_grid(u0, u0_bar);
    const FpkeSolution a = solve_fpke(m, u0, horizon, dt, opts);
    const FpkeSolution b = solve_fpke(m, u0_bar, horizon, dt, opts);
    ContractionResult out;
    const double initial = l1_distance(a.snapshots.front(), b.snapshots.front());
    double excess = 0.0;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const double d = l1_distance(a.snapshots[k], b.snapshots[k]);
        out.times.push_back(a.snapshots[k].time_stamp);
        out.distances.push_back(d);
        excess = std::max(excess, d - initial);
    }
    out.report = make_report(Metric::l1, excess, tol, "L1 contraction excess");
    return out;
}

double default_linf_tolerance(const Grid1D& g) { return 1e-6 + 2 * g.dx(); }

MatchReport linf_bound_check(const FpkeSolution& sol, double lambda_hat, double tol) {
    if (sol.snapshots.empty()) throw PreconditionError("empty FPKE solution");
    if (tol < 0) tol = default_linf_tolerance(sol.grid);
    double sup = 0.0;
    for (const auto& s : sol.snapshots) sup = std::max(sup, s.sup());
    const double bound = lambda_hat * sol.horizon() + sol.snapshots.front().sup() + tol;
    return make_report(Metric::linf, sup, bound, "sup_t ||u(t)||_inf vs Lambda T + ||u0||_inf + tol");
}

ConvergenceTable refine_study(const CoefficientModel& m, const ProfileFactory& u0, const Grid1D& base, double horizon,
                              double dt0, int levels, const SchemeOptions& opts) {
    if (levels < 2) throw ConfigError("refine_study: levels must be at least 2");
    SchemeOptions o = opts;
    o.snapshot_stride = 0;
    std::vector<GridDensity> finals;
    for (int l = 0; l < levels; ++l) {
        const auto scale = static_cast<std::size_t>(1) << l;
        const Grid1D g(base.x_min, base.x_max, base.n_cells * scale);
        finals.push_back(solve_fpke(m, u0(g), horizon, dt0 / static_cast<double>(scale), o).snapshots.back());
    }
    ConvergenceTable table;
    std::vector<double> xs, ys;
    for (int l = 0; l + 1 < levels; ++l) {
        GridDensity fine = finals[static_cast<std::size_t>(l + 1)];
        const Grid1D& coarse = finals[static_cast<std::size_t>(l)].grid;
        fine = restrict_to_coarse(fine, coarse);
        const double d = l1_distance(finals[static_cast<std::size_t>(l)], fine);
        const auto scale = static_cast<std::size_t>(1) << l;
        table.rows.push_back({static_cast<std::size_t>(l), coarse.n_cells, dt0 / static_cast<double>(scale), d});
        if (d > 0) {
            xs.push_back(l);
            ys.push_back(std::log2(d));
        }
    }
    if (xs.size() < 2) {
        table.fitted_order = std::numeric_limits<double>::quiet_NaN();
    } else {
        const double n = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        table.fitted_order = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return table;
}

double contraction_tolerance(const CoefficientModel& m, const ProfileFactory& u0, const Grid1D& grid, double horizon,
                             double dt, const SchemeOptions& opts) {
    if (grid.n_cells % 2 != 0) throw ConfigError("contraction_tolerance: n_cells must be even");
    const Grid1D coarse(grid.x_min, grid.x_max, grid.n_cells / 2);
    const ConvergenceTable t = refine_study(m, u0, coarse, horizon, 2 * dt, 2, opts);
    return std::max(1e-3, 5 * t.rows.front().self_distance);
}

double discrete_h1_norm_beta(const CoefficientModel& m, const GridDensity& u) {
    const Grid1D& g = u.grid;
    const double dx = g.dx();
    std::vector<double> beta(g.n_cells);
    for (std::size_t i = 0; i < g.n_cells; ++i) beta[i] = eval_beta(m, 0.0, g.center(i), u.values[i]);
    double l2 = 0.0;
    double grad = 0.0;
    for (std::size_t i = 0; i < g.n_cells; ++i) {
        l2 += beta[i] * beta[i];
        if (i + 1 < g.n_cells) {
            const double d = (beta[i + 1] - beta[i]) / dx;
            grad += d * d;
        }
    }
    return std::sqrt(dx * (l2 + grad));
}

InitialRegularityReport initial_regularity(const CoefficientModel& m, const GridDensity& coarse,
                                           const GridDensity& fine) {
    InitialRegularityReport rep;
    rep.coarse_norm = discrete_h1_norm_beta(m, coarse);
    rep.fine_norm = discrete_h1_norm_beta(m, fine);
    rep.growth = rep.coarse_norm > 0 ? rep.fine_norm / rep.coarse_norm : 1.0;
    rep.flagged = rep.growth > 1.2;
    return rep;
}

}  // namespace nemfp
