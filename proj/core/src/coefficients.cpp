#include "nemfp/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nemfp/errors.hpp"

namespace nemfp {

namespace {

double checked(double v, const char* what, double t, double x, double r) {
    if (!std::isfinite(v)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "non-finite %s at (t=%.6g, x=%.6g, r=%.6g)", what, t, x, r);
        throw ModelEvaluationError(buf);
    }
    return v;
}

double fd_scale(double step, double coord) { return step * std::max(1.0, std::abs(coord)); }

std::string fmt_param(const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.17g", key, v);
    return buf;
}

}  // namespace

std::string_view to_string(Family f) {
    switch (f) {
        case Family::constant: return "constant";
        case Family::porous_regularized: return "porous-regularized";
        case Family::burgers_gauss: return "burgers-gauss";
        case Family::decaying: return "decaying";
        case Family::user: return "user";
    }
    return "user";
}

double Envelope::operator()(double x) const {
    if (kind == Kind::constant) return scale;
    const double s = x / length;
    return scale * std::exp(-s * s);
}

double CoefficientModel::eval_a(double t, double x, double r) const {
    return checked(a(t, x, r), "a", t, x, r);
}

double CoefficientModel::eval_b(double t, double x, double r) const {
    return checked(b(t, x, r), "b", t, x, r);
}

double CoefficientModel::eval_da_dr(double t, double x, double r, std::optional<double> step) const {
    if (da_dr && !step) return checked(da_dr(t, x, r), "da/dr", t, x, r);
    const double h = fd_scale(step.value_or(fd_step), r);
    return checked((a(t, x, r + h) - a(t, x, r - h)) / (2 * h), "da/dr", t, x, r);
}

double CoefficientModel::eval_db_dr(double t, double x, double r, std::optional<double> step) const {
    if (db_dr && !step) return checked(db_dr(t, x, r), "db/dr", t, x, r);
    const double h = fd_scale(step.value_or(fd_step), r);
    return checked((b(t, x, r + h) - b(t, x, r - h)) / (2 * h), "db/dr", t, x, r);
}

double CoefficientModel::eval_da_dx(double t, double x, double r, std::optional<double> step) const {
    if (da_dx && !step) return checked(da_dx(t, x, r), "da/dx", t, x, r);
    const double h = fd_scale(step.value_or(fd_step), x);
    return checked((a(t, x + h, r) - a(t, x - h, r)) / (2 * h), "da/dx", t, x, r);
}

double CoefficientModel::eval_db_dx(double t, double x, double r, std::optional<double> step) const {
    if (db_dx && !step) return checked(db_dx(t, x, r), "db/dx", t, x, r);
    const double h = fd_scale(step.value_or(fd_step), x);
    return checked((b(t, x + h, r) - b(t, x - h, r)) / (2 * h), "db/dx", t, x, r);
}

double CoefficientModel::eval_da_dt(double t, double x, double r, std::optional<double> step) const {
    const double h = fd_scale(step.value_or(fd_step), t);
    return checked((a(t + h, x, r) - a(t - h, x, r)) / (2 * h), "da/dt", t, x, r);
}

double CoefficientModel::eval_d2a_dx2(double t, double x, double r) const {
    const double h = fd_scale(1e-4, x);
    if (da_dx) {
        return checked((da_dx(t, x + h, r) - da_dx(t, x - h, r)) / (2 * h), "d2a/dx2", t, x, r);
    }
    return checked((a(t, x + h, r) - 2 * a(t, x, r) + a(t, x - h, r)) / (h * h), "d2a/dx2", t, x, r);
}

double eval_beta(const CoefficientModel& m, double t, double x, double r) { return m.eval_a(t, x, r) * r; }

double eval_bstar(const CoefficientModel& m, double t, double x, double r) { return m.eval_b(t, x, r) * r; }

double eval_dbeta_dr(const CoefficientModel& m, double t, double x, double r) {
    return m.eval_a(t, x, r) + r * m.eval_da_dr(t, x, r);
}

double eval_dbstar_dr(const CoefficientModel& m, double t, double x, double r) {
    return m.eval_b(t, x, r) + r * m.eval_db_dr(t, x, r);
}

CoefficientModel make_model(const DiffusionSpec& diffusion, const DriftSpec& drift, double gamma0, Envelope h) {
    if (!(gamma0 > 0) || !std::isfinite(gamma0)) throw ConfigError("gamma0 must be positive and finite");
    CoefficientModel m;
    m.gamma0 = gamma0;
    m.h = h;
    m.diffusion_family = diffusion.kind;
    m.drift_family = drift.kind;
    m.params["gamma0"] = gamma0;
    m.params["h.scale"] = h.scale;
    m.params["h.length"] = h.length;

    std::string id;
    const double alpha = diffusion.alpha;
    switch (diffusion.kind) {
        case Family::constant:
            m.a = [alpha](double, double, double) { return alpha; };
            m.da_dr = [](double, double, double) { return 0.0; };
            m.da_dx = [](double, double, double) { return 0.0; };
            m.params["alpha"] = alpha;
            id = "constant(" + fmt_param("alpha", alpha) + ")";
            break;
        case Family::porous_regularized: {
            const double kappa = diffusion.kappa;
            const bool loc = diffusion.localized;
            m.a = [=](double t, double x, double r) {
                const double g = loc ? std::exp(-x * x) : 1.0;
                const double r2 = r * r;
                return gamma0 + alpha * (1 + kappa * std::sin(t)) * g * r2 / (1 + r2);
            };
            m.da_dr = [=](double t, double x, double r) {
                const double g = loc ? std::exp(-x * x) : 1.0;
                const double q = 1 + r * r;
                return alpha * (1 + kappa * std::sin(t)) * g * 2 * r / (q * q);
            };
            m.da_dx = [=](double t, double x, double r) {
                if (!loc) return 0.0;
                const double r2 = r * r;
                return alpha * (1 + kappa * std::sin(t)) * (-2 * x * std::exp(-x * x)) * r2 / (1 + r2);
            };
            m.params["alpha"] = alpha;
            m.params["kappa"] = kappa;
            m.params["localized"] = loc ? 1.0 : 0.0;
            id = "porous-regularized(" + fmt_param("alpha", alpha) + "," + fmt_param("kappa", kappa) + "," +
                 fmt_param("localized", loc ? 1.0 : 0.0) + ")";
            break;
        }
        case Family::decaying:
            m.a = [alpha](double, double, double r) { return alpha / (1 + r * r); };
            m.da_dr = [alpha](double, double, double r) {
                const double q = 1 + r * r;
                return -2 * alpha * r / (q * q);
            };
            m.da_dx = [](double, double, double) { return 0.0; };
            m.params["alpha"] = alpha;
            id = "decaying(" + fmt_param("alpha", alpha) + ")";
            break;
        default:
            throw ConfigError("unsupported diffusion family '" + std::string(to_string(diffusion.kind)) + "'");
    }

    const double c = drift.c;
    switch (drift.kind) {
        case Family::constant:
            m.b = [c](double, double, double) { return c; };
            m.db_dr = [](double, double, double) { return 0.0; };
            m.db_dx = [](double, double, double) { return 0.0; };
            id += "+constant(" + fmt_param("c", c) + ")";
            break;
        case Family::burgers_gauss:
            m.b = [c](double, double x, double r) { return c * std::exp(-x * x) / (1 + r * r); };
            m.db_dr = [c](double, double x, double r) {
                const double q = 1 + r * r;
                return -2 * c * std::exp(-x * x) * r / (q * q);
            };
            m.db_dx = [c](double, double x, double r) { return -2 * x * c * std::exp(-x * x) / (1 + r * r); };
            id += "+burgers-gauss(" + fmt_param("c", c) + ")";
            break;
        default:
            throw ConfigError("unsupported drift family '" + std::string(to_string(drift.kind)) + "'");
    }
    m.params["c"] = c;
    id += ";" + fmt_param("gamma0", gamma0);
    m.id = std::move(id);
    return m;
}

CoefficientModel constant_model(double alpha, double c, double gamma0) {
    Envelope h{Envelope::Kind::constant, std::max(std::abs(c), 1.0), 1.0};
    return make_model({Family::constant, alpha, 0.0, false}, {Family::constant, c}, gamma0 > 0 ? gamma0 : alpha,
                      h);
}

// ---- lattice ----------------------------------------------------------------

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

void HypothesisGrid::validate() const {
    auto increasing = [](const std::vector<double>& s, const char* name) {
        if (s.empty()) throw ConfigError(std::string("hypothesis grid: ") + name + " is empty");
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (!(s[i] > s[i - 1])) {
                throw ConfigError(std::string("hypothesis grid: ") + name + " is not strictly increasing");
            }
        }
    };
    increasing(t_samples, "t_samples");
    increasing(x_samples, "x_samples");
    increasing(r_samples, "r_samples");
    if (pair_stride == 0) throw ConfigError("hypothesis grid: pair_stride must be positive");
    const bool has_zero = std::find(r_samples.begin(), r_samples.end(), 0.0) != r_samples.end();
    if (!has_zero || r_samples.front() >= 0 || r_samples.back() <= 0) {
        throw ConfigError("hypothesis grid: r_samples must contain 0 and values of both signs");
    }
}

HypothesisGrid default_lattice(const CoefficientModel& m, double x_min, double x_max, double horizon,
                               double u0_sup, int rounds) {
    HypothesisGrid g;
    g.t_samples = horizon > 0 ? linspace(0.0, horizon, 5) : std::vector<double>{0.0};
    g.x_samples = linspace(x_min, x_max, 65);
    double radius = std::max(2.0 * u0_sup, 1.0);
    for (int round = 0; round < rounds; ++round) {
        g.r_samples = linspace(-radius, radius, 65);
        g.r_samples[32] = 0.0;
        const double lambda = estimate_lambda(m, g).estimated_constant;
        const double next = std::max(2.0 * (lambda * horizon + u0_sup), 1.0);
        if (std::abs(next - radius) <= 1e-6 * radius) break;
        radius = next;
    }
    g.r_samples = linspace(-radius, radius, 65);
    g.r_samples[32] = 0.0;
    return g;
}

// ---- checks -----------------------------------------------------------------

std::string_view to_string(ConditionId id) {
    switch (id) {
        case ConditionId::h1_monotone: return "H1-monotone";
        case ConditionId::h1_nondegenerate: return "H1-nondegenerate";
        case ConditionId::h1_envelope: return "H1-envelope";
        case ConditionId::h2_bound: return "H2-bound";
        case ConditionId::h2_envelope: return "H2-envelope";
        case ConditionId::h3_lipschitz: return "H3-lipschitz";
        case ConditionId::lambda_finite: return "lambda-finite";
    }
    return "?";
}

namespace {

// Tracks the smallest margin (lhs - rhs <= 0 is bad when reversed) seen so far.
struct WorstTracker {
    double worst = std::numeric_limits<double>::infinity();
    std::optional<Witness> where;

    void offer(double margin, const Witness& w) {
        if (margin < worst) {
            worst = margin;
            where = w;
        }
    }
};

template <class Fn>
void for_each_pair(const HypothesisGrid& g, Fn&& fn) {
    const std::size_t n = g.r_samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + g.pair_stride; j < n; j += g.pair_stride) fn(i, j);
    }
}

std::size_t pair_count(const HypothesisGrid& g) {
    std::size_t count = 0;
    for_each_pair(g, [&](std::size_t, std::size_t) { ++count; });
    return count;
}

}  // namespace

ConditionReport check_monotonicity(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    if (pair_count(g) == 0) throw ConfigError("monotonicity check: empty (r, r_bar) pair set");
    ConditionReport rep{ConditionId::h1_monotone, true, std::numeric_limits<double>::infinity(), {}};
    WorstTracker worst;
    std::vector<double> beta(g.r_samples.size());
    for (double t : g.t_samples) {
        for (double x : g.x_samples) {
            for (std::size_t k = 0; k < beta.size(); ++k) beta[k] = eval_beta(m, t, x, g.r_samples[k]);
            for_each_pair(g, [&](std::size_t i, std::size_t j) {
                const double dr = g.r_samples[j] - g.r_samples[i];
                const double prod = (beta[j] - beta[i]) * dr;
                const double quotient = prod / (dr * dr);
                rep.estimated_constant = std::min(rep.estimated_constant, quotient);
                const double margin = prod - m.gamma0 * dr * dr;
                if (margin < -kMonotoneTol) rep.passed = false;
                worst.offer(quotient, {t, x, g.r_samples[j], g.r_samples[i]});
            });
        }
    }
    rep.witness = worst.where;
    return rep;
}

ConditionReport check_nondegenerate(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    ConditionReport rep{ConditionId::h1_nondegenerate, true, std::numeric_limits<double>::infinity(), {}};
    WorstTracker worst;
    for (double t : g.t_samples) {
        for (double x : g.x_samples) {
            for (double r : g.r_samples) {
                const double a = m.eval_a(t, x, r);
                rep.estimated_constant = std::min(rep.estimated_constant, a);
                if (a < m.gamma0 - kMonotoneTol) rep.passed = false;
                worst.offer(a, {t, x, r, r});
            }
        }
    }
    rep.witness = worst.where;
    return rep;
}

ConditionReport check_beta_envelope(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    ConditionReport rep{ConditionId::h1_envelope, true, 0.0, {}};
    WorstTracker worst;
    auto record = [&](double lhs, double rhs, const Witness& w) {
        if (rhs > 0) rep.estimated_constant = std::max(rep.estimated_constant, lhs / rhs);
        if (lhs > rhs + kLipschitzTol) rep.passed = false;
        worst.offer(rhs - lhs, w);
    };
    for (std::size_t k = 0; k < g.t_samples.size(); ++k) {
        const double t = g.t_samples[k];
        for (double x : g.x_samples) {
            const double hx = m.h(x);
            for (double r : g.r_samples) {
                // |d_t beta| + |d_x beta| <= h |r|
                const double dt_beta = r * m.eval_da_dt(t, x, r);
                const double dx_beta = r * m.eval_da_dx(t, x, r);
                record(std::abs(dt_beta) + std::abs(dx_beta), hx * std::abs(r), {t, x, r, r});
                if (k + 1 == g.t_samples.size()) continue;
                const double s = g.t_samples[k + 1];
                const double dts = s - t;
                // |d_r beta(t) - d_r beta(s)| <= h |t-s| d_r beta (both orderings)
                const double drb_t = eval_dbeta_dr(m, t, x, r);
                const double drb_s = eval_dbeta_dr(m, s, x, r);
                record(std::abs(drb_t - drb_s), hx * dts * std::min(drb_t, drb_s), {t, x, r, r});
                // |beta(t) - beta(s)| + |d_x beta(t) - d_x beta(s)| <= h |t-s| (1 + |r|)
                const double lhs = std::abs(eval_beta(m, t, x, r) - eval_beta(m, s, x, r)) +
                                   std::abs(dx_beta - r * m.eval_da_dx(s, x, r));
                record(lhs, hx * dts * (1 + std::abs(r)), {t, x, r, r});
            }
        }
    }
    if (!rep.passed) rep.witness = worst.where;
    return rep;
}

ConditionReport check_drift_bound(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    ConditionReport rep{ConditionId::h2_bound, true, 0.0, {}};
    WorstTracker worst;
    double sup_b = 0.0;
    double sup_rdb = 0.0;
    for (double t : g.t_samples) {
        for (double x : g.x_samples) {
            const double hx = m.h(x);
            for (double r : g.r_samples) {
                sup_b = std::max(sup_b, std::abs(m.eval_b(t, x, r)));
                sup_rdb = std::max(sup_rdb, std::abs(r * m.eval_db_dr(t, x, r)));
                const double bstar = std::abs(eval_bstar(m, t, x, r));
                const double rhs = hx * std::abs(r);
                if (bstar > rhs + kLipschitzTol) rep.passed = false;
                worst.offer(rhs - bstar, {t, x, r, r});
            }
        }
    }
    rep.estimated_constant = sup_b + sup_rdb;
    if (!rep.passed) rep.witness = worst.where;
    return rep;
}

ConditionReport check_drift_envelope(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    ConditionReport rep{ConditionId::h2_envelope, true, 0.0, {}};
    WorstTracker worst;
    for (std::size_t k = 0; k + 1 < g.t_samples.size(); ++k) {
        const double t = g.t_samples[k];
        const double s = g.t_samples[k + 1];
        for (double x : g.x_samples) {
            const double hx = m.h(x);
            for (double r : g.r_samples) {
                const double bt = eval_bstar(m, t, x, r);
                const double bs = eval_bstar(m, s, x, r);
                const double lhs = std::abs(bt - bs);
                const double rhs = hx * (s - t) * (1 + std::min(std::abs(bt), std::abs(bs)));
                if (rhs > 0) rep.estimated_constant = std::max(rep.estimated_constant, lhs / rhs);
                if (lhs > rhs + kLipschitzTol) rep.passed = false;
                worst.offer(rhs - lhs, {t, x, r, r});
            }
        }
    }
    if (!rep.passed) rep.witness = worst.where;
    return rep;
}

ConditionReport check_lipschitz_bstar(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    if (pair_count(g) == 0) throw ConfigError("lipschitz check: empty (r, r_bar) pair set");
    ConditionReport rep{ConditionId::h3_lipschitz, true, 0.0, {}};
    WorstTracker worst;
    std::vector<double> bstar(g.r_samples.size());
    for (double t : g.t_samples) {
        for (double x : g.x_samples) {
            const double hx = m.h(x);
            for (std::size_t k = 0; k < bstar.size(); ++k) bstar[k] = eval_bstar(m, t, x, g.r_samples[k]);
            for_each_pair(g, [&](std::size_t i, std::size_t j) {
                const double dr = std::abs(g.r_samples[j] - g.r_samples[i]);
                const double lhs = std::abs(bstar[j] - bstar[i]);
                const double rhs = hx * dr;
                if (rhs > 0) rep.estimated_constant = std::max(rep.estimated_constant, lhs / rhs);
                if (lhs > rhs + kLipschitzTol) rep.passed = false;
                worst.offer(rhs - lhs, {t, x, g.r_samples[j], g.r_samples[i]});
            });
        }
    }
    if (!rep.passed) rep.witness = worst.where;
    return rep;
}

ConditionReport estimate_lambda(const CoefficientModel& m, const HypothesisGrid& g) {
    g.validate();
    ConditionReport rep{ConditionId::lambda_finite, true, 0.0, {}};
    WorstTracker worst;
    for (double t : g.t_samples) {
        for (double x : g.x_samples) {
            for (double r : g.r_samples) {
                const double v = std::abs(m.eval_db_dx(t, x, r) * r) + std::abs(r * m.eval_d2a_dx2(t, x, r));
                if (v > rep.estimated_constant) {
                    rep.estimated_constant = v;
                    worst.offer(-v, {t, x, r, r});
                }
            }
        }
    }
    rep.passed = std::isfinite(rep.estimated_constant);
    rep.witness = worst.where;
    return rep;
}

std::vector<ConditionReport> audit_all(const CoefficientModel& m, const HypothesisGrid& g) {
    return {
        check_monotonicity(m, g),    check_nondegenerate(m, g),   check_beta_envelope(m, g),
        check_drift_bound(m, g),     check_drift_envelope(m, g),  check_lipschitz_bstar(m, g),
        estimate_lambda(m, g),
    };
}

EnvelopeNorms envelope_norms(const Envelope& h, double x_min, double x_max, std::size_t n) {
    EnvelopeNorms out;
    const double dx = (x_max - x_min) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = h(x_min + (static_cast<double>(i) + 0.5) * dx);
        out.sup = std::max(out.sup, v);
        out.l2_squared += v * v * dx;
    }
    return out;
}

}  // namespace nemfp
