#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nemfp {

// Nemytskii coefficient evaluated at (time, position, density value).
using ScalarField = std::function<double(double t, double x, double r)>;

enum class Family { constant, porous_regularized, burgers_gauss, decaying, user };

std::string_view to_string(Family f);

// Envelope h(x) >= 0 used by the Lipschitz and growth hypotheses.
struct Envelope {
    enum class Kind { gauss, constant };

    Kind kind = Kind::gauss;
    double scale = 1.0;   // C_h
    double length = 1.0;  // h(x) = C_h exp(-(x/length)^2) for gauss

    double operator()(double x) const;
};

// Evaluable pair (b, a) plus declared constants. Derivative slots are
// optional; empty slots fall back to central differences with a step of
// fd_step relative to the coordinate scale.
struct CoefficientModel {
    std::string id;
    Family diffusion_family = Family::user;
    Family drift_family = Family::user;
    std::map<std::string, double> params;

    ScalarField a;
    ScalarField b;
    ScalarField da_dr;
    ScalarField db_dr;
    ScalarField da_dx;
    ScalarField db_dx;

    double gamma0 = 1.0;
    Envelope h;
    double fd_step = 1e-5;

    double eval_a(double t, double x, double r) const;
    double eval_b(double t, double x, double r) const;

    // Partial derivatives: analytic slot when present, central difference
    // otherwise. `step` overrides fd_step for the fallback.
    double eval_da_dr(double t, double x, double r, std::optional<double> step = {}) const;
    double eval_db_dr(double t, double x, double r, std::optional<double> step = {}) const;
    double eval_da_dx(double t, double x, double r, std::optional<double> step = {}) const;
    double eval_db_dx(double t, double x, double r, std::optional<double> step = {}) const;
    double eval_da_dt(double t, double x, double r, std::optional<double> step = {}) const;
    // Second x-derivative of a; differences eval_da_dx over a 1e-4 scale step.
    double eval_d2a_dx2(double t, double x, double r) const;

    bool has_analytic_derivatives() const { return da_dr && db_dr && da_dx && db_dx; }
};

// beta(t,x,r) = a(t,x,r) r.
double eval_beta(const CoefficientModel& m, double t, double x, double r);
// b*(t,x,r) = b(t,x,r) r.
double eval_bstar(const CoefficientModel& m, double t, double x, double r);
// d beta / dr = a + r da/dr.
double eval_dbeta_dr(const CoefficientModel& m, double t, double x, double r);
// d b* / dr = b + r db/dr.
double eval_dbstar_dr(const CoefficientModel& m, double t, double x, double r);

// ---- built-in families ------------------------------------------------------

struct DiffusionSpec {
    Family kind = Family::constant;  // constant | porous_regularized | decaying
    double alpha = 1.0;
    double kappa = 0.0;     // porous: time modulation 1 + kappa sin t
    bool localized = true;  // porous: spatial factor exp(-x^2), else 1
};

struct DriftSpec {
    Family kind = Family::constant;  // constant | burgers_gauss
    double c = 0.0;
};

// constant:            a = alpha
// porous_regularized:  a = gamma0 + alpha (1 + kappa sin t) g(x) r^2/(1+r^2)
// decaying:            a = alpha / (1 + r^2)   (beta not monotone for |r|>1)
// constant drift:      b = c
// burgers_gauss drift: b = c exp(-x^2) / (1 + r^2)
CoefficientModel make_model(const DiffusionSpec& diffusion, const DriftSpec& drift, double gamma0,
                            Envelope h);

CoefficientModel constant_model(double alpha, double c, double gamma0 = -1.0);

// ---- hypothesis audit -------------------------------------------------------

struct HypothesisGrid {
    std::vector<double> t_samples;
    std::vector<double> x_samples;
    std::vector<double> r_samples;
    std::size_t pair_stride = 1;

    // Throws ConfigError when an invariant fails.
    void validate() const;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);

// t in {0, T/4, ..., T}, 65 x-points over [x_min, x_max], 65 r-points over
// [-R, R] with R = 2 (Lambda T + u0_sup). Lambda is first estimated on
// [-max(2 u0_sup, 1), max(2 u0_sup, 1)]; each extra round re-estimates it on
// the widened range. One round is the default because Lambda grows without
// bound in r for families whose beta depends on x (e.g. localized porous).
HypothesisGrid default_lattice(const CoefficientModel& m, double x_min, double x_max, double horizon,
                               double u0_sup, int rounds = 1);

enum class ConditionId {
    h1_monotone,
    h1_nondegenerate,
    h1_envelope,
    h2_bound,
    h2_envelope,
    h3_lipschitz,
    lambda_finite,
};

std::string_view to_string(ConditionId id);

struct Witness {
    double t = 0.0;
    double x = 0.0;
    double r = 0.0;
    double r_bar = 0.0;
};

struct ConditionReport {
    ConditionId id{};
    bool passed = false;
    double estimated_constant = 0.0;
    std::optional<Witness> witness;
};

inline constexpr double kMonotoneTol = 1e-9;
inline constexpr double kLipschitzTol = 1e-9;

ConditionReport check_monotonicity(const CoefficientModel& m, const HypothesisGrid& g);
ConditionReport check_nondegenerate(const CoefficientModel& m, const HypothesisGrid& g);
ConditionReport check_beta_envelope(const CoefficientModel& m, const HypothesisGrid& g);
ConditionReport check_drift_bound(const CoefficientModel& m, const HypothesisGrid& g);
ConditionReport check_drift_envelope(const CoefficientModel& m, const HypothesisGrid& g);
ConditionReport check_lipschitz_bstar(const CoefficientModel& m, const HypothesisGrid& g);
ConditionReport estimate_lambda(const CoefficientModel& m, const HypothesisGrid& g);

// One report per ConditionId, in enum order.
std::vector<ConditionReport> audit_all(const CoefficientModel& m, const HypothesisGrid& g);

// Midpoint quadrature of h and h^2 over [x_min, x_max].
struct EnvelopeNorms {
    double sup = 0.0;
    double l2_squared = 0.0;
};
EnvelopeNorms envelope_norms(const Envelope& h, double x_min, double x_max, std::size_t n = 4096);

}  // namespace nemfp
