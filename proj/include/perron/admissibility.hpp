#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "perron/bounds.hpp"
#include "perron/envelopes.hpp"
#include "perron/quadrature.hpp"

namespace perron {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Asymptotic exponents of integrands: log g(r) ~ exp_c * r + log_c * log(1+r)
// + rho_c * rho(r) (+ log rho'(r) when rho_deriv). Drives divergence verdicts
// and analytic tail bounds for the built-in family/envelope pairs.
// ---------------------------------------------------------------------------

struct AsymExponents {
    double exp_c = 0.0;
    double log_c = 0.0;
    double rho_c = 0.0;
    bool rho_deriv = false;
    std::optional<Rho> rho;
    bool known = true;
};

namespace detail {

inline bool rho_equal(const Rho& x, const Rho& y) {
    if (x.kind != y.kind) return false;
    if (x.kind == Rho::Kind::PowerShift) return x.p == y.p;
    return x.kind != Rho::Kind::Custom;
}

inline void combine(AsymExponents& acc, const AsymExponents& add) {
    if (!add.known) acc.known = false;
    acc.exp_c += add.exp_c;
    acc.log_c += add.log_c;
    if (add.rho_c != 0.0 || add.rho_deriv) {
        if (acc.rho && add.rho && !rho_equal(*acc.rho, *add.rho)) {
            acc.known = false;
            return;
        }
        if (!acc.rho) acc.rho = add.rho;
        acc.rho_c += add.rho_c;
        acc.rho_deriv = acc.rho_deriv || add.rho_deriv;
    }
}

inline AsymExponents factor_exponents(const ScalarFactor& f, double sign) {
    AsymExponents e;
    switch (f.kind) {
    case ScalarFactor::Kind::Constant: break;
    case ScalarFactor::Kind::ExpRate: e.exp_c = sign * f.lambda; break;
    case ScalarFactor::Kind::Power1p: e.log_c = sign * f.p; break;
    case ScalarFactor::Kind::ExpRho:
        e.rho_c = sign * f.lambda;
        e.rho = f.rho;
        break;
    case ScalarFactor::Kind::Custom: e.known = false; break;
    }
    return e;
}

inline AsymExponents growth_exponents(const GrowthRate& g, double expo) {
    AsymExponents e;
    if (g.kind == GrowthRate::Kind::Power1p)
        e.log_c = expo * g.param;
    else
        e.exp_c = expo * g.param;
    return e;
}

inline AsymExponents radius_exponents(const RadiusFunction& R, double power) {
    AsymExponents e;
    if (const auto* c = R.get_if<RadiusFunction::Constant>()) {
        (void)c;
    } else if (const auto* x = R.get_if<RadiusFunction::Exp>()) {
        e.exp_c = -power * x->beta;
    } else if (const auto* p = R.get_if<RadiusFunction::Poly>()) {
        e.log_c = -power * p->beta;
    } else if (const auto* m = R.get_if<RadiusFunction::MuPower>()) {
        combine(e, growth_exponents(m->mu, power * m->a));
    } else if (const auto* f = R.get_if<RadiusFunction::RhoForm>()) {
        // R^q = delta^q * rho'(r) * e^{-q beta rho(r)} when power == q.
        e.rho_c = -power * f->beta;
        e.rho = f->rho;
        e.rho_deriv = (std::abs(power - f->q) < 1e-12);
        if (!e.rho_deriv) e.known = false;
    }
    return e;
}

inline AsymExponents envelope_exponents(const LipschitzEnvelope& lip) {
    AsymExponents e;
    if (const auto* x = lip.get_if<LipschitzEnvelope::ExpDecay>()) {
        e.exp_c = -x->rate;
    } else if (const auto* p = lip.get_if<LipschitzEnvelope::PolyDecay>()) {
        e.log_c = -p->p;
    } else if (const auto* r = lip.get_if<LipschitzEnvelope::RhoDecay>()) {
        e.rho_c = -2.0 * r->eps;
        e.rho = r->rho;
        e.rho_deriv = true;
    } else if (const auto* b = lip.get_if<LipschitzEnvelope::BallPower>()) {
        combine(e, radius_exponents(b->R, b->q));
    } else if (!lip.is_zero()) {
        e.known = false;
    }
    return e;
}

/// Large-r exponents of the normalized alpha integrand
/// a(t,r) a(r,s) / a(t,s) (for product-form bounds this is the factor c).
inline AsymExponents alpha_kernel_exponents(const BoundFamily& bounds) {
    AsymExponents e;
    if (const auto* p = bounds.get_if<ProductBounds>()) {
        e = factor_exponents(p->fc, 1.0);
    } else if (const auto* x = bounds.get_if<ExponentialBounds>()) {
        e.exp_c = x->eps;
    } else if (const auto* x = bounds.get_if<PolynomialBounds>()) {
        e.log_c = x->eps;
    } else if (const auto* x = bounds.get_if<RhoBounds>()) {
        e.rho_c = x->eps;
        e.rho = x->rho;
    } else if (const auto* x = bounds.get_if<MuNuBounds>()) {
        combine(e, growth_exponents(x->nu, x->eps));
    } else if (const auto* x = bounds.get_if<MixedPolyShiftBounds>()) {
        e.log_c = x->a + x->eps;
    } else if (const auto* x = bounds.get_if<ExpPolyBBounds>()) {
        e.exp_c = x->eps;
    } else if (bounds.get_if<ConstantABounds>()) {
        // ratio is identically L
    } else {
        e.known = false;
    }
    return e;
}

/// Large-r exponents of a(r,s) b(r,s) for fixed s (the beta kernel).
inline AsymExponents beta_kernel_exponents(const BoundFamily& bounds) {
    AsymExponents e;
    if (const auto* p = bounds.get_if<ProductBounds>()) {
        combine(e, factor_exponents(p->fa, -1.0));
        combine(e, factor_exponents(p->fb, -1.0));
        combine(e, factor_exponents(p->fd, 1.0));
    } else if (const auto* x = bounds.get_if<ExponentialBounds>()) {
        e.exp_c = x->a - x->b + x->eps;
    } else if (const auto* x = bounds.get_if<PolynomialBounds>()) {
        e.log_c = x->a - x->b + x->eps;
    } else if (const auto* x = bounds.get_if<RhoBounds>()) {
        e.rho_c = x->a - x->b + x->eps;
        e.rho = x->rho;
    } else if (const auto* x = bounds.get_if<MuNuBounds>()) {
        combine(e, growth_exponents(x->mu, x->a - x->b));
        combine(e, growth_exponents(x->nu, x->eps));
    } else if (const auto* x = bounds.get_if<MixedPolyShiftBounds>()) {
        e.log_c = x->a - x->b + x->eps;
    } else if (const auto* x = bounds.get_if<ExpPolyBBounds>()) {
        e.exp_c = x->a;
        e.log_c = -x->b + x->eps;
    } else if (const auto* x = bounds.get_if<ConstantABounds>()) {
        e.exp_c = x->a + x->eps;
    } else {
        e.known = false;
    }
    return e;
}

/// Integrability verdict from exponents: +1 convergent, -1 divergent.
inline int exponents_verdict(const AsymExponents& e) {
    if (!e.known) return 0;
    if (e.exp_c > 0.0) return -1;
    if (e.exp_c < 0.0) return +1;
    if (e.rho_c > 0.0) return -1;
    if (e.rho_c < 0.0) return +1; // rho -> infinity for the built-in kinds
    if (e.rho_deriv) {
        // integrand ~ rho'(r) (1+r)^m; for PowerShift rho' ~ p (1+r)^{p-1}
        double m = e.log_c + (e.rho && e.rho->kind == Rho::Kind::PowerShift ? e.rho->p - 1.0
                                                                            : 0.0);
        return m < -1.0 ? +1 : -1;
    }
    return e.log_c < -1.0 ? +1 : -1;
}

/// Tail model for integrate_improper built from exponents; g is the
/// integrand (used to anchor the bound at the horizon).
template <typename F>
TailModel tail_model_from_exponents(const AsymExponents& e, F g) {
    TailModel tm;
    tm.verdict = exponents_verdict(e);
    if (tm.verdict <= 0) return tm;

    if (e.exp_c < 0.0) {
        const double lambda = -e.exp_c;
        const double m = e.log_c; // rho parts, if any, only help decay
        tm.bound = [g, lambda, m](double T) {
            const double gT = g(T);
            if (gT <= 0.0) return 0.0;
            if (m <= 0.0) return gT / lambda;
            const double denom = 1.0 - m / (lambda * (1.0 + T));
            return denom > 0.2 ? gT / (lambda * denom) : kInf;
        };
    } else if (e.rho_c < 0.0 && e.rho_deriv && e.log_c <= 0.0 && e.rho) {
        const double lambda = -e.rho_c;
        const Rho rho = *e.rho;
        tm.bound = [g, lambda, rho](double T) {
            const double gT = g(T);
            const double dp = rho.deriv(T);
            return (gT <= 0.0 || dp <= 0.0) ? 0.0 : gT / (dp * lambda);
        };
    } else if (e.exp_c == 0.0 && e.rho_c == 0.0 && !e.rho_deriv && e.log_c < -1.0) {
        const double m = e.log_c;
        tm.bound = [g, m](double T) {
            const double gT = g(T);
            return gT <= 0.0 ? 0.0 : gT * (1.0 + T) / (-m - 1.0);
        };
    }
    // Other convergent combinations fall back to the empirical estimate
    // (verdict still protects against a false divergence call).
    return tm;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct ScalarResult {
    double value = 0.0;
    double error = 0.0;     // heuristic absolute error estimate
    bool finite = true;
    bool closed_form = false;
    bool converged = true;  // horizon reached the tail tolerance
    std::string note;
};

struct GateResult {
    bool pass = false;
    double margin = 0.0;
};

/// Global gate 2 alpha + max{2 beta, sqrt(beta)} < 1.
inline GateResult check_global_gate(double alpha, double beta) {
    if (alpha < 0 || beta < 0) throw DomainError("gate: alpha, beta must be nonnegative");
    const double margin = 1.0 - (2.0 * alpha + std::max(2.0 * beta, std::sqrt(beta)));
    return {margin > 0.0, margin};
}

/// Local gate 4 alpha + max{4 beta, sqrt(2 beta)} < 1.
inline GateResult check_local_gate(double alpha, double beta) {
    if (alpha < 0 || beta < 0) throw DomainError("gate: alpha, beta must be nonnegative");
    const double margin = 1.0 - (4.0 * alpha + std::max(4.0 * beta, std::sqrt(2.0 * beta)));
    return {margin > 0.0, margin};
}

enum class TriState { Pass, Fail, Inconclusive };

inline const char* to_string(TriState t) {
    switch (t) {
    case TriState::Pass: return "pass";
    case TriState::Fail: return "fail";
    case TriState::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

// ---------------------------------------------------------------------------
// Normalized simple envelopes (closed-form matching)
// ---------------------------------------------------------------------------

namespace detail {

struct SimpleEnv {
    enum class Kind { Exp, Poly, RhoD } kind;
    double delta;   // prefactor
    double rate;    // Exp: rate; Poly: power p; RhoD: coefficient of rho(r)
    std::optional<Rho> rho;
};

/// Reduces built-in envelopes (including ball-power ones over built-in
/// radii) to delta e^{-rate r}, delta (1+r)^{-p} or delta rho' e^{-c rho}.
inline std::optional<SimpleEnv> normalize_envelope(const LipschitzEnvelope& lip) {
    const double scale = lip.scale();
    if (const auto* e = lip.get_if<LipschitzEnvelope::ExpDecay>())
        return SimpleEnv{SimpleEnv::Kind::Exp, scale * e->delta, e->rate, {}};
    if (const auto* p = lip.get_if<LipschitzEnvelope::PolyDecay>())
        return SimpleEnv{SimpleEnv::Kind::Poly, scale * p->delta, p->p, {}};
    if (const auto* r = lip.get_if<LipschitzEnvelope::RhoDecay>())
        return SimpleEnv{SimpleEnv::Kind::RhoD, scale * r->delta, 2.0 * r->eps, r->rho};
    if (const auto* b = lip.get_if<LipschitzEnvelope::BallPower>()) {
        const double pref = scale * std::pow(2.0, b->q) * b->c;
        if (const auto* c = b->R.get_if<RadiusFunction::Constant>())
            return SimpleEnv{SimpleEnv::Kind::Exp, pref * std::pow(c->rho0, b->q), 0.0, {}};
        if (const auto* x = b->R.get_if<RadiusFunction::Exp>())
            return SimpleEnv{SimpleEnv::Kind::Exp, pref * std::pow(x->delta, b->q),
                             b->q * x->beta, {}};
        if (const auto* p = b->R.get_if<RadiusFunction::Poly>())
            return SimpleEnv{SimpleEnv::Kind::Poly, pref * std::pow(p->delta, b->q),
                             b->q * p->beta, {}};
        if (const auto* m = b->R.get_if<RadiusFunction::MuPower>()) {
            if (m->mu.kind == GrowthRate::Kind::Power1p)
                return SimpleEnv{SimpleEnv::Kind::Poly, pref * std::pow(m->delta, b->q),
                                 -b->q * m->a * m->mu.param, {}};
            return SimpleEnv{SimpleEnv::Kind::Exp, pref * std::pow(m->delta, b->q),
                             -b->q * m->a * m->mu.param, {}};
        }
        if (const auto* f = b->R.get_if<RadiusFunction::RhoForm>()) {
            if (std::abs(f->q - b->q) > 1e-12) return std::nullopt;
            return SimpleEnv{SimpleEnv::Kind::RhoD, pref * std::pow(f->delta, b->q),
                             b->q * f->beta, f->rho};
        }
    }
    return std::nullopt;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Closed forms for the canonical family/envelope pairs
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<ScalarResult> closed_alpha(const BoundFamily& bounds,
                                                const LipschitzEnvelope& lip) {
    const auto env = normalize_envelope(lip);
    if (!env) return std::nullopt;

    auto finite = [](double v) {
        ScalarResult r;
        r.value = v;
        r.closed_form = true;
        return r;
    };
    auto divergent = [] {
        ScalarResult r;
        r.value = kInf;
        r.finite = false;
        r.closed_form = true;
        return r;
    };

    // Only the a-bound enters alpha; exp_polyb shares the exponential one.
    double D, eps;
    if (const auto* x = bounds.get_if<ExponentialBounds>()) {
        D = x->D;
        eps = x->eps;
        if (env->kind != SimpleEnv::Kind::Exp) return std::nullopt;
        return env->rate > eps ? finite(D * env->delta / (env->rate - eps)) : divergent();
    }
    if (const auto* x = bounds.get_if<ExpPolyBBounds>()) {
        D = x->D;
        eps = x->eps;
        if (env->kind != SimpleEnv::Kind::Exp) return std::nullopt;
        return env->rate > eps ? finite(D * env->delta / (env->rate - eps)) : divergent();
    }
    if (const auto* x = bounds.get_if<PolynomialBounds>()) {
        if (env->kind != SimpleEnv::Kind::Poly) return std::nullopt;
        return env->rate > x->eps + 1.0 ? finite(x->D * env->delta / (env->rate - x->eps - 1.0))
                                        : divergent();
    }
    if (const auto* x = bounds.get_if<MuNuBounds>()) {
        if (x->nu.kind == GrowthRate::Kind::Power1p && env->kind == SimpleEnv::Kind::Poly) {
            const double nu_eps = x->eps * x->nu.param;
            return env->rate > nu_eps + 1.0
                       ? finite(x->D * env->delta / (env->rate - nu_eps - 1.0))
                       : divergent();
        }
        if (x->nu.kind == GrowthRate::Kind::ExpRate && env->kind == SimpleEnv::Kind::Exp) {
            const double nu_eps = x->eps * x->nu.param;
            return env->rate > nu_eps ? finite(x->D * env->delta / (env->rate - nu_eps))
                                      : divergent();
        }
        return std::nullopt;
    }
    if (const auto* x = bounds.get_if<RhoBounds>()) {
        if (env->kind != SimpleEnv::Kind::RhoD || !env->rho || !rho_equal(*env->rho, x->rho))
            return std::nullopt;
        const double rate = env->rate; // coefficient of rho in the envelope
        if (rate <= x->eps) return divergent();
        return finite(x->D * env->delta * std::exp((x->eps - rate) * x->rho(0.0)) /
                      (rate - x->eps));
    }
    if (const auto* x = bounds.get_if<ConstantABounds>()) {
        if (env->kind == SimpleEnv::Kind::Exp)
            return env->rate > 0 ? finite(x->L * env->delta / env->rate) : divergent();
        if (env->kind == SimpleEnv::Kind::Poly)
            return env->rate > 1.0 ? finite(x->L * env->delta / (env->rate - 1.0)) : divergent();
        return std::nullopt;
    }
    return std::nullopt;
}

inline std::optional<ScalarResult> closed_beta(const BoundFamily& bounds,
                                               const LipschitzEnvelope& lip) {
    const auto env = normalize_envelope(lip);
    if (!env) return std::nullopt;

    auto finite = [](double v) {
        ScalarResult r;
        r.value = v;
        r.closed_form = true;
        return r;
    };
    auto divergent = [] {
        ScalarResult r;
        r.value = kInf;
        r.finite = false;
        r.closed_form = true;
        return r;
    };

    if (const auto* x = bounds.get_if<ExponentialBounds>()) {
        if (env->kind != SimpleEnv::Kind::Exp) return std::nullopt;
        const bool conv = x->a - x->b + x->eps - env->rate < 0.0;
        const bool sup_ok = 2.0 * x->eps - env->rate <= 0.0;
        if (!conv || !sup_ok) return divergent();
        return finite(x->D * x->D * env->delta / (x->b - x->a + env->rate - x->eps));
    }
    if (const auto* x = bounds.get_if<PolynomialBounds>()) {
        if (env->kind != SimpleEnv::Kind::Poly) return std::nullopt;
        const bool conv = x->a - x->b + x->eps - env->rate < -1.0;
        const bool sup_ok = 2.0 * x->eps + 1.0 - env->rate <= 0.0;
        if (!conv || !sup_ok) return divergent();
        return finite(x->D * x->D * env->delta / (env->rate + x->b - x->a - x->eps - 1.0));
    }
    if (const auto* x = bounds.get_if<MuNuBounds>()) {
        if (x->mu.kind != GrowthRate::Kind::Power1p || x->nu.kind != GrowthRate::Kind::Power1p ||
            env->kind != SimpleEnv::Kind::Poly)
            return std::nullopt;
        const double pm = x->mu.param, pn = x->nu.param;
        const double kernel = (x->a - x->b) * pm + x->eps * pn - env->rate;
        const bool conv = kernel < -1.0;
        const bool sup_ok = 2.0 * x->eps * pn + 1.0 - env->rate <= 0.0;
        if (!conv || !sup_ok) return divergent();
        return finite(x->D * x->D * env->delta / (-kernel - 1.0));
    }
    if (const auto* x = bounds.get_if<RhoBounds>()) {
        if (env->kind != SimpleEnv::Kind::RhoD || !env->rho || !rho_equal(*env->rho, x->rho))
            return std::nullopt;
        const bool conv = x->a - x->b + x->eps - env->rate < 0.0;
        const bool sup_ok = 2.0 * x->eps - env->rate <= 0.0;
        if (!conv || !sup_ok) return divergent();
        return finite(x->D * x->D * env->delta *
                      std::exp((2.0 * x->eps - env->rate) * x->rho(0.0)) /
                      (x->b - x->a + env->rate - x->eps));
    }
    if (const auto* x = bounds.get_if<ConstantABounds>()) {
        if (env->kind != SimpleEnv::Kind::Exp) return std::nullopt;
        const bool conv = x->a + x->eps - env->rate < 0.0;
        const bool sup_ok = x->eps - env->rate <= 0.0;
        if (!conv || !sup_ok) return divergent();
        return finite(x->L * x->D * env->delta / (env->rate - x->a - x->eps));
    }
    return std::nullopt;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Generic quadrature paths
// ---------------------------------------------------------------------------

namespace detail {

struct SupSearch {
    double value = 0.0;
    double arg_t = 0.0, arg_s = 0.0;
    double quad_error = 0.0;
    bool diverged = false;
    bool converged = true;
};

/// One integral of the normalized alpha integrand over [s, t].
template <typename LogLip>
QuadResult alpha_cell(const BoundFamily& bounds, LogLip&& loglip, double t, double s,
                      double tol) {
    const double log_norm = bounds.log_a(t, s);
    auto g = [&](double r) {
        const double e = bounds.log_a(t, r) + bounds.log_a(r, s) - log_norm + loglip(r);
        return std::exp(e);
    };
    return integrate_adaptive(g, s, t, tol);
}

/// sup over a (t, s) log grid of the normalized alpha integral.
template <typename LogLip>
SupSearch alpha_sup_at_horizon(const BoundFamily& bounds, LogLip&& loglip, double T,
                               const QuadratureConfig& cfg) {
    SupSearch best;
    const auto s_grid = log_grid(0.0, T, cfg.sup_grid);
    for (double s : s_grid) {
        if (s + cfg.grid_min_gap > T) continue;
        const auto t_grid = log_grid(s + cfg.grid_min_gap, T, cfg.sup_grid);
        for (double t : t_grid) {
            const QuadResult q = alpha_cell(bounds, loglip, t, s, cfg.quad_tol);
            if (!std::isfinite(q.value) || q.value > 1e15) {
                best.diverged = true;
                return best;
            }
            if (q.value > best.value) {
                best.value = q.value;
                best.arg_t = t;
                best.arg_s = s;
                best.quad_error = q.error;
            }
        }
    }
    // One refinement pass around the argmax.
    const double span_t = std::max(1.0, 0.25 * (T - best.arg_s));
    const double span_s = std::max(0.5, 0.25 * best.arg_s);
    double refined = best.value;
    for (int i = -3; i <= 3; ++i) {
        for (int j = -3; j <= 3; ++j) {
            const double s = std::clamp(best.arg_s + j * span_s / 3.0, 0.0, T);
            const double t = std::clamp(best.arg_t + i * span_t / 3.0, s + cfg.grid_min_gap, T);
            if (t <= s) continue;
            const QuadResult q = alpha_cell(bounds, loglip, t, s, cfg.quad_tol);
            refined = std::max(refined, q.value);
        }
    }
    best.quad_error += std::abs(refined - best.value);
    best.value = refined;
    return best;
}

} // namespace detail

/// alpha: sup over t > s of (1/a(t,s)) int_s^t a(t,r) a(r,s) Lip(f_r) dr.
inline ScalarResult compute_alpha(const BoundFamily& bounds, const LipschitzEnvelope& lip,
                                  const QuadratureConfig& cfg = {}) {
    if (lip.is_zero()) return {0.0, 0.0, true, true, true, "zero envelope"};

    std::optional<ScalarResult> closed;
    if (!cfg.force_generic) closed = detail::closed_alpha(bounds, lip);
    if (closed && (!closed->finite || !cfg.cross_check)) return *closed;

    AsymExponents exps = detail::alpha_kernel_exponents(bounds);
    detail::combine(exps, detail::envelope_exponents(lip));
    if (cfg.force_generic) exps.known = false;

    auto loglip = [&lip](double r) { return lip.log_eval(r); };

    // Generic sup search with horizon doubling.
    ScalarResult generic;
    const int verdict = detail::exponents_verdict(exps);
    if (verdict < 0) {
        generic.value = kInf;
        generic.finite = false;
        generic.note = "kernel tail not integrable";
    } else {
        double T = cfg.horizon_init;
        double prev = -1.0;
        double prev_delta = -1.0;
        for (;;) {
            const detail::SupSearch sup = detail::alpha_sup_at_horizon(bounds, loglip, T, cfg);
            if (sup.diverged) {
                generic.value = kInf;
                generic.finite = false;
                break;
            }
            double delta = -1.0, remaining = 0.0;
            if (prev >= 0.0) {
                delta = sup.value - prev;
                // Project the remaining growth from the doubling ratio.
                const double theta = prev_delta > 0.0
                                         ? std::clamp(delta / prev_delta, 0.0, 0.98)
                                         : 0.5;
                remaining = delta > 0.0 ? delta * theta / (1.0 - theta) : 0.0;
                if (delta <= std::max(1e-12, 1e-9 * sup.value)) {
                    generic.value = sup.value;
                    generic.error = sup.quad_error + std::abs(delta) + remaining;
                    break;
                }
                // Unknown kernel with steadily growing sup: divergent.
                if (verdict == 0 && prev_delta > 0.0 && delta >= prev_delta * 1.02 &&
                    delta > 1e-6 * std::max(sup.value, 1.0)) {
                    generic.value = kInf;
                    generic.finite = false;
                    generic.note = "sup keeps growing under horizon doubling";
                    break;
                }
            }
            if (T >= cfg.horizon_max) {
                generic.value = sup.value;
                generic.error = sup.quad_error + std::max(0.0, delta) + remaining;
                generic.converged = false;
                if (verdict == 0 && delta > 0.0 && prev_delta > 0.0 && delta >= prev_delta) {
                    generic.value = kInf;
                    generic.finite = false;
                    generic.note = "sup still growing at horizon cap";
                }
                break;
            }
            prev = sup.value;
            prev_delta = delta;
            T = std::min(cfg.horizon_max, 2.0 * T);
        }
    }

    if (closed) {
        closed->note = "generic cross-check: " + format_g17(generic.value);
        if (generic.finite &&
            std::abs(generic.value - closed->value) > std::max(1e-6, 10.0 * generic.error))
            closed->note += " DISAGREES with closed form";
        return *closed;
    }
    return generic;
}

/// beta: sup over s of int_s^inf b(r,s) a(r,s) Lip(f_r) dr.
inline ScalarResult compute_beta(const BoundFamily& bounds, const LipschitzEnvelope& lip,
                                 const QuadratureConfig& cfg = {}) {
    if (lip.is_zero()) return {0.0, 0.0, true, true, true, "zero envelope"};

    std::optional<ScalarResult> closed;
    if (!cfg.force_generic) closed = detail::closed_beta(bounds, lip);
    if (closed && (!closed->finite || !cfg.cross_check)) return *closed;

    AsymExponents exps = detail::beta_kernel_exponents(bounds);
    detail::combine(exps, detail::envelope_exponents(lip));
    if (cfg.force_generic) exps.known = false;

    auto integral_at = [&](double s, double& err, bool& conv, bool& div) {
        auto g = [&](double r) {
            return std::exp(bounds.log_b(r, s) + bounds.log_a(r, s) + lip.log_eval(r));
        };
        TailModel tm = detail::tail_model_from_exponents(exps, g);
        if (cfg.force_generic) tm = TailModel{};
        const ImproperResult res = integrate_improper(g, s, cfg, tm);
        err = res.error;
        conv = res.converged;
        div = res.diverged;
        return res.value;
    };

    ScalarResult generic;
    const int verdict = detail::exponents_verdict(exps);
    if (verdict < 0) {
        generic.value = kInf;
        generic.finite = false;
        generic.note = "kernel tail not integrable";
    } else {
        // Sample s on a log grid wide enough to expose sup growth.
        const auto s_grid = log_grid(0.0, cfg.horizon_max, cfg.sup_grid);
        double best = -1.0, best_s = 0.0, best_err = 0.0;
        double mid_value = 0.0;
        bool all_converged = true;
        std::vector<double> values;
        values.reserve(s_grid.size());
        for (std::size_t i = 0; i < s_grid.size(); ++i) {
            double err;
            bool conv, div;
            const double v = integral_at(s_grid[i], err, conv, div);
            if (div || !std::isfinite(v)) {
                generic.value = kInf;
                generic.finite = false;
                generic.note = "integral diverges at s = " + format_g17(s_grid[i]);
                break;
            }
            all_converged = all_converged && conv;
            values.push_back(v);
            if (i == s_grid.size() / 2) mid_value = v;
            if (v > best) {
                best = v;
                best_s = s_grid[i];
                best_err = err;
            }
        }
        if (generic.finite) {
            // Growing toward the far end of the s range means sup = inf.
            const bool at_end = best_s >= s_grid[s_grid.size() - 2];
            if (at_end && mid_value > 0.0 && best > 1.5 * mid_value) {
                generic.value = kInf;
                generic.finite = false;
                generic.note = "sup over s grows without bound";
            } else {
                // Refine around the argmax once.
                double refined = best;
                const double lo = std::max(0.0, 0.5 * best_s);
                const double hi = best_s == 0.0 ? 1.0 : 1.5 * best_s;
                for (int k = 0; k <= 8; ++k) {
                    double err;
                    bool conv, div;
                    const double s = lo + (hi - lo) * k / 8.0;
                    const double v = integral_at(s, err, conv, div);
                    if (!div) refined = std::max(refined, v);
                }
                generic.value = refined;
                generic.error = best_err + std::abs(refined - best);
                generic.converged = all_converged;
            }
        }
    }

    if (closed) {
        closed->note = "generic cross-check: " + format_g17(generic.value);
        if (generic.finite &&
            std::abs(generic.value - closed->value) > std::max(1e-6, 10.0 * generic.error))
            closed->note += " DISAGREES with closed form";
        return *closed;
    }
    return generic;
}

// ---------------------------------------------------------------------------
// S(s) of the local theorem
// ---------------------------------------------------------------------------

struct SResult {
    double value = kInf;       // S(s)
    double sup = kInf;         // sup_{t>=s} a(t,s) R(s)/R(t)
    bool finite = false;
    bool closed_form = false;
};

/// S(s) = max{1, 2/(1-4 alpha) sup_{t>=s} a(t,s) R(s)/R(t)}.
inline SResult compute_S(const BoundFamily& bounds, const RadiusFunction& R, double alpha,
                         double s, const QuadratureConfig& cfg = {}) {
    if (!(alpha < 0.25))
        throw PreconditionError("compute_S: needs alpha < 1/4 (local prefactor undefined)");

    SResult out;
    const double pref = 2.0 / (1.0 - 4.0 * alpha);

    // Closed-form verdicts for matched pairs (sup attained at t = s when
    // the combined exponent is nonpositive).
    if (!cfg.force_generic) {
        const auto* eb = bounds.get_if<ExponentialBounds>();
        const auto* er = R.get_if<RadiusFunction::Exp>();
        if (eb && er) {
            if (eb->a + er->beta <= 0.0) {
                out.sup = eb->D * std::exp(eb->eps * s);
                out.value = std::max(1.0, pref * out.sup);
                out.finite = true;
            }
            out.closed_form = true;
            return out;
        }
        const auto* pb = bounds.get_if<PolynomialBounds>();
        const auto* pr = R.get_if<RadiusFunction::Poly>();
        if (pb && pr) {
            if (pb->a + pr->beta <= 0.0) {
                out.sup = pb->D * std::pow(1.0 + s, pb->eps);
                out.value = std::max(1.0, pref * out.sup);
                out.finite = true;
            }
            out.closed_form = true;
            return out;
        }
        const auto* mb = bounds.get_if<MuNuBounds>();
        const auto* mr = R.get_if<RadiusFunction::MuPower>();
        if (mb && mr && mb->mu.kind == mr->mu.kind && mb->mu.param == mr->mu.param) {
            if (mb->a <= mr->a) {
                out.sup = mb->D * std::pow(mb->nu(s), mb->eps);
                out.value = std::max(1.0, pref * out.sup);
                out.finite = true;
            }
            out.closed_form = true;
            return out;
        }
        const auto* rb = bounds.get_if<RhoBounds>();
        const auto* rr = R.get_if<RadiusFunction::RhoForm>();
        if (rb && rr && detail::rho_equal(rb->rho, rr->rho) && rb->a + rr->beta > 0.0) {
            // Positive combined exponent: ratio grows without bound.
            out.closed_form = true;
            return out;
        }
        // rho pairs with a + beta < 0 fall through to the numeric sup
        // with a guaranteed-finite verdict.
    }

    // Numeric sup over a geometric t grid.
    double sup = 0.0;
    double prev = -1.0;
    const double logRs = R.log_eval(s);
    for (double t : geometric_grid(s, s + cfg.horizon_max, std::max(0.05, cfg.grid_min_gap))) {
        const double v = std::exp(bounds.log_a(t, s) + logRs - R.log_eval(t));
        if (!std::isfinite(v) || v > 1e15) return out; // infinite marker
        sup = std::max(sup, v);
        prev = v;
    }
    // Growth at the far end of the horizon -> unbounded.
    const double at_cap = std::exp(bounds.log_a(s + cfg.horizon_max, s) + logRs -
                                   R.log_eval(s + cfg.horizon_max));
    const double at_mid = std::exp(bounds.log_a(s + 0.5 * cfg.horizon_max, s) + logRs -
                                   R.log_eval(s + 0.5 * cfg.horizon_max));
    if (at_cap > 1.02 * at_mid && at_cap > 1e-8) return out;
    (void)prev;

    out.sup = sup;
    out.value = std::max(1.0, pref * sup);
    out.finite = true;
    return out;
}

// ---------------------------------------------------------------------------
// Decay condition a(t,s) b(t,s) -> 0
// ---------------------------------------------------------------------------

struct DecayReport {
    TriState verdict = TriState::Inconclusive;
    std::optional<bool> closed_verdict;
    std::string closed_desc;
    bool numeric_pass = false;
    double worst_final_product = 0.0;
    double threshold = 0.0;
};

namespace detail {

/// Closed-form decay verdict per family, with a printable description.
inline std::optional<std::pair<bool, std::string>> closed_decay(const BoundFamily& bounds) {
    auto fmt = [](const std::string& cond, double lhs, double rhs, bool pass) {
        return std::make_pair(pass, cond + ": " + format_g17(lhs) + (pass ? " < " : " !< ") +
                                        format_g17(rhs));
    };
    if (const auto* x = bounds.get_if<ExponentialBounds>())
        return fmt("a+eps<b", x->a + x->eps, x->b, x->a + x->eps < x->b);
    if (const auto* x = bounds.get_if<PolynomialBounds>())
        return fmt("a+eps<b", x->a + x->eps, x->b, x->a + x->eps < x->b);
    if (const auto* x = bounds.get_if<RhoBounds>())
        return fmt("a+eps<b", x->a + x->eps, x->b, x->a + x->eps < x->b);
    if (const auto* x = bounds.get_if<MixedPolyShiftBounds>())
        return fmt("a+eps<b", x->a + x->eps, x->b, x->a + x->eps < x->b);
    if (const auto* x = bounds.get_if<ConstantABounds>())
        return fmt("a+eps<0", x->a + x->eps, 0.0, x->a + x->eps < 0.0);
    if (const auto* x = bounds.get_if<ExpPolyBBounds>())
        return fmt("a<0 (exponential beats polynomial)", x->a, 0.0, x->a < 0.0);
    if (const auto* x = bounds.get_if<MuNuBounds>()) {
        AsymExponents e;
        combine(e, growth_exponents(x->mu, x->a - x->b));
        combine(e, growth_exponents(x->nu, x->eps));
        if (e.exp_c != 0.0)
            return fmt("(a-b)*mu_rate+eps*nu_rate<0", e.exp_c, 0.0, e.exp_c < 0.0);
        return fmt("(a-b)*pmu+eps*pnu<0", e.log_c, 0.0, e.log_c < 0.0);
    }
    if (const auto* p = bounds.get_if<ProductBounds>()) {
        AsymExponents e;
        combine(e, factor_exponents(p->fa, -1.0));
        combine(e, factor_exponents(p->fb, -1.0));
        combine(e, factor_exponents(p->fd, 1.0));
        if (!e.known) return std::nullopt;
        bool pass;
        if (e.exp_c != 0.0)
            pass = e.exp_c < 0.0;
        else if (e.rho_c != 0.0)
            pass = e.rho_c < 0.0;
        else if (e.log_c != 0.0)
            pass = e.log_c < 0.0;
        else
            pass = false; // d/(a b) constant, limit is not zero
        return std::make_pair(pass, std::string("lim d(t)/(a(t) b(t)) = 0: ") +
                                        (pass ? "holds" : "fails"));
    }
    return std::nullopt;
}

} // namespace detail

/// Evaluates a(t,s) b(t,s) on geometric grids up to the horizon; the
/// numeric verdict requires the product to fall below the threshold with
/// a nonincreasing sampled tail. Closed-form verdicts override for the
/// built-in families (a finite sample cannot prove a limit).
inline DecayReport check_decay_condition(const BoundFamily& bounds,
                                         const std::vector<double>& s_samples, double horizon,
                                         double threshold,
                                         const QuadratureConfig& cfg = {}) {
    if (s_samples.empty()) throw DomainError("check_decay_condition: no s samples");
    for (double s : s_samples)
        if (horizon <= s) throw DomainError("check_decay_condition: horizon must exceed samples");

    DecayReport rep;
    rep.threshold = threshold;
    rep.numeric_pass = true;
    for (double s : s_samples) {
        const auto grid = geometric_grid(s, horizon, 0.25);
        std::vector<double> prod;
        prod.reserve(grid.size());
        for (double t : grid) prod.push_back(std::exp(bounds.log_a(t, s) + bounds.log_b(t, s)));
        const double final_p = prod.back();
        rep.worst_final_product = std::max(rep.worst_final_product, final_p);
        bool tail_decreasing = true;
        for (std::size_t i = prod.size() - std::min<std::size_t>(prod.size(), 6);
             i + 1 < prod.size(); ++i)
            if (prod[i + 1] > prod[i] * (1.0 + 1e-9)) tail_decreasing = false;
        if (!(final_p < threshold) || !tail_decreasing) rep.numeric_pass = false;
    }

    if (!cfg.force_generic) {
        if (auto closed = detail::closed_decay(bounds)) {
            rep.closed_verdict = closed->first;
            rep.closed_desc = closed->second;
            rep.verdict = closed->first ? TriState::Pass : TriState::Fail;
            return rep;
        }
    }
    rep.verdict = rep.numeric_pass ? TriState::Pass : TriState::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// Assembled report
// ---------------------------------------------------------------------------

struct AdmissibilityReport {
    ScalarResult alpha;
    ScalarResult beta;
    DecayReport decay;
    GateResult global_gate;
    GateResult local_gate;
    bool closed_form_used = false;
};

inline AdmissibilityReport compute_admissibility(const BoundFamily& bounds,
                                                 const LipschitzEnvelope& lip,
                                                 const QuadratureConfig& cfg = {},
                                                 double decay_horizon = 0.0) {
    AdmissibilityReport rep;
    rep.alpha = compute_alpha(bounds, lip, cfg);
    rep.beta = compute_beta(bounds, lip, cfg);
    const double horizon = decay_horizon > 0 ? decay_horizon : std::max(cfg.horizon_init * 32.0, 256.0);
    rep.decay = check_decay_condition(bounds, {0.0, 1.0, 5.0}, horizon, cfg.decay_threshold, cfg);
    if (rep.alpha.finite && rep.beta.finite) {
        rep.global_gate = check_global_gate(rep.alpha.value, rep.beta.value);
        rep.local_gate = check_local_gate(rep.alpha.value, rep.beta.value);
    } else {
        rep.global_gate = {false, -kInf};
        rep.local_gate = {false, -kInf};
    }
    rep.closed_form_used = rep.alpha.closed_form && rep.beta.closed_form;
    return rep;
}

} // namespace perron
