#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "perron/core.hpp"

namespace perron {

struct QuadratureConfig {
    double quad_tol = 1e-10;     // absolute tolerance of one adaptive integral
    double tail_tol = 1e-12;     // improper-integral tail target
    double horizon_init = 32.0;  // first truncation horizon, doubled as needed
    double horizon_max = 1e6;    // hard cap for horizon doubling
    int sup_grid = 64;           // nodes per axis of the (t, s) sup search
    double grid_min_gap = 1e-3;  // t >= s + gap in the alpha sup search
    double decay_threshold = 1e-3; // numeric PASS level for a(t,s) b(t,s) -> 0
    bool force_generic = false;  // ignore closed forms and analytic tails
    bool cross_check = true;     // run the generic path against closed forms
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // heuristic absolute error estimate
    long evals = 0;
    bool converged = true;
};

namespace detail {

inline double simpson_rule(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
void adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                          double tol, int depth, QuadResult& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evals += 2;
    const double left = simpson_rule(fa, flm, fm, m - a);
    const double right = simpson_rule(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error += std::abs(delta) / 15.0;
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) out.converged = false;
        return;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

} // namespace detail

/// Adaptive composite Simpson on [a, b] to absolute tolerance tol.
template <typename F>
QuadResult integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 40) {
    QuadResult out;
    if (b <= a) return out;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    out.evals = 3;
    const double whole = detail::simpson_rule(fa, fm, fb, b - a);
    detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, out);
    return out;
}

/// What is known about the integrand's tail on [T, infinity).
struct TailModel {
    int verdict = 0; // +1 integrable, -1 divergent, 0 unknown (empirical)
    std::function<double(double)> bound; // analytic bound for the tail mass past T
};

struct ImproperResult {
    double value = 0.0;
    double error = 0.0;     // quadrature estimate + tail bound
    double tail = 0.0;      // tail mass estimate at the final horizon
    double horizon = 0.0;   // final truncation horizon
    bool diverged = false;
    bool converged = true;  // false: horizon cap hit with tail above tolerance
    long evals = 0;
};

/// Integrates f over [s, infinity) by horizon doubling. The tail model
/// supplies an analytic verdict/bound when the integrand family is known;
/// otherwise convergence is judged from the decay of per-segment masses
/// (heuristic, reported as such by callers).
template <typename F>
ImproperResult integrate_improper(F&& f, double s, const QuadratureConfig& cfg,
                                  const TailModel& tail = {}) {
    ImproperResult out;
    if (tail.verdict < 0) {
        out.diverged = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }

    double prev_T = s;
    double T = s + cfg.horizon_init;
    double prev_increment = -1.0;
    int growth_strikes = 0;

    for (int k = 0; k < 64; ++k) {
        QuadResult seg = integrate_adaptive(f, prev_T, T, cfg.quad_tol);
        out.evals += seg.evals;
        out.value += seg.value;
        out.error += seg.error;
        out.horizon = T;

        if (!std::isfinite(out.value) || out.value > 1e15) {
            out.diverged = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }

        double tail_est;
        if (tail.bound && !cfg.force_generic) {
            tail_est = tail.bound(T);
        } else {
            // Geometric decay of segment masses: tail ~ I_k * theta/(1-theta).
            if (prev_increment >= 0.0 && seg.value > prev_increment * 1.02 && k >= 2)
                ++growth_strikes;
            else
                growth_strikes = 0;
            if (growth_strikes >= 2 && tail.verdict == 0) {
                out.diverged = true;
                out.value = std::numeric_limits<double>::infinity();
                return out;
            }
            double theta = prev_increment > 0.0 ? seg.value / prev_increment : 1.0;
            theta = std::min(theta, 0.95);
            tail_est = seg.value > 0.0 ? seg.value * theta / (1.0 - theta)
                                       : 0.0;
        }
        out.tail = tail_est;

        if (tail_est <= cfg.tail_tol) {
            out.error += tail_est;
            return out;
        }
        if (T - s >= cfg.horizon_max) {
            if (tail.verdict == 0 && !tail.bound && prev_increment > 0.0 &&
                seg.value >= prev_increment * 0.98) {
                // Masses not shrinking by the cap: call it divergent.
                out.diverged = true;
                out.value = std::numeric_limits<double>::infinity();
                return out;
            }
            out.converged = false;
            out.error += tail_est;
            return out;
        }
        prev_increment = seg.value;
        prev_T = T;
        T = std::min(s + cfg.horizon_max, s + (T - s) * 2.0);
    }
    out.converged = false;
    return out;
}

/// Geometric sample grid {lo + step * 2^k} clipped to hi, always
/// including both endpoints.
inline std::vector<double> geometric_grid(double lo, double hi, double step0 = 0.25) {
    std::vector<double> g{lo};
    double step = step0;
    double t = lo + step;
    while (t < hi) {
        g.push_back(t);
        step *= 2.0;
        t = lo + step;
    }
    g.push_back(hi);
    return g;
}

/// Log-spaced grid of n points covering [lo, hi] (lo >= 0).
inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double l0 = std::log1p(lo);
    const double l1 = std::log1p(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = std::expm1(l0 + (l1 - l0) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

} // namespace perron
