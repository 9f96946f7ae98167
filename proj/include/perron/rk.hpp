#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "perron/core.hpp"

namespace perron {

struct RkStats {
    long steps = 0;
    long rejected = 0;
    long evals = 0;
};

struct RkOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 1.0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_b5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600,  0.0,      7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

} // namespace detail

/// Adaptive Dormand-Prince 5(4) on a generic Eigen state (vector or matrix).
/// Integrates y' = rhs(t, y) from t0 to t1 (t1 >= t0) and returns y(t1).
template <typename State, typename Rhs>
State integrate_rk(Rhs&& rhs, double t0, double t1, State y, const RkOptions& opt = {},
                   RkStats* stats = nullptr) {
    if (t1 < t0) throw DomainError("integrate_rk: backward integration not supported");
    if (t1 == t0) return y;

    double t = t0;
    double h = std::min({opt.h_init, t1 - t0, opt.h_max});
    State k[7];
    State y5, y4;

    while (t < t1) {
        h = std::min(h, t1 - t);
        k[0] = rhs(t, y);
        for (int i = 1; i < 7; ++i) {
            State yi = y;
            for (int j = 0; j < i; ++j)
                if (detail::dp_a[i][j] != 0.0) yi += (h * detail::dp_a[i][j]) * k[j];
            k[i] = rhs(t + detail::dp_c[i] * h, yi);
        }
        if (stats) stats->evals += 7;

        y5 = y;
        y4 = y;
        for (int i = 0; i < 7; ++i) {
            if (detail::dp_b5[i] != 0.0) y5 += (h * detail::dp_b5[i]) * k[i];
            if (detail::dp_b4[i] != 0.0) y4 += (h * detail::dp_b4[i]) * k[i];
        }

        const double scale =
            opt.abs_tol + opt.rel_tol * std::max(y.cwiseAbs().maxCoeff(), y5.cwiseAbs().maxCoeff());
        const double err = (y5 - y4).cwiseAbs().maxCoeff() / scale;

        if (err <= 1.0 || h <= opt.h_min * (1.0 + std::abs(t))) {
            t += h;
            y = y5;
            check_divergence(y, t);
            if (stats) ++stats->steps;
        } else if (stats) {
            ++stats->rejected;
        }

        const double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::min(h, opt.h_max);
        if (h < opt.h_min * (1.0 + std::abs(t)))
            h = opt.h_min * (1.0 + std::abs(t));
    }
    return y;
}

} // namespace perron
