#pragma once

// Test-only reference computations, kept independent of the library's
// quadrature and integration paths.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

/// Romberg integration on [a, b].
template <typename F>
double romberg(F&& f, double a, double b, double eps = 1e-13, int max_k = 20) {
    std::vector<std::vector<double>> R(1);
    double h = b - a;
    R[0].push_back(0.5 * h * (f(a) + f(b)));
    for (int k = 1; k <= max_k; ++k) {
        h *= 0.5;
        double sum = 0.0;
        const long n = 1L << (k - 1);
        for (long i = 0; i < n; ++i) sum += f(a + (2 * i + 1) * h);
        R.emplace_back();
        R[k].push_back(0.5 * R[k - 1][0] + h * sum);
        double p4 = 4.0;
        for (int j = 1; j <= k; ++j) {
            R[k].push_back(R[k][j - 1] + (R[k][j - 1] - R[k - 1][j - 1]) / (p4 - 1.0));
            p4 *= 4.0;
        }
        if (k > 3 && std::abs(R[k][k] - R[k - 1][k - 1]) < eps * (1.0 + std::abs(R[k][k])))
            return R[k][k];
    }
    return R.back().back();
}

/// Improper integral over [s, inf) by horizon doubling until increments fade.
template <typename F>
double improper(F&& f, double s, double eps = 1e-13) {
    double total = 0.0;
    double lo = s;
    double width = 8.0;
    for (int k = 0; k < 48; ++k) {
        const double inc = romberg(f, lo, lo + width, eps);
        total += inc;
        if (k > 2 && std::abs(inc) < eps * (1.0 + std::abs(total))) break;
        lo += width;
        width *= 2.0;
    }
    return total;
}

/// Fixed-step classic RK4, independent of the library's adaptive pair.
template <typename Vec, typename Rhs>
Vec rk4_fixed(Rhs&& rhs, double t0, double t1, Vec y, int steps) {
    const double h = (t1 - t0) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = t0 + i * h;
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + 0.5 * h, Vec(y + 0.5 * h * k1));
        const Vec k3 = rhs(t + 0.5 * h, Vec(y + 0.5 * h * k2));
        const Vec k4 = rhs(t + h, Vec(y + h * k3));
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

} // namespace oracles
