#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "perron/errors.hpp"

namespace perron {

// State dimension is small by design (the toolkit targets low-dimensional
// model problems); capping it lets Eigen keep everything on the stack.
inline constexpr int kMaxDim = 8;

using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using StateMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Magnitude above which a trajectory is declared divergent.
inline constexpr double kDivergenceGuard = 1e12;

inline bool is_finite(const StateVec& v) { return v.allFinite(); }
inline bool is_finite(const StateMat& m) { return m.allFinite(); }

inline void check_divergence(const StateVec& v, double t) {
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kDivergenceGuard)
        throw DivergenceError("state diverged near t = " + std::to_string(t));
}

inline void check_divergence(const StateMat& m, double t) {
    if (!m.allFinite() || m.cwiseAbs().maxCoeff() > kDivergenceGuard)
        throw DivergenceError("fundamental matrix diverged near t = " + std::to_string(t));
}

/// Deterministic 64-bit splitmix step; used to seed and to draw bits.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Tiny deterministic RNG. std::uniform_real_distribution is
/// implementation-defined, so byte-identical outputs require drawing
/// uniforms from raw bits ourselves.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed ^ 0xa0761d6478bd642fULL) {
        // Warm up so that small seeds decorrelate.
        splitmix64(state_);
        splitmix64(state_);
    }

    double uniform01() {
        return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return splitmix64(state_) % n; }

private:
    std::uint64_t state_;
};

/// Shortest-faithful decimal formatting used by every CSV writer (17
/// significant digits round-trips doubles exactly).
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Log-spaced grid on [0, span]: node k sits at span*(e^{g k/n}-1)/(e^g-1).
/// Grading g > 0 clusters nodes near 0; g -> 0 degenerates to uniform.
inline std::vector<double> graded_grid(double span, int nodes, double grading) {
    if (nodes < 2) throw DomainError("graded_grid: need at least 2 nodes");
    std::vector<double> g(static_cast<std::size_t>(nodes));
    if (grading < 1e-12) {
        for (int k = 0; k < nodes; ++k)
            g[static_cast<std::size_t>(k)] = span * k / (nodes - 1);
    } else {
        const double denom = std::expm1(grading);
        for (int k = 0; k < nodes; ++k)
            g[static_cast<std::size_t>(k)] =
                span * std::expm1(grading * k / (nodes - 1)) / denom;
    }
    g.front() = 0.0;
    g.back() = span;
    return g;
}

} // namespace perron
