#pragma once

#include <utility>
#include <vector>

#include "perron/bounds.hpp"
#include "perron/linear_system.hpp"

namespace perron {

/// One violated grid point of a dichotomy bound check.
struct BoundViolation {
    double t, s;
    double measured;
    double allowed;
    char side; // 'a' or 'b'
};

struct DichotomyReport {
    std::vector<BoundViolation> violations;
    double worst_ratio = 0.0; // max measured/allowed over the grid
    bool pass = true;
};

namespace detail {

/// Operator norm of M restricted to the product norm. Exact for 1+1
/// dimensional diagonal actions; sampled lower bound otherwise (enough
/// for a spot check that reports violations).
inline double op_norm_E(const LinearSystem& sys, double t, double s) {
    if (sys.is_product()) return std::abs(sys.product().U(t, s));
    const auto& sp = sys.splitting();
    const StateMat T = sys.evolve_matrix(t, s);
    double best = 0.0;
    for (int i = 0; i < sp.dim_E(); ++i) {
        const StateVec v = sp.basis_E().col(i);
        best = std::max(best, sp.product_norm(T * (sp.P() * v)));
    }
    return best;
}

inline double op_norm_F_inv(const LinearSystem& sys, double t, double s) {
    if (sys.is_product()) return std::exp(-sys.product().log_V(t, s));
    const auto& sp = sys.splitting();
    double best = 0.0;
    for (int i = 0; i < sp.dim_F(); ++i) {
        const StateVec w = sp.basis_F().col(i);
        best = std::max(best, sp.product_norm(sys.evolve_inverse_F(t, s, w)));
    }
    return best;
}

} // namespace detail

/// Spot-checks |T_{t,s} P| <= (1+slack) a(t,s) and
/// |(T_{t,s}|_F)^{-1} Q| <= (1+slack) b(t,s) on the given grid.
inline DichotomyReport verify_dichotomy_bounds(const LinearSystem& sys, const BoundFamily& bounds,
                                               const std::vector<std::pair<double, double>>& grid,
                                               double slack) {
    DichotomyReport rep;
    for (const auto& [t, s] : grid) {
        if (t < s) throw DomainError("verify_dichotomy_bounds: grid needs t >= s");
        const double na = detail::op_norm_E(sys, t, s);
        const double ba = bounds.eval_a(t, s);
        rep.worst_ratio = std::max(rep.worst_ratio, na / ba);
        if (na > (1.0 + slack) * ba) rep.violations.push_back({t, s, na, ba, 'a'});

        const double nb = detail::op_norm_F_inv(sys, t, s);
        const double bb = bounds.eval_b(t, s);
        rep.worst_ratio = std::max(rep.worst_ratio, nb / bb);
        if (nb > (1.0 + slack) * bb) rep.violations.push_back({t, s, nb, bb, 'b'});
    }
    rep.pass = rep.violations.empty();
    return rep;
}

} // namespace perron
