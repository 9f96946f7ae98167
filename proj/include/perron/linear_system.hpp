#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "perron/core.hpp"
#include "perron/rk.hpp"
#include "perron/scalar_functions.hpp"
#include "perron/splitting.hpp"

namespace perron {

/// The closed-form 2D system u' = cu(t)u, v' = cv(t)v built from four
/// positive factors. Its evolution operator is diagonal with entries
///   U(t,s) = (fa(s)/fa(t)) * fc(t)^{(cos t-1)/2} / fc(s)^{(cos s-1)/2}
///   V(t,s) = (fb(t)/fb(s)) * fd(t)^{(cos t-1)/2} / fd(s)^{(cos s-1)/2}
/// Everything is evaluated in log space so that identical terms cancel
/// exactly (in particular U(s,s) = V(s,s) = 1 bit-exactly).
struct ProductSystem {
    ScalarFactor fa, fb, fc, fd;

    double log_U(double t, double s) const {
        return detail::log_factor(fa, s) - detail::log_factor(fa, t) +
               0.5 * (std::cos(t) - 1.0) * detail::log_factor(fc, t) -
               0.5 * (std::cos(s) - 1.0) * detail::log_factor(fc, s);
    }

    double log_V(double t, double s) const {
        return detail::log_factor(fb, t) - detail::log_factor(fb, s) +
               0.5 * (std::cos(t) - 1.0) * detail::log_factor(fd, t) -
               0.5 * (std::cos(s) - 1.0) * detail::log_factor(fd, s);
    }

    double U(double t, double s) const { return std::exp(log_U(t, s)); }
    double V(double t, double s) const { return std::exp(log_V(t, s)); }

    double coeff_u(double t) const {
        return -fa.log_deriv(t) + fc.log_deriv(t) * 0.5 * (std::cos(t) - 1.0) -
               detail::log_factor(fc, t) * 0.5 * std::sin(t);
    }

    double coeff_v(double t) const {
        return fb.log_deriv(t) + fd.log_deriv(t) * 0.5 * (std::cos(t) - 1.0) -
               detail::log_factor(fd, t) * 0.5 * std::sin(t);
    }
};

/// General linear part v' = A(t)v with an adaptive RK evolution operator.
struct CoefficientSystem {
    std::function<StateMat(double)> A;
    RkOptions rk;
};

/// Precomputed evolution increments T(t_{k+1}, t_k) along a grid. Forward
/// products of increments avoid inverting ill-conditioned fundamental
/// matrices over long spans.
struct EvolutionCache {
    std::vector<double> times;
    std::vector<StateMat> increments; // increments[k] = T(times[k+1], times[k])
};

/// The linear equation v' = A(t)v together with its invariant splitting.
/// All query methods are const and safe for concurrent use; the optional
/// evolution cache must be populated single-threaded via prepare_cache().
class LinearSystem {
public:
    LinearSystem(ProductSystem sys, Splitting split = Splitting::coordinate(1, 1))
        : kind_(std::move(sys)), split_(std::move(split)) {
        if (split_.dim() != 2 || split_.dim_E() != 1)
            throw ConstraintError("product system: splitting must be 1+1 dimensional");
    }

    LinearSystem(CoefficientSystem sys, Splitting split)
        : kind_(std::move(sys)), split_(std::move(split)) {}

    const Splitting& splitting() const { return split_; }
    int dim() const { return split_.dim(); }
    bool is_product() const { return std::holds_alternative<ProductSystem>(kind_); }
    const ProductSystem& product() const { return std::get<ProductSystem>(kind_); }

    /// A(t); for product systems assembled from the coefficient formulas.
    StateMat coefficient(double t) const {
        if (const auto* p = std::get_if<ProductSystem>(&kind_)) {
            StateMat A = StateMat::Zero(2, 2);
            A(0, 0) = p->coeff_u(t);
            A(1, 1) = p->coeff_v(t);
            return A;
        }
        return std::get<CoefficientSystem>(kind_).A(t);
    }

    /// T_{t,s} v for t >= s >= 0.
    StateVec evolve(double t, double s, const StateVec& v) const {
        check_args(t, s);
        if (v.size() != dim()) throw DomainError("evolve: state has wrong dimension");
        if (t == s) return v;
        if (const auto* p = std::get_if<ProductSystem>(&kind_)) {
            StateVec out(2);
            out[0] = p->U(t, s) * v[0];
            out[1] = p->V(t, s) * v[1];
            check_divergence(out, t);
            return out;
        }
        StateVec out = evolve_matrix(t, s) * v;
        check_divergence(out, t);
        return out;
    }

    /// Full evolution matrix T_{t,s}.
    StateMat evolve_matrix(double t, double s) const {
        check_args(t, s);
        const int n = dim();
        if (t == s) return StateMat::Identity(n, n);
        if (const auto* p = std::get_if<ProductSystem>(&kind_)) {
            StateMat M = StateMat::Zero(2, 2);
            M(0, 0) = p->U(t, s);
            M(1, 1) = p->V(t, s);
            check_divergence(M, t);
            return M;
        }
        const auto& cs = std::get<CoefficientSystem>(kind_);
        StateMat M = cached_span(cs, t, s);
        check_divergence(M, t);
        return M;
    }

    /// (T_{t,s}|_F)^{-1} Q_t w: pulls the F-component of w back to time s.
    StateVec evolve_inverse_F(double t, double s, const StateVec& w) const {
        check_args(t, s);
        if (w.size() != dim()) throw DomainError("evolve_inverse_F: state has wrong dimension");
        if (t == s) return split_.embed_F(split_.coords_F(w));
        if (const auto* p = std::get_if<ProductSystem>(&kind_)) {
            const double logV = p->log_V(t, s);
            if (!std::isfinite(logV) || logV < -690.0)
                throw InvertibilityError("evolve_inverse_F: V(t,s) is numerically singular");
            StateVec out(2);
            out[0] = 0.0;
            out[1] = std::exp(-logV) * w[1];
            check_divergence(out, t);
            return out;
        }
        const StateMat T = evolve_matrix(t, s);
        const StateMat B = split_.basis_F().transpose() * T * split_.basis_F();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        lu.setThreshold(1e-12);
        if (lu.rank() < split_.dim_F())
            throw InvertibilityError("evolve_inverse_F: restriction to F lost numerical rank");
        StateVec out = split_.embed_F(lu.solve(split_.coords_F(w)));
        check_divergence(out, t);
        return out;
    }

    /// Populates forward evolution increments along the given grid. Call
    /// once, single-threaded, before sharing the system across workers.
    void prepare_cache(const std::vector<double>& grid) const {
        if (!std::holds_alternative<CoefficientSystem>(kind_)) return;
        const auto& cs = std::get<CoefficientSystem>(kind_);
        auto cache = std::make_shared<EvolutionCache>();
        cache->times = grid;
        std::sort(cache->times.begin(), cache->times.end());
        cache->times.erase(std::unique(cache->times.begin(), cache->times.end()),
                           cache->times.end());
        for (std::size_t k = 0; k + 1 < cache->times.size(); ++k)
            cache->increments.push_back(
                integrate_span(cs, cache->times[k], cache->times[k + 1]));
        cache_ = std::move(cache);
    }

private:
    static void check_args(double t, double s) {
        if (s < 0) throw DomainError("evolve: negative time");
        if (t < s) throw DomainError("evolve: requires t >= s");
    }

    StateMat integrate_span(const CoefficientSystem& cs, double s, double t) const {
        const int n = dim();
        StateMat M = StateMat::Identity(n, n);
        auto rhs = [&cs](double r, const StateMat& Y) -> StateMat { return cs.A(r) * Y; };
        RkOptions opt = cs.rk;
        opt.h_max = std::max(opt.h_max, 1.0);
        return integrate_rk(rhs, s, t, M, opt);
    }

    StateMat cached_span(const CoefficientSystem& cs, double t, double s) const {
        auto cache = cache_;
        if (!cache || cache->times.size() < 2 || s > cache->times.back() ||
            t < cache->times.front())
            return integrate_span(cs, s, t);

        // March from s to the first grid node >= s, across cached
        // increments, then from the last node <= t up to t.
        const auto& ts = cache->times;
        auto lo = std::lower_bound(ts.begin(), ts.end(), s);
        if (lo == ts.end()) return integrate_span(cs, s, t);
        std::size_t j = static_cast<std::size_t>(lo - ts.begin());
        if (ts[j] > t) return integrate_span(cs, s, t);

        StateMat M = integrate_span(cs, s, ts[j]);
        while (j + 1 < ts.size() && ts[j + 1] <= t) {
            M = cache->increments[j] * M;
            ++j;
        }
        if (t > ts[j]) M = integrate_span(cs, ts[j], t) * M;
        return M;
    }

    std::variant<ProductSystem, CoefficientSystem> kind_;
    Splitting split_;
    mutable std::shared_ptr<const EvolutionCache> cache_;
};

/// Result of a cocycle spot check.
struct CocycleReport {
    double worst_residual = 0.0;
    double worst_t = 0.0, worst_r = 0.0, worst_s = 0.0;
    bool pass = true;
    double tol = 0.0;
};

/// Checks |T_{t,r} T_{r,s} v - T_{t,s} v| <= tol |v| over sampled unit
/// vectors for each triple t >= r >= s.
inline CocycleReport check_cocycle(const LinearSystem& sys,
                                   const std::vector<std::array<double, 3>>& triples,
                                   double tol, std::uint64_t seed = 0) {
    CocycleReport rep;
    rep.tol = tol;
    Rng rng(seed);
    const int n = sys.dim();

    std::vector<StateVec> samples;
    for (int i = 0; i < n; ++i) samples.push_back(StateVec::Unit(n, i));
    for (int k = 0; k < 4; ++k) {
        StateVec v(n);
        for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
        if (v.norm() < 1e-8) v = StateVec::Unit(n, 0);
        samples.push_back(v.normalized());
    }

    for (const auto& [t, r, s] : triples) {
        if (!(t >= r && r >= s)) throw DomainError("check_cocycle: need t >= r >= s");
        for (const auto& v : samples) {
            const StateVec direct = sys.evolve(t, s, v);
            const StateVec composed = sys.evolve(t, r, sys.evolve(r, s, v));
            const double res = sys.splitting().product_norm(composed - direct) /
                               sys.splitting().product_norm(v);
            if (res > rep.worst_residual) {
                rep.worst_residual = res;
                rep.worst_t = t;
                rep.worst_r = r;
                rep.worst_s = s;
            }
        }
    }
    rep.pass = rep.worst_residual <= tol;
    return rep;
}

/// Builds the closed-form 2D example system after validating that the
/// oscillation factors stay >= 1 on a sampled horizon.
inline LinearSystem build_product_example(ScalarFactor fa, ScalarFactor fb, ScalarFactor fc,
                                          ScalarFactor fd, double sample_horizon = 64.0) {
    for (int k = 0; k <= 256; ++k) {
        const double t = sample_horizon * k / 256.0;
        if (fc(t) < 1.0 - 1e-12)
            throw ConstraintError("product example: factor c(t) < 1 at t = " + std::to_string(t));
        if (fd(t) < 1.0 - 1e-12)
            throw ConstraintError("product example: factor d(t) < 1 at t = " + std::to_string(t));
    }
    return LinearSystem(ProductSystem{std::move(fa), std::move(fb), std::move(fc), std::move(fd)});
}

} // namespace perron
