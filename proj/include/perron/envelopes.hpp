#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <variant>
#include <vector>

#include "perron/core.hpp"
#include "perron/scalar_functions.hpp"

namespace perron {

/// Radius function r -> R(r) bounding the validity ball of a local
/// perturbation.
class RadiusFunction {
public:
    struct Constant {
        double rho0;
    };
    struct Exp {
        double delta, beta;
    }; // R(r) = delta e^{-beta r}
    struct Poly {
        double delta, beta;
    }; // R(r) = delta (r+1)^{-beta}
    struct MuPower {
        double delta, a;
        GrowthRate mu;
    }; // R(r) = delta mu(r)^a, a < 0
    struct RhoForm {
        double delta, beta, q;
        Rho rho;
    }; // R(r) = delta rho'(r)^{1/q} e^{-beta rho(r)}

    using Kind = std::variant<Constant, Exp, Poly, MuPower, RhoForm>;

    RadiusFunction(Kind kind) : kind_(std::move(kind)) { validate(); }

    static RadiusFunction constant(double rho0) { return RadiusFunction(Constant{rho0}); }
    static RadiusFunction exp(double delta, double beta) {
        return RadiusFunction(Exp{delta, beta});
    }
    static RadiusFunction poly(double delta, double beta) {
        return RadiusFunction(Poly{delta, beta});
    }
    static RadiusFunction mu_power(double delta, double a, GrowthRate mu) {
        return RadiusFunction(MuPower{delta, a, std::move(mu)});
    }
    static RadiusFunction rho_form(double delta, double beta, double q, Rho rho) {
        return RadiusFunction(RhoForm{delta, beta, q, std::move(rho)});
    }

    const Kind& kind() const { return kind_; }

    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&kind_);
    }

    double operator()(double r) const {
        struct V {
            double r;
            double operator()(const Constant& c) const { return c.rho0; }
            double operator()(const Exp& e) const { return e.delta * std::exp(-e.beta * r); }
            double operator()(const Poly& p) const {
                return p.delta * std::pow(1.0 + r, -p.beta);
            }
            double operator()(const MuPower& m) const {
                return m.delta * std::pow(m.mu(r), m.a);
            }
            double operator()(const RhoForm& f) const {
                return f.delta * std::pow(f.rho.deriv(r), 1.0 / f.q) *
                       std::exp(-f.beta * f.rho(r));
            }
        };
        return std::visit(V{r}, kind_);
    }

    /// log R(r) evaluated without underflow (long-horizon integrands).
    double log_eval(double r) const {
        struct V {
            double r;
            double operator()(const Constant& c) const { return std::log(c.rho0); }
            double operator()(const Exp& e) const { return std::log(e.delta) - e.beta * r; }
            double operator()(const Poly& p) const {
                return std::log(p.delta) - p.beta * std::log1p(r);
            }
            double operator()(const MuPower& m) const {
                return std::log(m.delta) + m.a * std::log(m.mu(r));
            }
            double operator()(const RhoForm& f) const {
                return std::log(f.delta) + std::log(f.rho.deriv(r)) / f.q -
                       f.beta * f.rho(r);
            }
        };
        return std::visit(V{r}, kind_);
    }

private:
    void validate() const {
        struct V {
            void operator()(const Constant& c) const {
                if (c.rho0 <= 0) throw ConstraintError("radius: rho0 must be positive");
            }
            void operator()(const Exp& e) const {
                if (e.delta <= 0 || e.beta <= 0)
                    throw ConstraintError("radius: delta, beta must be positive");
            }
            void operator()(const Poly& p) const {
                if (p.delta <= 0 || p.beta <= 0)
                    throw ConstraintError("radius: delta, beta must be positive");
            }
            void operator()(const MuPower& m) const {
                if (m.delta <= 0 || m.a >= 0)
                    throw ConstraintError("radius: need delta > 0 and exponent a < 0");
            }
            void operator()(const RhoForm& f) const {
                if (f.delta <= 0 || f.beta <= 0 || f.q <= 0)
                    throw ConstraintError("radius: delta, beta, q must be positive");
            }
        };
        std::visit(V{}, kind_);
    }

    Kind kind_;
};

/// Time-dependent Lipschitz envelope r -> Lip(f_r). A scalar multiplier
/// keeps rescaling (truncation doubles the envelope, lambda-scaling in
/// tests) exactly linear.
class LipschitzEnvelope {
public:
    struct Zero {};
    struct ExpDecay {
        double delta, rate;
    }; // delta e^{-rate r}
    struct PolyDecay {
        double delta, p;
    }; // delta (r+1)^{-p}
    struct RhoDecay {
        double delta, eps;
        Rho rho;
    }; // delta rho'(r) e^{-2 eps rho(r)}
    struct BallPower {
        double c, q;
        RadiusFunction R;
    }; // 2^q c R(r)^q, the Lipschitz bound on B(R(r))
    struct Tabulated {
        std::vector<double> r_grid;
        std::vector<double> values; // nonnegative, interpolated linearly
    };

    using Kind = std::variant<Zero, ExpDecay, PolyDecay, RhoDecay, BallPower, Tabulated>;

    LipschitzEnvelope(Kind kind, double scale = 1.0) : kind_(std::move(kind)), scale_(scale) {
        validate();
    }

    static LipschitzEnvelope zero() { return LipschitzEnvelope(Zero{}); }
    static LipschitzEnvelope exp_decay(double delta, double rate) {
        return LipschitzEnvelope(ExpDecay{delta, rate});
    }
    static LipschitzEnvelope poly_decay(double delta, double p) {
        return LipschitzEnvelope(PolyDecay{delta, p});
    }
    static LipschitzEnvelope rho_decay(double delta, double eps, Rho rho) {
        return LipschitzEnvelope(RhoDecay{delta, eps, std::move(rho)});
    }
    static LipschitzEnvelope ball_power(double c, double q, RadiusFunction R) {
        return LipschitzEnvelope(BallPower{c, q, std::move(R)});
    }
    static LipschitzEnvelope tabulated(std::vector<double> r_grid, std::vector<double> values) {
        return LipschitzEnvelope(Tabulated{std::move(r_grid), std::move(values)});
    }

    const Kind& kind() const { return kind_; }
    double scale() const { return scale_; }
    bool is_zero() const { return std::holds_alternative<Zero>(kind_) || scale_ == 0.0; }

    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&kind_);
    }

    LipschitzEnvelope scaled(double factor) const {
        LipschitzEnvelope out = *this;
        out.scale_ *= factor;
        return out;
    }

    double operator()(double r) const {
        struct V {
            double r;
            double operator()(const Zero&) const { return 0.0; }
            double operator()(const ExpDecay& e) const {
                return e.delta * std::exp(-e.rate * r);
            }
            double operator()(const PolyDecay& p) const {
                return p.delta * std::pow(1.0 + r, -p.p);
            }
            double operator()(const RhoDecay& d) const {
                return d.delta * d.rho.deriv(r) * std::exp(-2.0 * d.eps * d.rho(r));
            }
            double operator()(const BallPower& b) const {
                return std::pow(2.0, b.q) * b.c * std::pow(b.R(r), b.q);
            }
            double operator()(const Tabulated& t) const {
                std::size_t i;
                if (r <= t.r_grid.front()) return t.values.front();
                if (r >= t.r_grid.back()) return t.values.back();
                auto it = std::upper_bound(t.r_grid.begin(), t.r_grid.end(), r);
                i = static_cast<std::size_t>(it - t.r_grid.begin()) - 1;
                const double f = (r - t.r_grid[i]) / (t.r_grid[i + 1] - t.r_grid[i]);
                return (1 - f) * t.values[i] + f * t.values[i + 1];
            }
        };
        return scale_ * std::visit(V{r}, kind_);
    }

    /// log Lip(f_r), -infinity where the envelope vanishes. Built-in
    /// kinds keep their exponents exact far past the underflow range of
    /// the plain evaluation.
    double log_eval(double r) const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        if (get_if<Tabulated>()) {
            const double v = (*this)(r);
            return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        }
        struct V {
            double r;
            double operator()(const Zero&) const {
                return -std::numeric_limits<double>::infinity();
            }
            double operator()(const ExpDecay& e) const {
                return std::log(e.delta) - e.rate * r;
            }
            double operator()(const PolyDecay& p) const {
                return std::log(p.delta) - p.p * std::log1p(r);
            }
            double operator()(const RhoDecay& d) const {
                return std::log(d.delta) + std::log(d.rho.deriv(r)) - 2.0 * d.eps * d.rho(r);
            }
            double operator()(const BallPower& b) const {
                return b.q * std::log(2.0) + std::log(b.c) + b.q * b.R.log_eval(r);
            }
            double operator()(const Tabulated&) const { return 0.0; } // unreachable
        };
        return std::log(scale_) + std::visit(V{r}, kind_);
    }

private:
    void validate() const {
        if (scale_ < 0) throw ConstraintError("envelope: scale must be nonnegative");
        struct V {
            void operator()(const Zero&) const {}
            void operator()(const ExpDecay& e) const {
                if (e.delta <= 0 || e.rate <= 0)
                    throw ConstraintError("envelope: delta, rate must be positive");
            }
            void operator()(const PolyDecay& p) const {
                if (p.delta <= 0 || p.p <= 0)
                    throw ConstraintError("envelope: delta, p must be positive");
            }
            void operator()(const RhoDecay& d) const {
                if (d.delta <= 0 || d.eps <= 0)
                    throw ConstraintError("envelope: delta, eps must be positive");
            }
            void operator()(const BallPower& b) const {
                if (b.c <= 0 || b.q <= 0)
                    throw ConstraintError("envelope: c, q must be positive");
            }
            void operator()(const Tabulated& t) const {
                if (t.r_grid.size() < 2 || t.values.size() != t.r_grid.size())
                    throw ConstraintError("envelope: tabulated grid/value mismatch");
                for (double v : t.values)
                    if (v < 0) throw ConstraintError("envelope: values must be nonnegative");
            }
        };
        std::visit(V{}, kind_);
    }

    Kind kind_;
    double scale_ = 1.0;
};

} // namespace perron
