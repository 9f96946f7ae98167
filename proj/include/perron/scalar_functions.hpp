#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "perron/errors.hpp"

namespace perron {

/// Increasing C^1 reparameterization of time used by the rho-type bound
/// family. Built-ins keep their parameters so closed-form verdicts can
/// reason about them; Custom carries opaque callables.
struct Rho {
    enum class Kind { Identity, PowerShift, Custom };

    Kind kind = Kind::Identity;
    double p = 1.0; // PowerShift exponent
    std::function<double(double)> fn;
    std::function<double(double)> dfn;

    double operator()(double t) const {
        switch (kind) {
        case Kind::Identity: return t;
        case Kind::PowerShift: return std::pow(1.0 + t, p) - 1.0;
        case Kind::Custom: return fn(t);
        }
        return t;
    }

    double deriv(double t) const {
        switch (kind) {
        case Kind::Identity: return 1.0;
        case Kind::PowerShift: return p * std::pow(1.0 + t, p - 1.0);
        case Kind::Custom: return dfn(t);
        }
        return 1.0;
    }

    static Rho identity() { return {}; }

    /// rho(t) = (1+t)^p - 1, rho(0) = 0, strictly increasing for p > 0.
    static Rho power_shift(double p) {
        if (p <= 0) throw ConstraintError("rho power_shift: exponent must be positive");
        Rho r;
        r.kind = Kind::PowerShift;
        r.p = p;
        return r;
    }

    static Rho custom(std::function<double(double)> f, std::function<double(double)> df) {
        Rho r;
        r.kind = Kind::Custom;
        r.fn = std::move(f);
        r.dfn = std::move(df);
        return r;
    }

    std::string repr() const {
        switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::PowerShift: return "pow:" + std::to_string(p);
        case Kind::Custom: return "custom";
        }
        return "identity";
    }
};

/// Growth rate in the mu-nu bound family: nondecreasing, value 1 at t = 0,
/// diverging as t -> infinity.
struct GrowthRate {
    enum class Kind { Power1p, ExpRate };

    Kind kind = Kind::Power1p;
    double param = 1.0;

    double operator()(double t) const {
        switch (kind) {
        case Kind::Power1p: return std::pow(1.0 + t, param);
        case Kind::ExpRate: return std::exp(param * t);
        }
        return 1.0;
    }

    /// exponent source for closed-form decay verdicts: value behaves like
    /// (1+t)^param (Power1p) or e^{param t} (ExpRate).
    static GrowthRate power1p(double p) {
        if (p <= 0) throw ConstraintError("growth rate: exponent must be positive");
        return {Kind::Power1p, p};
    }

    static GrowthRate exp_rate(double lambda) {
        if (lambda <= 0) throw ConstraintError("growth rate: rate must be positive");
        return {Kind::ExpRate, lambda};
    }

    std::string repr() const {
        return (kind == Kind::Power1p ? "pow:" : "exp:") + std::to_string(param);
    }
};

/// Positive scalar function of time with its logarithmic derivative.
/// These are the factors of the product-form bounds and of the
/// closed-form 2D example system; the log-derivative feeds the
/// coefficient formulas of that system.
struct ScalarFactor {
    enum class Kind { Constant, ExpRate, Power1p, ExpRho, Custom };

    Kind kind = Kind::Constant;
    double c = 1.0;      // Constant value
    double lambda = 0.0; // ExpRate / ExpRho rate
    double p = 0.0;      // Power1p exponent
    Rho rho;             // ExpRho reparameterization
    std::function<double(double)> fn;
    std::function<double(double)> log_deriv_fn;

    double operator()(double t) const {
        switch (kind) {
        case Kind::Constant: return c;
        case Kind::ExpRate: return std::exp(lambda * t);
        case Kind::Power1p: return std::pow(1.0 + t, p);
        case Kind::ExpRho: return std::exp(lambda * rho(t));
        case Kind::Custom: return fn(t);
        }
        return c;
    }

    double log_deriv(double t) const {
        switch (kind) {
        case Kind::Constant: return 0.0;
        case Kind::ExpRate: return lambda;
        case Kind::Power1p: return p / (1.0 + t);
        case Kind::ExpRho: return lambda * rho.deriv(t);
        case Kind::Custom: return log_deriv_fn(t);
        }
        return 0.0;
    }

    static ScalarFactor constant(double value) {
        if (value <= 0) throw ConstraintError("scalar factor: constant must be positive");
        ScalarFactor f;
        f.kind = Kind::Constant;
        f.c = value;
        return f;
    }

    static ScalarFactor exp_rate(double lambda) {
        ScalarFactor f;
        f.kind = Kind::ExpRate;
        f.lambda = lambda;
        return f;
    }

    static ScalarFactor power1p(double p) {
        ScalarFactor f;
        f.kind = Kind::Power1p;
        f.p = p;
        return f;
    }

    static ScalarFactor exp_rho(double lambda, Rho rho) {
        ScalarFactor f;
        f.kind = Kind::ExpRho;
        f.lambda = lambda;
        f.rho = std::move(rho);
        return f;
    }

    static ScalarFactor custom(std::function<double(double)> value,
                               std::function<double(double)> log_deriv) {
        ScalarFactor f;
        f.kind = Kind::Custom;
        f.fn = std::move(value);
        f.log_deriv_fn = std::move(log_deriv);
        return f;
    }

    std::string repr() const {
        switch (kind) {
        case Kind::Constant: return "const:" + std::to_string(c);
        case Kind::ExpRate: return "exp:" + std::to_string(lambda);
        case Kind::Power1p: return "pow:" + std::to_string(p);
        case Kind::ExpRho: return "exp_rho:" + std::to_string(lambda) + "," + rho.repr();
        case Kind::Custom: return "custom";
        }
        return "";
    }
};

namespace detail {

/// log f(t) without overflow for the built-in factor kinds.
inline double log_factor(const ScalarFactor& f, double t) {
    switch (f.kind) {
    case ScalarFactor::Kind::Constant: return std::log(f.c);
    case ScalarFactor::Kind::ExpRate: return f.lambda * t;
    case ScalarFactor::Kind::Power1p: return f.p * std::log1p(t);
    case ScalarFactor::Kind::ExpRho: return f.lambda * f.rho(t);
    case ScalarFactor::Kind::Custom: return std::log(f.fn(t));
    }
    return 0.0;
}

} // namespace detail

} // namespace perron
