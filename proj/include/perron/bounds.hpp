#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "perron/core.hpp"
#include "perron/scalar_functions.hpp"

namespace perron {

// Dichotomy bound families. Each family evaluates the pair
//   a(t,s) >= |T_{t,s} P|,   b(t,s) >= |(T_{t,s}|_F)^{-1} Q_t|
// on t >= s >= 0. Evaluation goes through log space so that products of
// huge and tiny factors (long-horizon tails) neither overflow nor lose
// the exact cancellation at t = s.

/// a(t,s) = (fa(s)/fa(t)) fc(s), b(t,s) = (fb(s)/fb(t)) fd(t) with
/// positive factors and fc, fd >= 1.
struct ProductBounds {
    ScalarFactor fa, fb, fc, fd;
};

/// a(t,s) = D e^{a(t-s) + eps s}, b(t,s) = D e^{-b(t-s) + eps t}.
struct ExponentialBounds {
    double D = 1.0;
    double a = -1.0;
    double b = 0.0;
    double eps = 0.0;
};

/// a(t,s) = D ((t+1)/(s+1))^a (s+1)^eps, b analog with -b and (t+1)^eps.
struct PolynomialBounds {
    double D = 1.0;
    double a = -1.0;
    double b = 0.0;
    double eps = 0.1;
};

/// Exponential rates driven by an increasing reparameterization rho.
struct RhoBounds {
    double D = 1.0;
    double a = -1.0;
    double b = 0.0;
    double eps = 0.0;
    Rho rho;
};

/// a(t,s) = D (mu(t)/mu(s))^a nu(s)^eps, b(t,s) = D (mu(t)/mu(s))^{-b} nu(t)^eps.
struct MuNuBounds {
    double D = 1.0;
    double a = -1.0;
    double b = 0.0;
    double eps = 0.1;
    GrowthRate mu, nu;
};

/// a(t,s) = D (t-s+1)^a (s+1)^eps, b(t,s) = D (t-s+1)^{-b} (t+1)^eps.
struct MixedPolyShiftBounds {
    double D = 1.0;
    double a = -1.0;
    double b = 0.0;
    double eps = 0.1;
};

/// Exponential contraction on E paired with a polynomial bound on F:
/// a(t,s) = D e^{a(t-s)+eps s}, b(t,s) = D ((t+1)/(s+1))^{-b} (t+1)^eps.
struct ExpPolyBBounds {
    double D = 1.0;
    double a = -1.0;
    double b = 0.0;
    double eps = 0.1;
};

/// a(t,s) = L constant, b(t,s) = D e^{a(t-s) + eps t} with a < 0.
struct ConstantABounds {
    double L = 1.0;
    double a = -1.0;
    double eps = 0.1;
    double D = 1.0;
};

/// Bounds tabulated on a rectangular (t, s) grid, interpolated (and
/// extrapolated) log-linearly in both variables; log-linear is exact
/// for products of exponentials and powers on aligned grids. Raw values
/// are stored so a save/load cycle reproduces them bit-exactly.
struct TabulatedBounds {
    std::vector<double> t_grid; // ascending
    std::vector<double> s_grid; // ascending
    std::vector<double> a;      // row-major [t][s], positive
    std::vector<double> b;
};

/// Escape hatch for tests and library extensions: arbitrary callables.
struct CustomBounds {
    std::function<double(double, double)> log_a;
    std::function<double(double, double)> log_b;
};

class BoundFamily {
public:
    using Kind = std::variant<ProductBounds, ExponentialBounds, PolynomialBounds, RhoBounds,
                              MuNuBounds, MixedPolyShiftBounds, ExpPolyBBounds, ConstantABounds,
                              TabulatedBounds, CustomBounds>;

    BoundFamily(Kind kind) : kind_(std::move(kind)) { validate(); }

    const Kind& kind() const { return kind_; }

    template <typename T>
    const T* get_if() const {
        return std::get_if<T>(&kind_);
    }

    double log_a(double t, double s) const {
        check_args(t, s);
        return log_a_raw(t, s);
    }

    double log_b(double t, double s) const {
        check_args(t, s);
        return log_b_raw(t, s);
    }

    double eval_a(double t, double s) const { return std::exp(log_a(t, s)); }
    double eval_b(double t, double s) const { return std::exp(log_b(t, s)); }

    /// Product-form representation (fa, fb, fc, fd) when the family has one.
    std::optional<ProductBounds> product_factors() const {
        if (const auto* p = get_if<ProductBounds>()) return *p;
        if (const auto* e = get_if<ExponentialBounds>())
            return ProductBounds{ScalarFactor::exp_rate(-e->a), ScalarFactor::exp_rate(e->b),
                                 scaled_factor(e->D, ScalarFactor::exp_rate(e->eps)),
                                 scaled_factor(e->D, ScalarFactor::exp_rate(e->eps))};
        if (const auto* p = get_if<PolynomialBounds>())
            return ProductBounds{ScalarFactor::power1p(-p->a), ScalarFactor::power1p(p->b),
                                 scaled_power(p->D, p->eps), scaled_power(p->D, p->eps)};
        if (const auto* r = get_if<RhoBounds>())
            return ProductBounds{ScalarFactor::exp_rho(-r->a, r->rho),
                                 ScalarFactor::exp_rho(r->b, r->rho),
                                 scaled_factor(r->D, ScalarFactor::exp_rho(r->eps, r->rho)),
                                 scaled_factor(r->D, ScalarFactor::exp_rho(r->eps, r->rho))};
        if (const auto* m = get_if<MuNuBounds>()) {
            auto pow_of = [](const GrowthRate& g, double expo) {
                if (g.kind == GrowthRate::Kind::Power1p)
                    return ScalarFactor::power1p(g.param * expo);
                return ScalarFactor::exp_rate(g.param * expo);
            };
            auto scaled_pow = [&](const GrowthRate& g, double expo, double D) {
                ScalarFactor f = pow_of(g, expo);
                auto base = f;
                return ScalarFactor::custom([base, D](double t) { return D * base(t); },
                                            [base](double t) { return base.log_deriv(t); });
            };
            return ProductBounds{pow_of(m->mu, -m->a), pow_of(m->mu, m->b),
                                 scaled_pow(m->nu, m->eps, m->D), scaled_pow(m->nu, m->eps, m->D)};
        }
        return std::nullopt;
    }

    static BoundFamily tabulated_from_csv(const std::string& path);
    void save_tabulated_csv(const std::string& path) const;

private:
    static ScalarFactor scaled_factor(double D, ScalarFactor base) {
        if (D == 1.0) return base;
        auto b = base;
        return ScalarFactor::custom([b, D](double t) { return D * b(t); },
                                    [b](double t) { return b.log_deriv(t); });
    }

    static ScalarFactor scaled_power(double D, double p) {
        return scaled_factor(D, ScalarFactor::power1p(p));
    }

    static void check_args(double t, double s) {
        if (s < 0) throw DomainError("bounds: negative time");
        if (t < s) throw DomainError("bounds: requires t >= s");
    }

    void validate() const {
        if (const auto* e = get_if<ExponentialBounds>()) {
            if (e->D < 1.0) throw ConstraintError("exponential bounds: D must be >= 1");
            if (!(e->a < 0.0) || e->b < 0.0)
                throw ConstraintError("exponential bounds: need a < 0 <= b");
            if (e->eps < 0.0) throw ConstraintError("exponential bounds: eps must be >= 0");
        } else if (const auto* p = get_if<PolynomialBounds>()) {
            if (p->D < 1.0) throw ConstraintError("polynomial bounds: D must be >= 1");
            if (!(p->a < 0.0) || p->b < 0.0)
                throw ConstraintError("polynomial bounds: need a < 0 <= b");
            if (p->eps <= 0.0) throw ConstraintError("polynomial bounds: eps must be > 0");
        } else if (const auto* c = get_if<ConstantABounds>()) {
            if (c->L < 1.0) throw ConstraintError("constant bounds: L must be >= 1");
            if (!(c->a < 0.0)) throw ConstraintError("constant bounds: need a < 0");
            if (c->eps <= 0.0) throw ConstraintError("constant bounds: eps must be > 0");
        } else if (const auto* m = get_if<MuNuBounds>()) {
            // Growth rates must start at 1 and be nondecreasing; the
            // built-in kinds guarantee both, so only the normalization
            // needs a runtime check.
            if (std::abs(m->mu(0.0) - 1.0) > 1e-12 || std::abs(m->nu(0.0) - 1.0) > 1e-12)
                throw ConstraintError("mu-nu bounds: growth rates must satisfy mu(0)=nu(0)=1");
        } else if (const auto* t = get_if<TabulatedBounds>()) {
            if (t->t_grid.size() < 2 || t->s_grid.size() < 2)
                throw ConstraintError("tabulated bounds: need at least a 2x2 grid");
            if (t->a.size() != t->t_grid.size() * t->s_grid.size() || t->b.size() != t->a.size())
                throw ConstraintError("tabulated bounds: value array sizes do not match grid");
            for (double v : t->a)
                if (!(v > 0)) throw ConstraintError("tabulated bounds: a values must be positive");
            for (double v : t->b)
                if (!(v > 0)) throw ConstraintError("tabulated bounds: b values must be positive");
        }
    }

    double log_a_raw(double t, double s) const;
    double log_b_raw(double t, double s) const;

    Kind kind_;
};

namespace detail {

// Bracketing interval plus fraction; fractions outside [0,1] extrapolate
// the boundary interval.
inline double interp_fraction(const std::vector<double>& grid, double x, std::size_t& i) {
    if (x <= grid.front()) {
        i = 0;
    } else if (x >= grid.back()) {
        i = grid.size() - 2;
    } else {
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        i = static_cast<std::size_t>(it - grid.begin()) - 1;
    }
    return (x - grid[i]) / (grid[i + 1] - grid[i]);
}

inline double bilinear_log(const std::vector<double>& values, std::size_t ncols, std::size_t it,
                           double ft, std::size_t is, double fs) {
    const double v00 = std::log(values[it * ncols + is]);
    const double v01 = std::log(values[it * ncols + is + 1]);
    const double v10 = std::log(values[(it + 1) * ncols + is]);
    const double v11 = std::log(values[(it + 1) * ncols + is + 1]);
    return (1 - ft) * ((1 - fs) * v00 + fs * v01) + ft * ((1 - fs) * v10 + fs * v11);
}

} // namespace detail

inline double BoundFamily::log_a_raw(double t, double s) const {
    struct Visitor {
        double t, s;
        double operator()(const ProductBounds& p) const {
            return detail::log_factor(p.fa, s) - detail::log_factor(p.fa, t) +
                   detail::log_factor(p.fc, s);
        }
        double operator()(const ExponentialBounds& e) const {
            return std::log(e.D) + e.a * (t - s) + e.eps * s;
        }
        double operator()(const PolynomialBounds& p) const {
            return std::log(p.D) + p.a * (std::log1p(t) - std::log1p(s)) + p.eps * std::log1p(s);
        }
        double operator()(const RhoBounds& r) const {
            return std::log(r.D) + r.a * (r.rho(t) - r.rho(s)) + r.eps * r.rho(s);
        }
        double operator()(const MuNuBounds& m) const {
            return std::log(m.D) + m.a * (std::log(m.mu(t)) - std::log(m.mu(s))) +
                   m.eps * std::log(m.nu(s));
        }
        double operator()(const MixedPolyShiftBounds& m) const {
            return std::log(m.D) + m.a * std::log1p(t - s) + m.eps * std::log1p(s);
        }
        double operator()(const ExpPolyBBounds& e) const {
            return std::log(e.D) + e.a * (t - s) + e.eps * s;
        }
        double operator()(const ConstantABounds& c) const { return std::log(c.L); }
        double operator()(const TabulatedBounds& tab) const {
            std::size_t it, is;
            const double ft = detail::interp_fraction(tab.t_grid, t, it);
            const double fs = detail::interp_fraction(tab.s_grid, s, is);
            return detail::bilinear_log(tab.a, tab.s_grid.size(), it, ft, is, fs);
        }
        double operator()(const CustomBounds& c) const { return c.log_a(t, s); }
    };
    return std::visit(Visitor{t, s}, kind_);
}

inline double BoundFamily::log_b_raw(double t, double s) const {
    struct Visitor {
        double t, s;
        double operator()(const ProductBounds& p) const {
            return detail::log_factor(p.fb, s) - detail::log_factor(p.fb, t) +
                   detail::log_factor(p.fd, t);
        }
        double operator()(const ExponentialBounds& e) const {
            return std::log(e.D) - e.b * (t - s) + e.eps * t;
        }
        double operator()(const PolynomialBounds& p) const {
            return std::log(p.D) - p.b * (std::log1p(t) - std::log1p(s)) + p.eps * std::log1p(t);
        }
        double operator()(const RhoBounds& r) const {
            return std::log(r.D) - r.b * (r.rho(t) - r.rho(s)) + r.eps * r.rho(t);
        }
        double operator()(const MuNuBounds& m) const {
            return std::log(m.D) - m.b * (std::log(m.mu(t)) - std::log(m.mu(s))) +
                   m.eps * std::log(m.nu(t));
        }
        double operator()(const MixedPolyShiftBounds& m) const {
            return std::log(m.D) - m.b * std::log1p(t - s) + m.eps * std::log1p(t);
        }
        double operator()(const ExpPolyBBounds& e) const {
            return std::log(e.D) - e.b * (std::log1p(t) - std::log1p(s)) + e.eps * std::log1p(t);
        }
        double operator()(const ConstantABounds& c) const {
            return std::log(c.D) + c.a * (t - s) + c.eps * t;
        }
        double operator()(const TabulatedBounds& tab) const {
            std::size_t it, is;
            const double ft = detail::interp_fraction(tab.t_grid, t, it);
            const double fs = detail::interp_fraction(tab.s_grid, s, is);
            return detail::bilinear_log(tab.b, tab.s_grid.size(), it, ft, is, fs);
        }
        double operator()(const CustomBounds& c) const { return c.log_b(t, s); }
    };
    return std::visit(Visitor{t, s}, kind_);
}

inline BoundFamily BoundFamily::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated bounds file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("tabulated bounds: empty file " + path);
    // normalize the header before checking
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return std::isspace(c) || c == '\r'; }),
                 header.end());
    if (header != "t,s,a,b")
        throw ConfigError("tabulated bounds: expected header 't,s,a,b', got '" + line + "'");

    struct Row {
        double t, s, a, b;
    };
    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Row r{};
        char comma;
        if (!(ss >> r.t >> comma >> r.s >> comma >> r.a >> comma >> r.b))
            throw ConfigError("tabulated bounds: malformed row", lineno);
        if (r.a <= 0 || r.b <= 0)
            throw ConfigError("tabulated bounds: values must be positive", lineno);
        rows.push_back(r);
    }

    TabulatedBounds tab;
    for (const auto& r : rows) {
        tab.t_grid.push_back(r.t);
        tab.s_grid.push_back(r.s);
    }
    auto dedup_sort = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup_sort(tab.t_grid);
    dedup_sort(tab.s_grid);
    tab.a.assign(tab.t_grid.size() * tab.s_grid.size(),
                 std::numeric_limits<double>::quiet_NaN());
    tab.b = tab.a;
    auto index_of = [](const std::vector<double>& grid, double x) {
        return static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), x) - grid.begin());
    };
    for (const auto& r : rows) {
        const std::size_t it = index_of(tab.t_grid, r.t);
        const std::size_t is = index_of(tab.s_grid, r.s);
        tab.a[it * tab.s_grid.size() + is] = r.a;
        tab.b[it * tab.s_grid.size() + is] = r.b;
    }
    for (double v : tab.a)
        if (std::isnan(v))
            throw ConfigError("tabulated bounds: grid is not rectangular (missing nodes)");
    return BoundFamily(std::move(tab));
}

inline void BoundFamily::save_tabulated_csv(const std::string& path) const {
    const auto* tab = get_if<TabulatedBounds>();
    if (!tab) throw DomainError("save_tabulated_csv: family is not tabulated");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write tabulated bounds file: " + path);
    out << "t,s,a,b\n";
    for (std::size_t it = 0; it < tab->t_grid.size(); ++it)
        for (std::size_t is = 0; is < tab->s_grid.size(); ++is)
            out << format_g17(tab->t_grid[it]) << ',' << format_g17(tab->s_grid[is]) << ','
                << format_g17(tab->a[it * tab->s_grid.size() + is]) << ','
                << format_g17(tab->b[it * tab->s_grid.size() + is]) << '\n';
}

} // namespace perron
