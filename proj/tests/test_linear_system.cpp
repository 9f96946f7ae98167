#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "perron/dichotomy_check.hpp"
#include "perron/linear_system.hpp"

#include "oracles.hpp"

using namespace perron;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

LinearSystem exp_demo_system() {
    // Matches the exponential bound family (D=1, a=-1, b=0, eps=0.1).
    return build_product_example(ScalarFactor::exp_rate(1.0), ScalarFactor::constant(1.0),
                                 ScalarFactor::exp_rate(0.1), ScalarFactor::constant(1.0));
}

} // namespace

TEST_CASE("evolve at t = s is the identity") {
    auto sys = exp_demo_system();
    StateVec v(2);
    v << 0.7, -1.3;
    const StateVec out = sys.evolve(3.25, 3.25, v);
    REQUIRE(out[0] == v[0]);
    REQUIRE(out[1] == v[1]);
}

TEST_CASE("closed-form evolution matches the diagonal formulas") {
    // fa = e^t, fb = fc = fd = 1: U(t,s) = e^{-(t-s)}, V = 1.
    auto sys = build_product_example(ScalarFactor::exp_rate(1.0), ScalarFactor::constant(1.0),
                                     ScalarFactor::constant(1.0), ScalarFactor::constant(1.0));
    StateVec v(2);
    v << 1.0, 1.0;
    const StateVec out = sys.evolve(pi, 0.0, v);
    REQUIRE(out[0] == Approx(std::exp(-pi)).epsilon(1e-13));
    REQUIRE(out[1] == Approx(1.0).epsilon(1e-13));

    // Numeric oracle: integrate the coefficient ODE directly.
    auto rhs = [&sys](double t, const StateVec& y) -> StateVec { return sys.coefficient(t) * y; };
    const StateVec num = oracles::rk4_fixed(rhs, 0.0, pi, v, 20000);
    REQUIRE(num[0] == Approx(out[0]).epsilon(1e-10));
    REQUIRE(num[1] == Approx(out[1]).margin(1e-10));
}

TEST_CASE("oscillating factor is picked up exactly at half periods") {
    auto sys = exp_demo_system();
    StateVec v(2);
    v << 1.0, 0.0;
    // U(2pi, pi) = e^{-pi} * e^{0.1 pi} because cos(2pi)=1 and cos(pi)=-1.
    const StateVec out = sys.evolve(2 * pi, pi, v);
    REQUIRE(out[0] == Approx(std::exp(-0.9 * pi)).epsilon(1e-12));
    REQUIRE(out[1] == 0.0);

    auto rhs = [&sys](double t, const StateVec& y) -> StateVec { return sys.coefficient(t) * y; };
    const StateVec num = oracles::rk4_fixed(rhs, pi, 2 * pi, v, 20000);
    REQUIRE(num[0] == Approx(out[0]).epsilon(1e-9));
}

TEST_CASE("evolve rejects t < s and non-finite horizons") {
    auto sys = exp_demo_system();
    StateVec v(2);
    v << 1.0, 1.0;
    REQUIRE_THROWS_AS(sys.evolve(1.0, 2.0, v), DomainError);

    // fb = e^{60 t} blows V past the guard well before t = 1e3.
    auto grower = build_product_example(ScalarFactor::constant(1.0), ScalarFactor::exp_rate(60.0),
                                        ScalarFactor::constant(1.0), ScalarFactor::constant(1.0));
    REQUIRE_THROWS_AS(grower.evolve(1000.0, 0.0, v), DivergenceError);
}

TEST_CASE("evolve_inverse_F undoes the F-restricted evolution") {
    auto sys = exp_demo_system();
    StateVec w(2);
    w << 0.0, 2.5;

    SECTION("t = s leaves w unchanged") {
        const StateVec out = sys.evolve_inverse_F(4.0, 4.0, w);
        REQUIRE(out[1] == w[1]);
        REQUIRE(out[0] == 0.0);
    }

    SECTION("constant fb, fd give V = 1") {
        const StateVec out = sys.evolve_inverse_F(7.0, 2.0, w);
        REQUIRE(out[1] == Approx(w[1]).epsilon(1e-14));
    }

    SECTION("inverse composed with evolve is the identity on F") {
        Rng rng(7);
        for (int i = 0; i < 25; ++i) {
            const double s = rng.uniform(0.0, 10.0);
            const double t = s + rng.uniform(0.0, 10.0);
            StateVec f(2);
            f << 0.0, rng.uniform(-2.0, 2.0);
            const StateVec image = sys.evolve(t, s, f);
            const StateVec back = sys.evolve_inverse_F(t, s, image);
            REQUIRE(back[1] == Approx(f[1]).margin(1e-9));
        }
    }
}

TEST_CASE("cocycle property holds on sampled triples") {
    auto sys = exp_demo_system();

    SECTION("degenerate triple has zero residual") {
        const auto rep = check_cocycle(sys, {{2.0, 2.0, 2.0}}, 1e-12);
        REQUIRE(rep.worst_residual == 0.0);
        REQUIRE(rep.pass);
    }

    SECTION("closed-form products telescope") {
        const auto rep = check_cocycle(sys, {{2 * pi, pi, 0.0}, {7.0, 3.0, 1.0}}, 1e-9);
        REQUIRE(rep.pass);
        REQUIRE(rep.worst_residual < 1e-9);
    }

    SECTION("coefficient kind matches its analytic flow") {
        auto A = [](double) {
            StateMat M = StateMat::Zero(2, 2);
            M(0, 0) = -1.0;
            M(1, 1) = 1.0;
            return M;
        };
        LinearSystem sys2(CoefficientSystem{A, {}}, Splitting::coordinate(1, 1));
        const auto rep = check_cocycle(sys2, {{2.0, 1.0, 0.0}}, 1e-8);
        REQUIRE(rep.pass);

        const StateMat T = sys2.evolve_matrix(2.0, 0.5);
        REQUIRE(T(0, 0) == Approx(std::exp(-1.5)).epsilon(1e-9));
        REQUIRE(T(1, 1) == Approx(std::exp(1.5)).epsilon(1e-9));
        REQUIRE(std::abs(T(0, 1)) < 1e-12);
    }
}

TEST_CASE("prepared evolution cache reproduces direct integration") {
    auto A = [](double t) {
        StateMat M = StateMat::Zero(2, 2);
        M(0, 0) = -1.0 - 0.1 * std::sin(t);
        M(1, 1) = 0.5;
        return M;
    };
    LinearSystem direct(CoefficientSystem{A, {}}, Splitting::coordinate(1, 1));
    LinearSystem cached(CoefficientSystem{A, {}}, Splitting::coordinate(1, 1));
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
    cached.prepare_cache(grid);

    StateVec v(2);
    v << 1.0, -0.25;
    for (double t : {0.7, 3.3, 6.8, 9.9}) {
        const StateVec a = direct.evolve(t, 0.2, v);
        const StateVec b = cached.evolve(t, 0.2, v);
        REQUIRE(a[0] == Approx(b[0]).epsilon(1e-8));
        REQUIRE(a[1] == Approx(b[1]).epsilon(1e-8));
    }
}

TEST_CASE("build_product_example validates and is sharp") {
    SECTION("all-ones factors give the identity flow") {
        auto sys = build_product_example(ScalarFactor::constant(1.0), ScalarFactor::constant(1.0),
                                         ScalarFactor::constant(1.0), ScalarFactor::constant(1.0));
        StateVec v(2);
        v << 0.3, -0.8;
        const StateVec out = sys.evolve(11.0, 2.0, v);
        REQUIRE(out[0] == Approx(v[0]).epsilon(1e-14));
        REQUIRE(out[1] == Approx(v[1]).epsilon(1e-14));
    }

    SECTION("oscillation factors below one are rejected") {
        REQUIRE_THROWS_AS(
            build_product_example(ScalarFactor::constant(1.0), ScalarFactor::constant(1.0),
                                  ScalarFactor::constant(0.5), ScalarFactor::constant(1.0)),
            ConstraintError);
    }

    SECTION("|T P| attains a(t,s) at t = 2k pi, s = (2k-1) pi") {
        auto sys = exp_demo_system();
        BoundFamily bounds(ExponentialBounds{1.0, -1.0, 0.0, 0.1});
        for (int k = 1; k <= 3; ++k) {
            const double t = 2 * k * pi;
            const double s = (2 * k - 1) * pi;
            const double opn = std::abs(sys.product().U(t, s));
            REQUIRE(opn == Approx(bounds.eval_a(t, s)).epsilon(1e-9));
        }
    }

    SECTION("|T P| <= a(t,s) on a sample grid") {
        auto sys = exp_demo_system();
        BoundFamily bounds(ExponentialBounds{1.0, -1.0, 0.0, 0.1});
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            const double s = rng.uniform(0.0, 20.0);
            const double t = s + rng.uniform(0.0, 20.0);
            REQUIRE(std::abs(sys.product().U(t, s)) <=
                    bounds.eval_a(t, s) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("splitting validates projections and norms") {
    SECTION("non-idempotent matrix is rejected") {
        StateMat M = StateMat::Zero(2, 2);
        M(0, 0) = 1.0;
        M(0, 1) = 0.5;
        M(1, 1) = 1.0; // M*M != M
        REQUIRE_THROWS_AS(Splitting(M, 1), ConstraintError);
    }

    SECTION("rank mismatch is rejected") {
        StateMat I = StateMat::Identity(3, 3);
        REQUIRE_THROWS_AS(Splitting(I, 1), ConstraintError);
    }

    SECTION("product norm splits coordinates") {
        auto sp = Splitting::coordinate(1, 1);
        StateVec v(2);
        v << 3.0, -4.0;
        REQUIRE(sp.product_norm(v) == Approx(7.0));
    }

    SECTION("oblique projection round-trips factor coordinates") {
        StateMat P = StateMat::Zero(2, 2);
        P(0, 0) = 1.0;
        P(0, 1) = 1.0; // projection onto span(e1) along span(e2 - e1)
        Splitting sp(P, 1);
        StateVec v(2);
        v << 2.0, 5.0;
        const StateVec rebuilt = sp.assemble(sp.coords_E(v), sp.coords_F(v));
        REQUIRE(rebuilt[0] == Approx(v[0]).margin(1e-12));
        REQUIRE(rebuilt[1] == Approx(v[1]).margin(1e-12));
    }
}

TEST_CASE("splitting commutes with the evolution on sampled grids") {
    auto sys = exp_demo_system();
    const auto& sp = sys.splitting();
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const double s = rng.uniform(0.0, 8.0);
        const double t = s + rng.uniform(0.0, 8.0);
        StateVec v(2);
        v << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        const StateVec lhs = sys.evolve(t, s, sp.P() * v);
        const StateVec rhs = sp.P() * sys.evolve(t, s, v);
        REQUIRE(sp.product_norm(lhs - rhs) <= 1e-8 * sp.product_norm(v) + 1e-14);
    }
}

TEST_CASE("dichotomy bounds verify against the product example") {
    auto sys = exp_demo_system();
    BoundFamily bounds(ExponentialBounds{1.0, -1.0, 0.0, 0.1});

    std::vector<std::pair<double, double>> grid;
    Rng rng(5);
    for (int i = 0; i < 60; ++i) {
        const double s = rng.uniform(0.0, 15.0);
        grid.emplace_back(s + rng.uniform(0.0, 15.0), s);
    }
    for (int k = 1; k <= 2; ++k) grid.emplace_back(2 * k * pi, (2 * k - 1) * pi);

    SECTION("matching bounds give zero violations") {
        const auto rep = verify_dichotomy_bounds(sys, bounds, grid, 1e-12);
        REQUIRE(rep.pass);
        REQUIRE(rep.violations.empty());
    }

    SECTION("halved bounds are violated at the sharpness points") {
        BoundFamily halved(CustomBounds{
            [&bounds](double t, double s) { return bounds.log_a(t, s) + std::log(0.5); },
            [&bounds](double t, double s) { return bounds.log_b(t, s) + std::log(0.5); }});
        const auto rep = verify_dichotomy_bounds(sys, halved, grid, 1e-12);
        REQUIRE_FALSE(rep.pass);
        bool sharp_hit = false;
        for (const auto& v : rep.violations)
            if (v.side == 'a' && std::abs(v.t - 2 * pi) < 1e-9) sharp_hit = true;
        REQUIRE(sharp_hit);
    }

    SECTION("trivial system against unit bounds") {
        auto id = build_product_example(ScalarFactor::constant(1.0), ScalarFactor::constant(1.0),
                                        ScalarFactor::constant(1.0), ScalarFactor::constant(1.0));
        BoundFamily unit(CustomBounds{[](double, double) { return 0.0; },
                                      [](double, double) { return 0.0; }});
        const auto rep = verify_dichotomy_bounds(id, unit, grid, 1e-12);
        REQUIRE(rep.pass);
    }
}
