#include "catch2/catch_amalgamated.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "perron/bounds.hpp"
#include "perron/quadrature.hpp"
#include "perron/admissibility.hpp"

using namespace perron;
using Catch::Approx;

TEST_CASE("exponential family evaluates its formula") {
    BoundFamily b(ExponentialBounds{1.0, -1.0, 0.0, 0.1});
    REQUIRE(b.eval_a(0.0, 0.0) == Approx(1.0).epsilon(1e-15));
    REQUIRE(b.eval_a(3.0, 3.0) == Approx(std::exp(0.3)).epsilon(1e-14));
    REQUIRE(b.eval_a(2.0, 1.0) == Approx(std::exp(-0.9)).epsilon(1e-14)); // 0.4065697
    REQUIRE(b.eval_b(0.0, 0.0) == Approx(1.0).epsilon(1e-15));
    REQUIRE(b.eval_b(2.0, 1.0) == Approx(std::exp(0.2)).epsilon(1e-14)); // 1.2214028
}

TEST_CASE("polynomial family evaluates its formula") {
    BoundFamily b(PolynomialBounds{2.0, -1.0, 0.0, 0.5});
    // 2 * (4/2)^{-1} * 2^{0.5} = sqrt(2)
    REQUIRE(b.eval_a(3.0, 1.0) == Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("constant-a family is constant on the a side") {
    BoundFamily b(ConstantABounds{3.0, -1.0, 0.1, 1.0});
    for (double s : {0.0, 1.0, 7.5})
        for (double dt : {0.0, 0.5, 10.0}) REQUIRE(b.eval_a(s + dt, s) == Approx(3.0));
}

TEST_CASE("bounds are positive and reject t < s") {
    std::vector<BoundFamily> fams;
    fams.emplace_back(ExponentialBounds{1.5, -0.7, 0.2, 0.05});
    fams.emplace_back(PolynomialBounds{2.0, -1.1, 0.3, 0.2});
    fams.emplace_back(RhoBounds{1.0, -1.0, 0.0, 0.1, Rho::power_shift(0.75)});
    fams.emplace_back(MuNuBounds{1.0, -1.0, 0.0, 0.1, GrowthRate::power1p(1.0),
                                 GrowthRate::power1p(1.0)});
    fams.emplace_back(MixedPolyShiftBounds{1.0, -1.0, 0.0, 0.1});
    fams.emplace_back(ExpPolyBBounds{1.0, -1.0, 0.5, 0.1});
    fams.emplace_back(ConstantABounds{2.0, -0.5, 0.2, 1.0});

    Rng rng(17);
    for (const auto& b : fams) {
        for (int i = 0; i < 40; ++i) {
            const double s = rng.uniform(0.0, 30.0);
            const double t = s + rng.uniform(0.0, 30.0);
            REQUIRE(b.eval_a(t, s) > 0.0);
            REQUIRE(b.eval_b(t, s) > 0.0);
        }
        REQUIRE_THROWS_AS(b.eval_a(1.0, 2.0), DomainError);
        REQUIRE_THROWS_AS(b.eval_b(1.0, 2.0), DomainError);
    }
}

TEST_CASE("family constraints are enforced") {
    REQUIRE_THROWS_AS(BoundFamily(ExponentialBounds{0.5, -1.0, 0.0, 0.1}), ConstraintError);
    REQUIRE_THROWS_AS(BoundFamily(ExponentialBounds{1.0, 0.5, 0.0, 0.1}), ConstraintError);
    REQUIRE_THROWS_AS(BoundFamily(ConstantABounds{0.2, -1.0, 0.1, 1.0}), ConstraintError);
    // growth rates must be normalized at zero; built-ins always are
    REQUIRE_NOTHROW(BoundFamily(MuNuBounds{1.0, -1.0, 0.0, 0.1, GrowthRate::exp_rate(0.3),
                                           GrowthRate::power1p(2.0)}));
}

TEST_CASE("product form reduces to the exponential family pointwise") {
    BoundFamily expo(ExponentialBounds{1.4, -0.8, 0.2, 0.07});
    const auto factors = expo.product_factors();
    REQUIRE(factors.has_value());
    BoundFamily prod(*factors);
    Rng rng(23);
    for (int i = 0; i < 120; ++i) {
        const double s = rng.uniform(0.0, 25.0);
        const double t = s + rng.uniform(0.0, 25.0);
        REQUIRE(prod.eval_a(t, s) == Approx(expo.eval_a(t, s)).epsilon(1e-12));
        REQUIRE(prod.eval_b(t, s) == Approx(expo.eval_b(t, s)).epsilon(1e-12));
    }
}

TEST_CASE("decay condition closed-form verdicts") {
    QuadratureConfig cfg;

    SECTION("exponential pass when a+eps<b") {
        BoundFamily b(ExponentialBounds{1.0, -1.0, 0.0, 0.1});
        const auto rep = check_decay_condition(b, {0.0, 2.0}, 200.0, 1e-3, cfg);
        REQUIRE(rep.verdict == TriState::Pass);
        REQUIRE(rep.closed_verdict.has_value());
        REQUIRE(*rep.closed_verdict);
        REQUIRE(rep.numeric_pass);
    }

    SECTION("exponential fail when a+eps>=b") {
        BoundFamily b(ExponentialBounds{1.0, -0.1, 0.0, 0.5});
        const auto rep = check_decay_condition(b, {0.0}, 200.0, 1e-3, cfg);
        REQUIRE(rep.verdict == TriState::Fail);
        REQUIRE_FALSE(rep.numeric_pass);
    }

    SECTION("constant product fails numerically") {
        BoundFamily b(CustomBounds{[](double, double) { return 0.0; },
                                   [](double, double) { return 0.0; }});
        const auto rep = check_decay_condition(b, {0.0}, 100.0, 1e-3, cfg);
        REQUIRE(rep.verdict == TriState::Fail);
    }

    SECTION("forced-generic numeric verdict agrees with the closed form") {
        QuadratureConfig forced;
        forced.force_generic = true;
        BoundFamily pass_b(ExponentialBounds{1.0, -1.0, 0.0, 0.1});
        BoundFamily fail_b(ExponentialBounds{1.0, -0.1, 0.0, 0.5});
        REQUIRE(check_decay_condition(pass_b, {0.0, 1.0}, 400.0, 1e-3, forced).verdict ==
                TriState::Pass);
        REQUIRE(check_decay_condition(fail_b, {0.0, 1.0}, 400.0, 1e-3, forced).verdict ==
                TriState::Fail);
    }
}

TEST_CASE("tabulated bounds round-trip and interpolate log-linearly") {
    // Tabulate the exponential family on a coarse grid.
    BoundFamily expo(ExponentialBounds{1.0, -1.0, 0.0, 0.1});
    TabulatedBounds tab;
    for (int i = 0; i <= 8; ++i) tab.t_grid.push_back(2.0 * i);
    for (int j = 0; j <= 4; ++j) tab.s_grid.push_back(2.0 * j);
    for (double t : tab.t_grid)
        for (double s : tab.s_grid) {
            const double ss = std::min(s, t);
            tab.a.push_back(expo.eval_a(t, ss));
            tab.b.push_back(expo.eval_b(t, ss));
        }
    BoundFamily tb(tab);

    SECTION("CSV round trip is exact") {
        const auto path = std::filesystem::temp_directory_path() / "perron_tab_bounds.csv";
        tb.save_tabulated_csv(path.string());
        BoundFamily loaded = BoundFamily::tabulated_from_csv(path.string());
        const auto* orig = tb.get_if<TabulatedBounds>();
        const auto* back = loaded.get_if<TabulatedBounds>();
        REQUIRE(back != nullptr);
        REQUIRE(back->t_grid == orig->t_grid);
        REQUIRE(back->s_grid == orig->s_grid);
        REQUIRE(back->a == orig->a);
        REQUIRE(back->b == orig->b);
        std::filesystem::remove(path);
    }

    SECTION("log-linear interpolation is exact for exponential data") {
        // Node-aligned in s, midpoint in t: log a is linear in t.
        REQUIRE(tb.eval_a(5.0, 2.0) == Approx(expo.eval_a(5.0, 2.0)).epsilon(1e-12));
        REQUIRE(tb.eval_b(9.0, 4.0) == Approx(expo.eval_b(9.0, 4.0)).epsilon(1e-12));
    }
}
