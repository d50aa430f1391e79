#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sbes/posterior.hpp"

using namespace sbes;
using Catch::Approx;

namespace {

// Reference posterior after the worked update: uniform on [0,1], pair
// (0.25, 0.75), g = 0.8, gbar = 0.6.
PiecewiseDensity worked_update(int y_hat) {
    PiecewiseDensity p(0.0, 1.0);
    p.update({y_hat, 0.25, 0.75}, 0.8, 0.6);
    return p;
}

PiecewiseDensity random_density(Rng& rng, double lo = 0.0, double hi = 1.0) {
    const int pieces = rng.uniform_int(1, 6);
    std::vector<double> breaks;
    for (int i = 1; i < pieces; ++i) breaks.push_back(lo + (hi - lo) * i / pieces);
    std::vector<double> dens(pieces);
    for (double& d : dens) d = rng.uniform(0.01, 3.0);
    return {lo, hi, breaks, dens};
}

}  // namespace

TEST_CASE("cdf of the uniform density is linear") {
    PiecewiseDensity p(0.0, 1.0);
    CHECK(p.cdf(0.25) == Approx(0.25).margin(1e-15));
    CHECK(p.cdf(0.0) == 0.0);
    CHECK(p.cdf(1.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("cdf integrates piecewise values exactly") {
    PiecewiseDensity p(0.0, 1.0, {0.5}, {0.4, 1.6});
    CHECK(p.cdf(0.75) == Approx(0.6).margin(1e-12));  // 0.2 + 0.4 by hand
    CHECK(p.cdf(1.0) == Approx(1.0).margin(1e-12));
    CHECK_THROWS_AS(p.cdf(1.5), std::invalid_argument);
}

TEST_CASE("comparison update matches the hand-evaluated region factors") {
    SECTION("y = 1") {
        const auto p = worked_update(1);
        REQUIRE(p.interval_count() == 3);
        CHECK(p.densities()[0] == Approx(4.0 / 9.0).margin(1e-12));
        CHECK(p.densities()[1] == Approx(8.0 / 9.0).margin(1e-12));
        CHECK(p.densities()[2] == Approx(16.0 / 9.0).margin(1e-12));
    }
    SECTION("y = 0") {
        const auto p = worked_update(0);
        REQUIRE(p.interval_count() == 3);
        CHECK(p.densities()[0] == Approx(16.0 / 11.0).margin(1e-12));
        CHECK(p.densities()[1] == Approx(12.0 / 11.0).margin(1e-12));
        CHECK(p.densities()[2] == Approx(4.0 / 11.0).margin(1e-12));
    }
}

TEST_CASE("uninformative comparison leaves the density unchanged") {
    PiecewiseDensity p(0.0, 1.0, {0.3}, {0.5, 1.5});
    const auto before = p.densities();
    p.update({1, 0.2, 0.6}, 0.5, 0.5);
    for (std::size_t i = 0; i < p.interval_count(); ++i) {
        const double x = 0.5 * (p.edges()[i] + p.edges()[i + 1]);
        const double expected = x < 0.3 ? before[0] : before[1];
        CHECK(p.densities()[i] == Approx(expected).margin(1e-12));
    }
}

TEST_CASE("normalizer identity U1 + U0 = 1") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double g = rng.uniform01(), gb = rng.uniform01();
        double a = rng.uniform01(), b = rng.uniform01();
        const double fl = std::min(a, b), fr = std::max(a, b);
        CHECK(std::abs(normalizer_u1(g, gb, fl, fr) + normalizer_u0(g, gb, fl, fr) - 1.0) <=
              1e-12);
    }
}

TEST_CASE("entropy closed form") {
    CHECK(PiecewiseDensity(0.0, 1.0).entropy_bits() == Approx(0.0).margin(1e-12));
    CHECK(PiecewiseDensity(0.0, 4.0).entropy_bits() == Approx(2.0).margin(1e-12));
    // Worked y=1 posterior: masses (1/9,4/9,4/9), densities (4/9,8/9,16/9)
    // give log2(9) - 10/3.
    CHECK(worked_update(1).entropy_bits() == Approx(std::log2(9.0) - 10.0 / 3.0).margin(1e-12));
}

TEST_CASE("kl to uniform") {
    CHECK(PiecewiseDensity(0.0, 1.0).kl_to_uniform_bits() == Approx(0.0).margin(1e-12));
    CHECK(PiecewiseDensity(0.0, 4.0).kl_to_uniform_bits() == Approx(0.0).margin(1e-12));
    const auto p = worked_update(1);
    CHECK(p.kl_to_uniform_bits() == Approx(-p.entropy_bits()).margin(1e-12));
    CHECK(p.kl_to_uniform_bits() >= 0.0);
}

TEST_CASE("expected posterior entropy never exceeds prior entropy") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = random_density(rng);
        const double g = clamp_prob(rng.uniform01());
        const double gb = clamp_prob(rng.uniform01());
        double a = rng.uniform(0.05, 0.95), b = rng.uniform(0.05, 0.95);
        if (std::abs(a - b) < 1e-3) continue;
        const double xl = std::min(a, b), xr = std::max(a, b);
        const double u1 = normalizer_u1(g, gb, p.cdf(xl), p.cdf(xr));
        const double u0 = normalizer_u0(g, gb, p.cdf(xl), p.cdf(xr));
        auto p1 = p, p0 = p;
        p1.update({1, xl, xr}, g, gb);
        p0.update({0, xl, xr}, g, gb);
        CHECK(u1 * p1.entropy_bits() + u0 * p0.entropy_bits() <= p.entropy_bits() + 1e-9);
    }
}

TEST_CASE("update commutes with refinement") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_density(rng);
        auto refined = p;
        refined.refine_at(rng.uniform(0.05, 0.95));
        const double g = clamp_prob(rng.uniform(0.1, 0.9));
        const double gb = clamp_prob(rng.uniform(0.1, 0.9));
        p.update({1, 0.3, 0.7}, g, gb);
        refined.update({1, 0.3, 0.7}, g, gb);
        for (double x : {0.1, 0.25, 0.45, 0.65, 0.85, 0.99})
            CHECK(p.cdf(x) == Approx(refined.cdf(x)).margin(1e-12));
    }
}

TEST_CASE("mass stays 1 and densities stay nonnegative across update chains") {
    Rng rng(17);
    PiecewiseDensity p(0.0, 2.0);
    for (int i = 0; i < 60; ++i) {
        double a = rng.uniform(0.02, 1.98), b = rng.uniform(0.02, 1.98);
        if (std::abs(a - b) < 1e-6) continue;
        p.update({rng.uniform01() < 0.5 ? 1 : 0, std::min(a, b), std::max(a, b)},
                 clamp_prob(rng.uniform01()), clamp_prob(rng.uniform01()));
        CHECK(std::abs(p.total_mass() - 1.0) <= 1e-9);
        for (double d : p.densities()) CHECK(d >= 0.0);
    }
}

TEST_CASE("inverse cdf") {
    PiecewiseDensity uniform(2.0, 6.0);
    CHECK(uniform.inverse_cdf(0.5) == Approx(4.0).margin(1e-12));  // midpoint

    SECTION("round trip on a u-grid") {
        Rng rng(19);
        const auto p = random_density(rng);
        for (int i = 1; i < 64; ++i) {
            const double u = i / 64.0;
            CHECK(p.cdf(p.inverse_cdf(u)) == Approx(u).margin(1e-12));
        }
    }
}

TEST_CASE("samples respect the support") {
    PiecewiseDensity p(0.0, 1.0, {0.4, 0.6}, {0.0, 5.0, 0.0});
    Rng rng(23);
    for (double x : p.sample(200, rng)) {
        CHECK(x >= 0.4);
        CHECK(x <= 0.6);
    }
}

TEST_CASE("samples are deduplicated against history") {
    PiecewiseDensity p(0.0, 1.0);
    Rng rng(29);
    const std::vector<double> avoid = {0.5};
    const auto xs = p.sample(100, rng, avoid);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(std::abs(xs[i] - 0.5) >= p.delta());
        for (std::size_t j = i + 1; j < xs.size(); ++j)
            CHECK(std::abs(xs[i] - xs[j]) >= p.delta());
    }
}

TEST_CASE("sampling histogram matches the density (chi-square, 20 bins)") {
    PiecewiseDensity p(0.0, 1.0, {0.25, 0.75}, {0.4, 1.2, 1.2});
    Rng rng(31);
    const int n = 100000;
    std::vector<int> counts(20, 0);
    for (int i = 0; i < n; ++i) {
        const double x = p.inverse_cdf(rng.uniform01());
        counts[std::min(19, int(x * 20))] += 1;
    }
    double chi2 = 0.0;
    for (int b = 0; b < 20; ++b) {
        const double expected = n * (p.cdf((b + 1) / 20.0) - p.cdf(b / 20.0));
        chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
    }
    CHECK(chi2 < 36.191);  // chi-square 0.99 quantile, 19 dof
}

TEST_CASE("recommendation rules") {
    CHECK(PiecewiseDensity(0.0, 1.0).recommend() == Approx(0.5));
    CHECK(worked_update(1).recommend() == Approx(0.875).margin(1e-12));
    // Equal densities: the larger-mass (longer) interval wins.
    PiecewiseDensity tie(0.0, 1.0, {0.3}, {1.0, 1.0});
    CHECK(tie.recommend() == Approx(0.65).margin(1e-12));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(PiecewiseDensity(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseDensity(0.0, 1.0, {0.5}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseDensity(0.0, 1.0, {0.7, 0.3}, {1.0, 1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseDensity(0.0, 1.0, {0.5}, {-1.0, 2.0}), std::invalid_argument);
    PiecewiseDensity p(0.0, 1.0);
    CHECK_THROWS_AS(p.update({1, 0.7, 0.3}, 0.8, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(p.update({1, 0.3, 0.7}, 0.0, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(p.update({1, -0.5, 0.7}, 0.8, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(p.update({1, 0.3, 1.7}, 0.8, 0.6), std::invalid_argument);
}

TEST_CASE("boundary pair points leave their empty region untouched") {
    // x_l at the domain edge: the left region is empty and no breakpoint is
    // inserted there.
    PiecewiseDensity p(0.0, 1.0);
    p.update({1, 0.0, 0.6}, 0.8, 0.7);
    CHECK(p.interior_breakpoints().size() == 1);
    CHECK(std::abs(p.total_mass() - 1.0) <= 1e-12);
    // Factors reduce to (1-gbar, g) over (0, 0.6) / (0.6, 1).
    const double u = 0.3 * 0.6 + 0.8 * 0.4;
    CHECK(p.densities()[0] == Approx(0.3 / u).margin(1e-12));
    CHECK(p.densities()[1] == Approx(0.8 / u).margin(1e-12));
}
