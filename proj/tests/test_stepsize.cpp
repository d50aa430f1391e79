#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sbes/stepsize.hpp"

using namespace sbes;
using Catch::Approx;

namespace {

// Ascent paraboloid -||x||^2 on [-2,2]^d; gradient -2x.
MultiObjective paraboloid(int dim) {
    MultiObjective obj;
    obj.name = "paraboloid";
    obj.dim = dim;
    obj.lo.assign(dim, -2.0);
    obj.hi.assign(dim, 2.0);
    obj.x_star.assign(dim, 0.0);
    obj.fn = [](std::span<const double> x) {
        double f = 0.0;
        for (double v : x) f -= v * v;
        return f;
    };
    obj.d_max = 2.0 * std::sqrt(double(dim));
    return obj;
}

}  // namespace

TEST_CASE("fdsa gradient") {
    Rng rng(1);
    SECTION("exact for quadratics without noise") {
        const auto obj = paraboloid(3);
        const Vec x = {0.4, -0.7, 1.1};
        const auto grad = fdsa_gradient(obj, 0.0, x, 1e-3, rng);
        for (int i = 0; i < 3; ++i) CHECK(grad[i] == Approx(-2.0 * x[i]).margin(1e-6));
    }
    SECTION("per-coordinate variance is sigma^2 / (2 c^2)") {
        const auto obj = paraboloid(1);
        const double sigma = 0.1, c = 0.1;
        const int n = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double gi = fdsa_gradient(obj, sigma, {0.3}, c, rng)[0];
            sum += gi;
            sum2 += gi * gi;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        CHECK(var == Approx(sigma * sigma / (2.0 * c * c)).epsilon(0.1));  // = 0.5
    }
    SECTION("boundary perturbations are clipped and finite") {
        const auto obj = paraboloid(2);
        int evals = 0;
        const auto grad = fdsa_gradient(obj, 0.0, {2.0, -2.0}, 0.5, rng, &evals);
        CHECK(evals == 4);
        for (double gi : grad) CHECK(std::isfinite(gi));
        CHECK(grad[0] == Approx(-(4.0 - 2.25) / 0.5).margin(1e-9));  // one-sided span
    }
}

TEST_CASE("harmonic stepsize follows a/(a+t) exactly") {
    const auto obj = paraboloid(2);
    auto rule = make_rule(RuleKind::Harmonic);
    Rng rng(5);
    const auto trace = run_sgd(obj, 0.0, rule, {1.5, 1.5}, 4, rng);
    for (int t = 1; t <= 4; ++t) {
        // unit direction: step length equals the harmonic formula unless clipped
        CHECK(trace.stepsizes[t - 1] ==
              Approx(rule.harmonic_a / (rule.harmonic_a + t)).margin(1e-9));
    }
}

TEST_CASE("zero gradient leaves the iterate unchanged") {
    MultiObjective flat = paraboloid(2);
    flat.fn = [](std::span<const double>) { return 1.0; };
    Rng rng(7);
    const auto trace = run_sgd(flat, 0.0, make_rule(RuleKind::AdaGrad), {1.0, -1.0}, 3, rng);
    for (double s : trace.stepsizes) CHECK(s == 0.0);
}

TEST_CASE("iterates stay inside the hypercube") {
    const auto obj = make_multi_objective("gauss-density", 2);
    for (RuleKind kind : {RuleKind::Harmonic, RuleKind::AdaGrad, RuleKind::RmsProp,
                          RuleKind::SbesSingle, RuleKind::SbesMix}) {
        Rng rng(11 + int(kind));
        const auto trace = run_sgd(obj, 0.1, make_rule(kind), {4.9, 0.1}, 5, rng);
        for (const auto& x : trace.iterates)
            for (int i = 0; i < obj.dim; ++i) {
                CHECK(x[i] >= obj.lo[i]);
                CHECK(x[i] <= obj.hi[i]);
            }
    }
}

TEST_CASE("stepsize rules are deterministic under a fixed seed") {
    const auto obj = make_multi_objective("gauss-density", 2);
    for (RuleKind kind : {RuleKind::Harmonic, RuleKind::SbesMix}) {
        Rng a(23), b(23);
        const auto ta = run_sgd(obj, 0.1, make_rule(kind), {1.0, 4.0}, 6, a);
        const auto tb = run_sgd(obj, 0.1, make_rule(kind), {1.0, 4.0}, 6, b);
        REQUIRE(ta.distances.size() == tb.distances.size());
        for (std::size_t i = 0; i < ta.distances.size(); ++i)
            CHECK(ta.distances[i] == tb.distances[i]);
    }
}

TEST_CASE("line search budget: 5 inner iterations cost 6 evaluations") {
    const auto obj = make_multi_objective("gauss-density", 2);
    const auto rule = make_rule(RuleKind::SbesSingle);
    Rng rng(31);
    int evals = 0;
    sbes_linesearch(obj, 0.1, {1.0, 1.0}, {std::sqrt(0.5), std::sqrt(0.5)}, rule, 2.0, rng,
                    &evals);
    CHECK(evals == rule.inner_budget + 1);
}

TEST_CASE("noiseless in-model line search finds the profile maximizer") {
    // Make the objective along the ray equal to one of the belief curves.
    const auto rule = make_rule(RuleKind::SbesSingle);
    const auto bases = rule.belief.expand(0.0, 1.0);
    const auto& target = bases[4];

    MultiObjective obj;
    obj.name = "ray";
    obj.dim = 1;
    obj.lo = {0.0};
    obj.hi = {1.0};
    obj.x_star = {target.argmax_location};
    obj.fn = [&target](std::span<const double> x) { return target(x[0]); };
    obj.d_max = 1.0;

    Rng rng(37);
    const double alpha = sbes_linesearch(obj, 0.0, {0.0}, {1.0}, rule, 1.0, rng);
    CHECK(std::abs(alpha - target.argmax_location) <= 0.02);
}

TEST_CASE("alpha_max rescaling doubles the returned stepsize on matched seeds") {
    const auto rule = make_rule(RuleKind::SbesSingle);
    const auto bases = rule.belief.expand(0.0, 1.0);
    const auto& target = bases[6];

    auto make_ray = [&](double width) {
        MultiObjective obj;
        obj.name = "ray";
        obj.dim = 1;
        obj.lo = {0.0};
        obj.hi = {width};
        obj.x_star = {target.argmax_location * width};
        obj.fn = [&target, width](std::span<const double> x) { return target(x[0] / width); };
        obj.d_max = width;
        return obj;
    };

    Rng a(41), b(41);
    const double alpha1 = sbes_linesearch(make_ray(1.0), 0.05, {0.0}, {1.0}, rule, 1.0, a);
    const double alpha2 = sbes_linesearch(make_ray(2.0), 0.05, {0.0}, {1.0}, rule, 2.0, b);
    CHECK(alpha2 == Approx(2.0 * alpha1).epsilon(1e-9));
}

TEST_CASE("init sampler respects the distance bands") {
    const auto obj = make_multi_objective("gauss-density", 2);
    Rng rng(43);
    for (int i = 0; i < 2000; ++i) {
        const auto close = init_sampler(obj, InitBand::Close, rng);
        CHECK(l2_distance(close, obj.x_star) <= 0.25 * obj.d_max + 1e-12);
        const auto far = init_sampler(obj, InitBand::Far, rng);
        const double d = l2_distance(far, obj.x_star);
        CHECK(d >= 0.75 * obj.d_max - 1e-12);
        CHECK(d <= obj.d_max + 1e-12);
    }
}

TEST_CASE("far-band distance reduction is positive for the line-search rules") {
    const auto obj = make_multi_objective("gauss-density", 2);
    double total = 0.0;
    const int inits = 6;
    for (int i = 0; i < inits; ++i) {
        Rng init_rng(derive_seed(71, i));
        const auto x0 = init_sampler(obj, InitBand::Far, init_rng);
        Rng rng(derive_seed(72, i));
        total += run_sgd(obj, 0.1, make_rule(RuleKind::SbesMix), x0, 10, rng).reduction();
    }
    CHECK(total / inits > 0.0);
}

TEST_CASE("suite runner emits one row per (objective, rule, init, rep)") {
    StepsizeSuiteConfig config;
    config.suite = "nonconvex";
    config.band = InitBand::Far;
    config.inits = 2;
    config.iterations = 3;
    config.seed = 99;
    const auto rows = run_stepsize_suite(config);
    CHECK(rows.size() == 2u * 2u * 5u);  // objectives x inits x rules
    const std::string csv = stepsize_runs_csv(rows);
    CHECK(csv.rfind("rule,objective,dim,band,init_id,rep,dist0,dist10,reduction\n", 0) == 0);
    const std::string summary = stepsize_summary_csv(rows);
    CHECK(summary.find("overall") != std::string::npos);

    const auto rows2 = run_stepsize_suite(config);
    CHECK(stepsize_runs_csv(rows2) == csv);  // deterministic
}
