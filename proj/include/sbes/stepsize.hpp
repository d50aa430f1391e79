#pragma once
// SGD stepsize harness: multidimensional test objectives on hypercubes,
// FDSA central-difference gradients from noisy evaluations, and stepsize
// rules (harmonic / AdaGrad / RMSProp / entropy-search line search).  Density
// objectives are maximized; convex test functions are minimized via negation
// so a single ascent code path serves both.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sbes/bench.hpp"
#include "sbes/policy.hpp"

namespace sbes {

using Vec = std::vector<double>;

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

inline double l2_norm(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return std::sqrt(acc);
}

struct MultiObjective {
    std::string name;
    int dim = 1;
    std::function<double(std::span<const double>)> fn;  // ascent orientation
    Vec lo, hi;
    Vec x_star;
    double d_max = 0.0;  // distance from x_star to the farthest vertex

    Vec clip(Vec x) const {
        for (int i = 0; i < dim; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
        return x;
    }
};

namespace detail {
inline double farthest_vertex_distance(const MultiObjective& obj) {
    // Per-axis the farther end contributes; no enumeration needed.
    double acc = 0.0;
    for (int i = 0; i < obj.dim; ++i) {
        const double d = std::max(std::abs(obj.lo[i] - obj.x_star[i]),
                                  std::abs(obj.hi[i] - obj.x_star[i]));
        acc += d * d;
    }
    return std::sqrt(acc);
}
}  // namespace detail

// Registry.  Convex suite (minimized, served negated): bohachevsky (dim 2),
// hyper-ellipsoid and sum-powers (dim 5/10/20).  Nonconvex suite: unnormalized
// Gaussian density bumps on [0,5]^d, dim 2/10.
inline MultiObjective make_multi_objective(const std::string& name, int dim = 0) {
    MultiObjective obj;
    obj.name = name;
    if (name == "bohachevsky") {
        obj.dim = 2;
        obj.lo = {-10.0, -10.0};
        obj.hi = {10.0, 10.0};
        obj.x_star = {0.0, 0.0};
        obj.fn = [](std::span<const double> x) {
            const double f = x[0] * x[0] + 2.0 * x[1] * x[1] -
                             0.3 * std::cos(3.0 * std::numbers::pi * x[0]) -
                             0.4 * std::cos(4.0 * std::numbers::pi * x[1]) + 0.7;
            return -f;
        };
    } else if (name == "hyper-ellipsoid") {
        if (dim <= 0) dim = 5;
        obj.dim = dim;
        obj.lo.assign(dim, -10.0);
        obj.hi.assign(dim, 10.0);
        obj.x_star.assign(dim, 0.0);
        obj.fn = [dim](std::span<const double> x) {
            double f = 0.0, cumulative = 0.0;
            for (int i = 0; i < dim; ++i) {
                cumulative += x[i];
                f += cumulative * cumulative;
            }
            return -f;
        };
    } else if (name == "sum-powers") {
        if (dim <= 0) dim = 5;
        obj.dim = dim;
        obj.lo.assign(dim, -1.0);
        obj.hi.assign(dim, 1.0);
        obj.x_star.assign(dim, 0.0);
        obj.fn = [dim](std::span<const double> x) {
            double f = 0.0;
            for (int i = 0; i < dim; ++i) f += std::pow(std::abs(x[i]), double(i + 2));
            return -f;
        };
    } else if (name == "gauss-density") {
        if (dim <= 0) dim = 2;
        if (dim != 2 && dim != 10)
            throw std::invalid_argument("gauss-density supports dim 2 or 10");
        obj.dim = dim;
        obj.lo.assign(dim, 0.0);
        obj.hi.assign(dim, 5.0);
        Vec mu(dim), inv_var(dim);
        for (int i = 0; i < dim; ++i) {
            mu[i] = i % 2 == 0 ? 3.2 : 1.8;
            const double s = i % 2 == 0 ? 1.0 : 1.4;
            inv_var[i] = 1.0 / (s * s);
        }
        obj.x_star = mu;
        // Peak height 5 with observation noise 0.1: gradient estimates far
        // from the peak are genuinely noisy, which is the regime of interest.
        const double amplitude = 5.0;
        obj.fn = [mu, inv_var, amplitude, dim](std::span<const double> x) {
            double q = 0.0;
            for (int i = 0; i < dim; ++i) q += (x[i] - mu[i]) * (x[i] - mu[i]) * inv_var[i];
            return amplitude * std::exp(-0.5 * q);
        };
    } else {
        throw std::invalid_argument("unknown multi objective: " + name);
    }
    obj.d_max = detail::farthest_vertex_distance(obj);
    return obj;
}

inline double noisy_eval(const MultiObjective& obj, double sigma, std::span<const double> x,
                         Rng& rng) {
    return obj.fn(x) + sigma * rng.normal();
}

// Central differences of noisy evaluations; perturbed points are clipped to
// the hypercube and the actual distance used in the divisor.
inline Vec fdsa_gradient(const MultiObjective& obj, double sigma, const Vec& x, double c,
                         Rng& rng, int* eval_count = nullptr) {
    if (!(c > 0.0)) throw std::invalid_argument("fdsa_gradient: perturbation must be > 0");
    Vec grad(obj.dim, 0.0);
    Vec plus = x, minus = x;
    for (int i = 0; i < obj.dim; ++i) {
        const double hi_pt = std::min(x[i] + c, obj.hi[i]);
        const double lo_pt = std::max(x[i] - c, obj.lo[i]);
        plus[i] = hi_pt;
        minus[i] = lo_pt;
        const double span = hi_pt - lo_pt;
        if (span > 0.0) {
            const double fp = noisy_eval(obj, sigma, plus, rng);
            const double fm = noisy_eval(obj, sigma, minus, rng);
            grad[i] = (fp - fm) / span;
        }
        if (eval_count) *eval_count += 2;
        plus[i] = x[i];
        minus[i] = x[i];
    }
    return grad;
}

enum class RuleKind { Harmonic, AdaGrad, RmsProp, SbesSingle, SbesMix };

inline RuleKind rule_kind_from_name(const std::string& name) {
    if (name == "harmonic") return RuleKind::Harmonic;
    if (name == "adagrad") return RuleKind::AdaGrad;
    if (name == "rmsprop") return RuleKind::RmsProp;
    if (name == "sbes-single") return RuleKind::SbesSingle;
    if (name == "sbes-mix") return RuleKind::SbesMix;
    throw std::invalid_argument("unknown stepsize rule: " + name);
}

inline std::string rule_name(RuleKind k) {
    switch (k) {
        case RuleKind::Harmonic: return "harmonic";
        case RuleKind::AdaGrad: return "adagrad";
        case RuleKind::RmsProp: return "rmsprop";
        case RuleKind::SbesSingle: return "sbes-single";
        case RuleKind::SbesMix: return "sbes-mix";
    }
    return "?";
}

// Fixed default hyperparameters across all objectives (no per-problem
// retuning): harmonic a/(a+t) on the unit direction, AdaGrad and RMSProp on
// the raw gradient, line-search rules on the unit direction with an inner
// budget of 5 iterations.
struct StepsizeRule {
    RuleKind kind = RuleKind::Harmonic;
    double harmonic_a = 5.0;
    double adagrad_rate = 0.5;
    double rmsprop_rate = 0.1;
    double rmsprop_decay = 0.9;
    int inner_budget = 5;
    int inner_candidates = 20;
    ParametricFamilySpec belief;  // on the normalized ray coordinate [0,1]

    std::vector<double> accumulator;  // per-coordinate state for diagonal rules
};

// Line-search beliefs on the normalized ray coordinate.  Centers are
// log-spaced because once the iterate approaches the optimum the maximizer
// along a ray sits at a small fraction of the extent to the boundary.
// Per-width center offsets of 2e-4 keep the optimizers distinct.
inline const std::vector<double>& linesearch_centers() {
    static const std::vector<double> centers = {0.02, 0.05, 0.1, 0.18,
                                                0.3, 0.5, 0.72, 0.95};
    return centers;
}

// Shape-identical bumps that only vary in location.
inline ParametricFamilySpec linesearch_belief_single() {
    ParametricFamilySpec spec;
    spec.family = CurveFamily::GaussianPdf;
    for (int i = 0; i < 12; ++i)
        spec.parameter_grid.push_back({0.02 + 0.96 * i / 11.0, 0.15});
    return spec;
}

// Locations x widths x a wide scale ladder, so one member fits a ray profile
// of any magnitude reasonably well.
inline ParametricFamilySpec linesearch_belief_mix() {
    ParametricFamilySpec spec;
    spec.family = CurveFamily::GaussianPdf;
    for (double c : linesearch_centers()) {
        int wi = 0;
        for (double w : {0.08, 0.2}) spec.parameter_grid.push_back({c + 2e-4 * wi++, w});
    }
    spec.scale_grid = {0.1, 1.0, 10.0, 100.0};
    return spec;
}

// Convex-suite variants: concave parabolas peaking at zero match the negated
// convex test functions; the scale ladder covers their magnitudes.
inline ParametricFamilySpec linesearch_belief_convex_single() {
    ParametricFamilySpec spec;
    spec.family = CurveFamily::Quadratic;
    for (int i = 0; i < 12; ++i)
        spec.parameter_grid.push_back({0.02 + 0.96 * i / 11.0, 4.0, 0.0});
    return spec;
}

inline ParametricFamilySpec linesearch_belief_convex_mix() {
    ParametricFamilySpec spec;
    spec.family = CurveFamily::Quadratic;
    for (double c : linesearch_centers()) {
        spec.parameter_grid.push_back({c, 1.0, 0.0});
        spec.parameter_grid.push_back({c + 2e-4, 8.0, 0.0});
    }
    spec.scale_grid = {1.0, 100.0, 1e4, 1e6};
    return spec;
}

inline StepsizeRule make_rule(RuleKind kind, const std::string& suite = "nonconvex") {
    StepsizeRule rule;
    rule.kind = kind;
    const bool convex = suite == "convex";
    if (kind == RuleKind::SbesSingle)
        rule.belief = convex ? linesearch_belief_convex_single() : linesearch_belief_single();
    if (kind == RuleKind::SbesMix)
        rule.belief = convex ? linesearch_belief_convex_mix() : linesearch_belief_mix();
    return rule;
}

// Distance from x to the hypercube boundary along the unit direction u.
inline double ray_extent(const MultiObjective& obj, const Vec& x, const Vec& u) {
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < obj.dim; ++i) {
        if (u[i] > 1e-15)
            t = std::min(t, (obj.hi[i] - x[i]) / u[i]);
        else if (u[i] < -1e-15)
            t = std::min(t, (obj.lo[i] - x[i]) / u[i]);
    }
    return std::isfinite(t) ? std::max(t, 0.0) : 0.0;
}

// One-dimensional search along x + alpha*u for alpha in [0, alpha_max]:
// runs the optimizer with the rule's beliefs mapped onto the ray and returns
// the recommended stepsize.  inner_budget iterations = inner_budget + 1
// evaluations.
inline double sbes_linesearch_with(const MultiObjective& obj, double sigma, const Vec& x,
                                   const Vec& direction, const StepsizeRule& rule,
                                   std::span<const BeliefCurve> bases, double alpha_max,
                                   Rng& rng, int* eval_count = nullptr) {
    if (!(alpha_max > 0.0)) throw std::invalid_argument("sbes_linesearch: alpha_max must be > 0");
    const uint64_t opt_seed = rng.next_u64();
    const uint64_t noise_seed = rng.next_u64();
    Rng noise_rng(noise_seed);

    // Beliefs are specified on s = alpha/alpha_max; curves are remapped to
    // the ray coordinate so the machinery runs on [0, alpha_max] directly.
    std::vector<BeliefCurve> curves;
    curves.reserve(bases.size());
    for (const auto& base : bases) {
        auto fn = base.evaluate;
        curves.push_back(BeliefCurve{
            base.label,
            [fn, alpha_max](double a) { return fn(a / alpha_max); },
            base.argmax_location * alpha_max});
    }
    BeliefEnsemble ensemble(std::move(curves), sigma, 0.0, alpha_max);

    Vec probe(obj.dim);
    auto phi = [&](double alpha) {
        for (int i = 0; i < obj.dim; ++i)
            probe[i] = std::clamp(x[i] + alpha * direction[i], obj.lo[i], obj.hi[i]);
        if (eval_count) *eval_count += 1;
        return noisy_eval(obj, sigma, probe, noise_rng);
    };

    OptimizerConfig config;
    config.lo = 0.0;
    config.hi = alpha_max;
    config.budget = rule.inner_budget;
    config.candidates = rule.inner_candidates;
    config.seed = opt_seed;
    return optimize(phi, std::move(ensemble), config).recommendation;
}

inline double sbes_linesearch(const MultiObjective& obj, double sigma, const Vec& x,
                              const Vec& direction, const StepsizeRule& rule, double alpha_max,
                              Rng& rng, int* eval_count = nullptr) {
    const auto bases = rule.belief.expand(0.0, 1.0);
    return sbes_linesearch_with(obj, sigma, x, direction, rule, bases, alpha_max, rng,
                                eval_count);
}

struct SgdTrace {
    std::vector<Vec> iterates;       // x_0 .. x_T
    std::vector<double> distances;   // ||x_t - x*||
    std::vector<double> stepsizes;   // ||x_{t+1} - x_t|| per iteration
    int evaluations = 0;

    double reduction() const { return distances.front() - distances.back(); }
};

// Ascent SGD with FDSA gradients; iterates stay clipped to the hypercube.
inline SgdTrace run_sgd(const MultiObjective& obj, double sigma, StepsizeRule rule, Vec x0,
                        int iterations, Rng& rng, double fdsa_c_fraction = 0.05) {
    SgdTrace trace;
    Vec x = obj.clip(std::move(x0));
    trace.iterates.push_back(x);
    trace.distances.push_back(l2_distance(x, obj.x_star));
    rule.accumulator.assign(obj.dim, 0.0);

    const bool uses_linesearch =
        rule.kind == RuleKind::SbesSingle || rule.kind == RuleKind::SbesMix;
    const std::vector<BeliefCurve> bases =
        uses_linesearch ? rule.belief.expand(0.0, 1.0) : std::vector<BeliefCurve>{};

    double width = 0.0;
    for (int i = 0; i < obj.dim; ++i) width = std::max(width, obj.hi[i] - obj.lo[i]);
    const double c = fdsa_c_fraction * width;

    for (int t = 1; t <= iterations; ++t) {
        const Vec grad = fdsa_gradient(obj, sigma, x, c, rng, &trace.evaluations);
        const double norm = l2_norm(grad);
        Vec next = x;
        if (norm > 0.0) {
            switch (rule.kind) {
                case RuleKind::Harmonic: {
                    const double alpha = rule.harmonic_a / (rule.harmonic_a + t);
                    for (int i = 0; i < obj.dim; ++i) next[i] += alpha * grad[i] / norm;
                    break;
                }
                case RuleKind::AdaGrad: {
                    for (int i = 0; i < obj.dim; ++i) {
                        rule.accumulator[i] += grad[i] * grad[i];
                        next[i] += rule.adagrad_rate * grad[i] /
                                   (std::sqrt(rule.accumulator[i]) + 1e-8);
                    }
                    break;
                }
                case RuleKind::RmsProp: {
                    for (int i = 0; i < obj.dim; ++i) {
                        rule.accumulator[i] = rule.rmsprop_decay * rule.accumulator[i] +
                                              (1.0 - rule.rmsprop_decay) * grad[i] * grad[i];
                        next[i] += rule.rmsprop_rate * grad[i] /
                                   (std::sqrt(rule.accumulator[i]) + 1e-8);
                    }
                    break;
                }
                case RuleKind::SbesSingle:
                case RuleKind::SbesMix: {
                    Vec u(obj.dim);
                    for (int i = 0; i < obj.dim; ++i) u[i] = grad[i] / norm;
                    const double alpha_max = ray_extent(obj, x, u);
                    if (alpha_max > 1e-12) {
                        const double alpha = sbes_linesearch_with(
                            obj, sigma, x, u, rule, bases, alpha_max, rng, &trace.evaluations);
                        for (int i = 0; i < obj.dim; ++i) next[i] += alpha * u[i];
                    }
                    break;
                }
            }
        }
        next = obj.clip(std::move(next));
        trace.stepsizes.push_back(l2_distance(next, x));
        x = std::move(next);
        trace.iterates.push_back(x);
        trace.distances.push_back(l2_distance(x, obj.x_star));
    }
    return trace;
}

enum class InitBand { Close, Medium, Far };

inline InitBand band_from_name(const std::string& name) {
    if (name == "close") return InitBand::Close;
    if (name == "medium") return InitBand::Medium;
    if (name == "far") return InitBand::Far;
    throw std::invalid_argument("unknown init band: " + name);
}

inline std::string band_name(InitBand b) {
    switch (b) {
        case InitBand::Close: return "close";
        case InitBand::Medium: return "medium";
        case InitBand::Far: return "far";
    }
    return "?";
}

// Rejection-samples a start point whose distance to the optimum lies in the
// band (close: [0, d/4], medium: [d/4, 3d/4], far: [3d/4, d]).
inline Vec init_sampler(const MultiObjective& obj, InitBand band, Rng& rng) {
    double r1 = 0.0, r2 = obj.d_max;
    switch (band) {
        case InitBand::Close: r2 = 0.25 * obj.d_max; break;
        case InitBand::Medium: r1 = 0.25 * obj.d_max; r2 = 0.75 * obj.d_max; break;
        case InitBand::Far: r1 = 0.75 * obj.d_max; break;
    }
    Vec x(obj.dim);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        for (int i = 0; i < obj.dim; ++i) x[i] = rng.uniform(obj.lo[i], obj.hi[i]);
        const double d = l2_distance(x, obj.x_star);
        if (d >= r1 && d <= r2) return x;
    }
    throw std::runtime_error("init_sampler: rejection sampling failed for band " +
                             band_name(band));
}

// --------------------------------------------------------------------------
// Suite runner

struct StepsizeRunRow {
    std::string rule;
    std::string objective;
    int dim = 0;
    std::string band;
    int init_id = 0;
    int rep = 0;
    double dist0 = 0.0;
    double dist_final = 0.0;
    double reduction = 0.0;
};

struct StepsizeSuiteConfig {
    std::string suite = "nonconvex";  // convex | nonconvex
    InitBand band = InitBand::Far;
    double sigma = 0.1;
    int inits = 20;
    int reps = 1;
    int iterations = 10;
    uint64_t seed = 1;
    int threads = 0;
};

inline std::vector<std::pair<std::string, int>> suite_objectives(const std::string& suite) {
    if (suite == "convex")
        return {{"bohachevsky", 2}, {"hyper-ellipsoid", 5}, {"hyper-ellipsoid", 10},
                {"hyper-ellipsoid", 20}, {"sum-powers", 5}, {"sum-powers", 10},
                {"sum-powers", 20}};
    if (suite == "nonconvex") return {{"gauss-density", 2}, {"gauss-density", 10}};
    throw std::invalid_argument("unknown suite: " + suite);
}

inline std::vector<StepsizeRunRow> run_stepsize_suite(const StepsizeSuiteConfig& config) {
    const std::vector<RuleKind> rules = {RuleKind::Harmonic, RuleKind::AdaGrad,
                                         RuleKind::RmsProp, RuleKind::SbesSingle,
                                         RuleKind::SbesMix};
    const auto objectives = suite_objectives(config.suite);

    struct Job {
        int obj_idx, rule_idx, init_id, rep;
    };
    std::vector<Job> jobs;
    for (int o = 0; o < int(objectives.size()); ++o)
        for (int i = 0; i < config.inits; ++i)
            for (int rep = 0; rep < config.reps; ++rep)
                for (int r = 0; r < int(rules.size()); ++r)
                    jobs.push_back({o, r, i, rep});

    std::vector<StepsizeRunRow> rows(jobs.size());
    parallel_for_index(int(jobs.size()), config.threads, [&](int idx) {
        const Job& job = jobs[idx];
        const auto& [name, dim] = objectives[job.obj_idx];
        const MultiObjective obj = make_multi_objective(name, dim);
        // Same start point for every rule at a given (objective, init, rep).
        Rng init_rng(derive_seed(config.seed, uint64_t(job.obj_idx) * 1000 + job.init_id,
                                 uint64_t(job.rep)));
        const Vec x0 = init_sampler(obj, config.band, init_rng);
        Rng run_rng(derive_seed(config.seed + 0xBEE5,
                                uint64_t(job.obj_idx) * 1000 + job.init_id,
                                uint64_t(job.rep) * 16 + uint64_t(job.rule_idx)));
        const auto trace = run_sgd(obj, config.sigma, make_rule(rules[job.rule_idx], config.suite),
                                   x0, config.iterations, run_rng);
        rows[idx] = {rule_name(rules[job.rule_idx]), name, obj.dim, band_name(config.band),
                     job.init_id, job.rep, trace.distances.front(), trace.distances.back(),
                     trace.reduction()};
    });
    return rows;
}

inline std::string stepsize_runs_csv(const std::vector<StepsizeRunRow>& rows) {
    std::ostringstream out;
    out << "rule,objective,dim,band,init_id,rep,dist0,dist10,reduction\n";
    for (const auto& r : rows)
        out << r.rule << ',' << r.objective << ',' << r.dim << ',' << r.band << ',' << r.init_id
            << ',' << r.rep << ',' << fmt_double(r.dist0) << ',' << fmt_double(r.dist_final)
            << ',' << fmt_double(r.reduction) << '\n';
    return out.str();
}

// Mean reduction per (objective, dim, rule) cell plus a uniform average over
// cells per rule.
inline std::string stepsize_summary_csv(const std::vector<StepsizeRunRow>& rows) {
    std::map<std::pair<std::string, int>, std::map<std::string, std::pair<double, int>>> cells;
    for (const auto& r : rows) {
        auto& cell = cells[{r.objective, r.dim}][r.rule];
        cell.first += r.reduction;
        cell.second += 1;
    }
    std::ostringstream out;
    out << "objective,dim,rule,mean_reduction\n";
    std::map<std::string, std::pair<double, int>> overall;
    for (const auto& [key, by_rule] : cells) {
        for (const auto& [rule, acc] : by_rule) {
            const double mean = acc.first / acc.second;
            out << key.first << ',' << key.second << ',' << rule << ',' << fmt_double(mean)
                << '\n';
            overall[rule].first += mean;
            overall[rule].second += 1;
        }
    }
    for (const auto& [rule, acc] : overall)
        out << "overall,0," << rule << ',' << fmt_double(acc.first / acc.second) << '\n';
    return out.str();
}

}  // namespace sbes
