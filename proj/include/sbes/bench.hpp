#pragma once
// Benchmark harness: synthetic objectives, the noise-ratio model
// sigma = gamma * |f_max - f_min|, sanity baselines, and a reproducible
// batch runner (Latin-hypercube initial pairs x replications, one derived
// seed per run) with CSV serialization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sbes/io.hpp"
#include "sbes/policy.hpp"

namespace sbes {

struct Objective {
    std::string name;
    std::function<double(double)> fn;
    double lo = 0.0, hi = 1.0;
    double max_location = 0.0;
    double max_value = 0.0;
    double range_span = 0.0;  // |f_max - f_min| over the domain, 4096-point scan
    bool strictly_unimodal = true;
};

namespace detail {
inline Objective finish_objective(Objective obj) {
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    for (int i = 0; i <= 4096; ++i) {
        const double v = obj.fn(obj.lo + (obj.hi - obj.lo) * i / 4096.0);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    obj.range_span = vmax - vmin;
    obj.max_value = obj.fn(obj.max_location);
    if (obj.strictly_unimodal && !is_unimodal(obj.fn, obj.lo, obj.hi))
        throw std::logic_error("objective " + obj.name + " failed the unimodality check");
    return obj;
}
}  // namespace detail

inline Objective make_objective(const std::string& name) {
    Objective obj;
    obj.name = name;
    if (name == "gaussian-pdf") {
        obj.fn = [](double x) { return gaussian_pdf(x, 7.5, 1.0); };
        obj.lo = 0.0;
        obj.hi = 15.0;
        obj.max_location = 7.5;
    } else if (name == "gamma-pdf") {
        obj.fn = [](double x) { return gamma_pdf(x, 9.0, 1.0); };
        obj.lo = 0.0;
        obj.hi = 20.0;
        obj.max_location = 8.0;  // (shape-1)/rate
    } else if (name == "beta-pdf") {
        obj.fn = [](double x) { return beta_pdf(x, 3.0, 18.0); };
        obj.lo = 0.0;
        obj.hi = 1.0;
        obj.max_location = 2.0 / 19.0;  // (a-1)/(a+b-2)
    } else if (name == "mccormick-1d") {
        obj.fn = [](double x) { return -std::sin(x) - x * x + 1.5 * x + 10.0; };
        obj.lo = -1.5;
        obj.hi = 4.0;
        obj.max_location = grid_argmax(obj.fn, obj.lo, obj.hi);
    } else if (name == "ackley-1d") {
        obj.fn = [](double x) {
            return 4.0 * std::exp(-std::abs(x)) + std::exp(std::cos(x)) - 4.0 - std::numbers::e;
        };
        obj.lo = -5.0;
        obj.hi = 5.0;
        obj.max_location = 0.0;
        // Kinked at the maximum; the tails also rise again past |x| ~ pi, so
        // the discrete-difference check is skipped for this one.
        obj.strictly_unimodal = false;
    } else {
        throw std::invalid_argument("unknown objective: " + name);
    }
    return detail::finish_objective(std::move(obj));
}

struct NoiseSpec {
    double gamma = 0.0;
    double sigma = 0.0;
};

inline NoiseSpec noise_from_ratio(double gamma, double range_span) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("noise ratio must be >= 0");
    return {gamma, gamma * range_span};
}

inline NoiseSpec make_noise(const Objective& obj, double gamma) {
    return noise_from_ratio(gamma, obj.range_span);
}

inline double noisy_eval(const Objective& obj, const NoiseSpec& noise, double x, Rng& rng) {
    if (x < obj.lo || x > obj.hi) throw std::invalid_argument("noisy_eval: point outside domain");
    return obj.fn(x) + noise.sigma * rng.normal();
}

// In-model belief grid: K curves of the objective's own family with the grid
// point nearest the true parameter snapped onto it, so the truth is always a
// member.
inline ParametricFamilySpec default_inmodel_spec(const std::string& objective, int K) {
    if (K < 2) throw std::invalid_argument("default_inmodel_spec: K must be >= 2");
    auto linspace_snap = [&](double lo, double hi, double truth) {
        std::vector<std::vector<double>> grid;
        int nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < K; ++i) {
            const double v = lo + (hi - lo) * i / (K - 1);
            if (std::abs(v - truth) < best) {
                best = std::abs(v - truth);
                nearest = i;
            }
            grid.push_back({v});
        }
        grid[nearest][0] = truth;
        return grid;
    };
    ParametricFamilySpec spec;
    if (objective == "gaussian-pdf") {
        spec.family = CurveFamily::GaussianPdf;
        spec.parameter_grid = linspace_snap(0.75, 14.25, 7.5);
        for (auto& p : spec.parameter_grid) p.push_back(1.0);
    } else if (objective == "gamma-pdf") {
        spec.family = CurveFamily::GammaPdf;
        spec.parameter_grid = linspace_snap(1.8, 17.0, 9.0);
        for (auto& p : spec.parameter_grid) p.push_back(1.0);
    } else if (objective == "beta-pdf") {
        spec.family = CurveFamily::BetaPdf;
        spec.parameter_grid = linspace_snap(1.3, 30.0, 3.0);
        for (auto& p : spec.parameter_grid) p.push_back(18.0);
    } else if (objective == "mccormick-1d") {
        spec.family = CurveFamily::Quadratic;
        const Objective obj = make_objective(objective);
        spec.parameter_grid = linspace_snap(obj.lo + 0.05 * (obj.hi - obj.lo),
                                            obj.hi - 0.05 * (obj.hi - obj.lo), obj.max_location);
        for (auto& p : spec.parameter_grid) {
            p.push_back(1.0);
            p.push_back(10.0);
        }
    } else if (objective == "ackley-1d") {
        spec.family = CurveFamily::GaussianPdf;
        spec.parameter_grid = linspace_snap(-4.5, 4.5, 0.0);
        for (auto& p : spec.parameter_grid) p.push_back(1.0);
    } else {
        throw std::invalid_argument("no default belief spec for objective: " + objective);
    }
    return spec;
}

// Scale-learning variant: a coarser parameter grid crossed with scale
// multipliers, K curves total.
inline ParametricFamilySpec default_scale_spec(const std::string& objective, int K) {
    const std::vector<double> scales = {0.25, 0.5, 1.0, 2.0, 4.0};
    const int params = std::max(2, K / int(scales.size()));
    ParametricFamilySpec spec = default_inmodel_spec(objective, params);
    spec.scale_grid = scales;
    return spec;
}

struct ExperimentConfig {
    std::string objective = "gaussian-pdf";
    std::string policy = "sbes";  // sbes | sbes-scale | random-search | grid-equal
    double gamma = 0.05;
    int budget = 30;  // N; every policy consumes budget + 1 evaluations
    int m = 20;
    int K = 32;
    ParametricFamilySpec family;  // empty -> default in-model grid
    int inits = 15;
    int reps = 20;
    uint64_t seed = 1;
    int threads = 0;
    bool write_traces = false;
};

struct RunRecord {
    int run_id = 0;
    int init_id = 0;
    int rep = 0;
    uint64_t seed = 0;
    double x0_l = 0.0, x0_r = 0.0;
    double recommendation = 0.0;
    double regret = 0.0;
    std::vector<TraceRow> trace;
};

struct ExperimentSummary {
    int runs = 0;
    double mean_regret = 0.0;
    double log10_mean_regret = 0.0;
    double mean_log10_regret = 0.0;
    double median_regret = 0.0;
};

// Latin-hypercube pairs over the domain: one stratum permutation per pair
// coordinate, a uniform draw inside each stratum, pair sorted.
inline std::vector<std::pair<double, double>> latin_hypercube_pairs(double lo, double hi,
                                                                    int count, Rng& rng) {
    std::vector<int> perm_a(count), perm_b(count);
    std::iota(perm_a.begin(), perm_a.end(), 0);
    std::iota(perm_b.begin(), perm_b.end(), 0);
    for (int i = count - 1; i > 0; --i) std::swap(perm_a[i], perm_a[rng.uniform_int(0, i)]);
    for (int i = count - 1; i > 0; --i) std::swap(perm_b[i], perm_b[rng.uniform_int(0, i)]);
    const double w = (hi - lo) / count;
    std::vector<std::pair<double, double>> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        double a = lo + (perm_a[i] + rng.uniform01()) * w;
        double b = lo + (perm_b[i] + rng.uniform01()) * w;
        for (int attempt = 0; attempt < 64 && std::abs(a - b) < 1e-6 * (hi - lo); ++attempt)
            b = lo + (perm_b[i] + rng.uniform01()) * w;
        if (std::abs(a - b) < 1e-6 * (hi - lo))
            b = std::min(hi, b + 1e-3 * (hi - lo));
        out.emplace_back(std::min(a, b), std::max(a, b));
    }
    return out;
}

// N+1 uniform evaluations, recommend the empirical-max point.
inline double baseline_random_search(const Objective& obj, const NoiseSpec& noise, int budget,
                                     Rng& rng) {
    double best_x = obj.lo, best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < budget + 1; ++i) {
        const double x = rng.uniform(obj.lo, obj.hi);
        const double v = noisy_eval(obj, noise, x, rng);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return best_x;
}

// Equispaced grid with the budget split evenly; recommend the best sample
// mean.  Grid size ~ sqrt(budget) so each point gets several looks.
inline double baseline_grid_equal(const Objective& obj, const NoiseSpec& noise, int budget,
                                  Rng& rng) {
    const int evals = budget + 1;
    const int points = std::max(2, int(std::floor(std::sqrt(double(evals)))));
    std::vector<double> xs(points), sums(points, 0.0);
    std::vector<int> counts(points, 0);
    for (int i = 0; i < points; ++i)
        xs[i] = obj.lo + (obj.hi - obj.lo) * (i + 0.5) / points;
    for (int e = 0; e < evals; ++e) {
        const int i = e % points;
        sums[i] += noisy_eval(obj, noise, xs[i], rng);
        counts[i] += 1;
    }
    int best = 0;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double mean = sums[i] / counts[i];
        if (mean > best_mean) {
            best_mean = mean;
            best = i;
        }
    }
    return xs[best];
}

inline ParametricFamilySpec resolve_family(const ExperimentConfig& config) {
    if (!config.family.empty()) return config.family;
    if (config.policy == "sbes-scale") return default_scale_spec(config.objective, config.K);
    return default_inmodel_spec(config.objective, config.K);
}

// One policy run with a fully derived seed; every policy consumes the same
// evaluation budget.
inline RunRecord run_single(const ExperimentConfig& config, const Objective& obj,
                            const NoiseSpec& noise, int init_id, int rep,
                            std::pair<double, double> x0,
                            const ParametricFamilySpec& family) {
    RunRecord rec;
    rec.init_id = init_id;
    rec.rep = rep;
    rec.seed = derive_seed(config.seed, uint64_t(init_id) + 1, uint64_t(rep) + 1);
    rec.x0_l = x0.first;
    rec.x0_r = x0.second;
    Rng rng(rec.seed);

    if (config.policy == "random-search") {
        rec.recommendation = baseline_random_search(obj, noise, config.budget, rng);
    } else if (config.policy == "grid-equal") {
        rec.recommendation = baseline_grid_equal(obj, noise, config.budget, rng);
    } else if (config.policy == "sbes" || config.policy == "sbes-scale") {
        BeliefEnsemble ensemble = build_ensemble(family, obj.lo, obj.hi, noise.sigma);
        OptimizerConfig opt;
        opt.lo = obj.lo;
        opt.hi = obj.hi;
        opt.budget = config.budget;
        opt.candidates = config.m;
        opt.seed = derive_seed(rec.seed, 0xA11CE);
        opt.x0 = x0;
        Rng eval_rng(derive_seed(rec.seed, 0xE7A1));
        auto outcome = optimize(
            [&](double x) { return noisy_eval(obj, noise, x, eval_rng); }, std::move(ensemble), opt);
        rec.recommendation = outcome.recommendation;
        rec.trace = std::move(outcome.trace);
    } else {
        throw std::invalid_argument("unknown policy: " + config.policy);
    }
    rec.regret = std::abs(obj.max_value - obj.fn(rec.recommendation));
    return rec;
}

inline std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
    const Objective obj = make_objective(config.objective);
    const NoiseSpec noise = make_noise(obj, config.gamma);
    const ParametricFamilySpec family =
        (config.policy == "sbes" || config.policy == "sbes-scale") ? resolve_family(config)
                                                                   : ParametricFamilySpec{};

    Rng init_rng(derive_seed(config.seed, 0x1A17));
    const auto pairs = latin_hypercube_pairs(obj.lo, obj.hi, config.inits, init_rng);

    const int total = config.inits * config.reps;
    std::vector<RunRecord> records(total);
    parallel_for_index(total, config.threads, [&](int idx) {
        const int init_id = idx / config.reps;
        const int rep = idx % config.reps;
        records[idx] = run_single(config, obj, noise, init_id, rep, pairs[init_id], family);
        records[idx].run_id = idx;
    });
    return records;
}

inline ExperimentSummary summarize(const std::vector<RunRecord>& records) {
    ExperimentSummary s;
    s.runs = int(records.size());
    if (records.empty()) return s;
    std::vector<double> regrets;
    regrets.reserve(records.size());
    double sum = 0.0, sum_log = 0.0;
    for (const auto& r : records) {
        regrets.push_back(r.regret);
        sum += r.regret;
        sum_log += std::log10(std::max(r.regret, 1e-300));
    }
    std::sort(regrets.begin(), regrets.end());
    s.mean_regret = sum / s.runs;
    s.log10_mean_regret = std::log10(std::max(s.mean_regret, 1e-300));
    s.mean_log10_regret = sum_log / s.runs;
    s.median_regret = regrets[regrets.size() / 2];
    return s;
}

// --------------------------------------------------------------------------
// CSV rendering.  runs.csv column order is part of the tool contract.

inline std::string runs_csv(const ExperimentConfig& config,
                            const std::vector<RunRecord>& records) {
    std::ostringstream out;
    out << "run_id,policy,objective,gamma,N,m,K,seed,recommendation,regret\n";
    for (const auto& r : records) {
        out << r.run_id << ',' << config.policy << ',' << config.objective << ','
            << fmt_double(config.gamma) << ',' << config.budget << ',' << config.m << ','
            << config.K << ',' << r.seed << ',' << fmt_double(r.recommendation) << ','
            << fmt_double(r.regret) << '\n';
    }
    return out.str();
}

inline std::string summary_csv(const ExperimentConfig& config, const ExperimentSummary& s) {
    std::ostringstream out;
    out << "policy,objective,gamma,N,m,K,runs,mean_regret,log10_mean_regret,mean_log10_regret,"
           "median_regret\n";
    out << config.policy << ',' << config.objective << ',' << fmt_double(config.gamma) << ','
        << config.budget << ',' << config.m << ',' << config.K << ',' << s.runs << ','
        << fmt_double(s.mean_regret) << ',' << fmt_double(s.log10_mean_regret) << ','
        << fmt_double(s.mean_log10_regret) << ',' << fmt_double(s.median_regret) << '\n';
    return out.str();
}

inline std::string trace_csv(int run_id, const std::vector<TraceRow>& trace,
                             const Objective* obj = nullptr) {
    std::ostringstream out;
    out << "run_id,n,h,z,y_hat,nu_bits,entropy_bits,kl_bits,recommend,regret\n";
    for (const auto& row : trace) {
        const double regret =
            obj ? std::abs(obj->max_value - obj->fn(row.recommend))
                : std::numeric_limits<double>::quiet_NaN();
        out << run_id << ',' << row.n << ',' << fmt_double(row.h) << ',' << fmt_double(row.z)
            << ',' << row.y_hat << ',' << fmt_double(row.nu_bits) << ','
            << fmt_double(row.entropy_bits) << ',' << fmt_double(row.kl_bits) << ','
            << fmt_double(row.recommend) << ',' << fmt_double(regret) << '\n';
    }
    return out.str();
}

// One-sided sign test: P(wins >= observed | fair coin) over n paired runs,
// ties counted as half wins.
inline double sign_test_pvalue(int wins, int n) {
    if (n <= 0) return 1.0;
    double p = 0.0;
    for (int k = wins; k <= n; ++k)
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                      n * std::numbers::ln2);
    return std::min(p, 1.0);
}

}  // namespace sbes
