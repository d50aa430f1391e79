// Command-line front end: single optimization runs, benchmark batches,
// stepsize experiments, and the randomized verification suite.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbes/bench.hpp"
#include "sbes/io.hpp"
#include "sbes/oracle.hpp"
#include "sbes/stepsize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

sbes::ParametricFamilySpec family_from_json(const json& j) {
    sbes::ParametricFamilySpec spec;
    spec.family = sbes::curve_family_from_name(j.at("family").get<std::string>());
    if (j.contains("parameter_grid"))
        spec.parameter_grid = j.at("parameter_grid").get<std::vector<std::vector<double>>>();
    if (j.contains("scale_grid")) spec.scale_grid = j.at("scale_grid").get<std::vector<double>>();
    if (j.contains("tabulated_files"))
        spec.tabulated_files = j.at("tabulated_files").get<std::vector<std::string>>();
    return spec;
}

sbes::ExperimentConfig config_from_json(const json& j) {
    sbes::ExperimentConfig config;
    config.objective = j.value("objective", config.objective);
    config.policy = j.value("policy", config.policy);
    config.gamma = j.value("gamma", config.gamma);
    config.budget = j.value("budget", config.budget);
    config.m = j.value("m", config.m);
    config.K = j.value("K", config.K);
    config.inits = j.value("inits", config.inits);
    config.reps = j.value("reps", config.reps);
    config.seed = j.value("seed", config.seed);
    config.threads = j.value("threads", config.threads);
    config.write_traces = j.value("write_traces", config.write_traces);
    if (j.contains("family")) config.family = family_from_json(j.at("family"));
    return config;
}

json posterior_to_json(const sbes::PiecewiseDensity& p) {
    return json{{"domain", {p.lo(), p.hi()}},
                {"breakpoints", p.interior_breakpoints()},
                {"densities", p.densities()}};
}

int cmd_optimize(const std::string& objective, const std::string& policy, double gamma,
                 int budget, int m, int K, uint64_t seed, const std::string& trace_out,
                 const std::string& dump_posterior) {
    const sbes::Objective obj = sbes::make_objective(objective);
    const sbes::NoiseSpec noise = sbes::make_noise(obj, gamma);
    sbes::ExperimentConfig base;
    base.objective = objective;
    base.policy = policy;
    base.K = K;
    const sbes::ParametricFamilySpec family = sbes::resolve_family(base);
    sbes::BeliefEnsemble ensemble = sbes::build_ensemble(family, obj.lo, obj.hi, noise.sigma);

    sbes::OptimizerConfig opt;
    opt.lo = obj.lo;
    opt.hi = obj.hi;
    opt.budget = budget;
    opt.candidates = m;
    opt.seed = sbes::derive_seed(seed, 0xA11CE);

    json dumps = json::array();
    if (!dump_posterior.empty()) {
        opt.observer = [&dumps](const sbes::SearchState& state, const sbes::TraceRow& row) {
            json entry = posterior_to_json(state.posterior);
            entry["n"] = row.n;
            dumps.push_back(std::move(entry));
        };
    }

    sbes::Rng eval_rng(sbes::derive_seed(seed, 0xE7A1));
    const auto outcome = sbes::optimize(
        [&](double x) { return sbes::noisy_eval(obj, noise, x, eval_rng); },
        std::move(ensemble), opt);

    const double regret = std::abs(obj.max_value - obj.fn(outcome.recommendation));
    std::cout << "objective=" << objective << " policy=" << policy << " gamma="
              << sbes::fmt_double(gamma) << " N=" << budget << " seed=" << seed << "\n";
    std::cout << "recommendation=" << sbes::fmt_double(outcome.recommendation)
              << " regret=" << sbes::fmt_double(regret) << "\n";

    if (!trace_out.empty())
        sbes::write_text_file(trace_out, sbes::trace_csv(0, outcome.trace, &obj));
    if (!dump_posterior.empty()) sbes::write_text_file(dump_posterior, dumps.dump(2) + "\n");
    return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config: " + config_path);
    json j;
    in >> j;
    const sbes::ExperimentConfig config = config_from_json(j);

    const auto records = sbes::run_experiment(config);
    fs::create_directories(out_dir);
    sbes::write_text_file(fs::path(out_dir) / "runs.csv", sbes::runs_csv(config, records));
    sbes::write_text_file(fs::path(out_dir) / "summary.csv",
                          sbes::summary_csv(config, sbes::summarize(records)));
    if (config.write_traces) {
        const sbes::Objective obj = sbes::make_objective(config.objective);
        const fs::path traces = fs::path(out_dir) / "traces";
        fs::create_directories(traces);
        for (const auto& r : records)
            if (!r.trace.empty())
                sbes::write_text_file(traces / ("run_" + std::to_string(r.run_id) + ".csv"),
                                      sbes::trace_csv(r.run_id, r.trace, &obj));
    }
    const auto s = sbes::summarize(records);
    std::cout << "runs=" << s.runs << " mean_regret=" << sbes::fmt_double(s.mean_regret)
              << " log10_mean=" << sbes::fmt_double(s.log10_mean_regret)
              << " mean_log10=" << sbes::fmt_double(s.mean_log10_regret) << "\n";
    return 0;
}

int cmd_stepsize(const std::string& suite, const std::string& band, const std::string& out_dir,
                 int inits, int iterations, double sigma, uint64_t seed, int threads) {
    sbes::StepsizeSuiteConfig config;
    config.suite = suite;
    config.band = sbes::band_from_name(band);
    config.inits = inits;
    config.iterations = iterations;
    config.sigma = sigma;
    config.seed = seed;
    config.threads = threads;
    const auto rows = sbes::run_stepsize_suite(config);
    fs::create_directories(out_dir);
    sbes::write_text_file(fs::path(out_dir) / "stepsize_runs.csv",
                          sbes::stepsize_runs_csv(rows));
    sbes::write_text_file(fs::path(out_dir) / "stepsize_summary.csv",
                          sbes::stepsize_summary_csv(rows));
    std::cout << "rows=" << rows.size() << " written to " << out_dir << "\n";
    return 0;
}

int cmd_verify(int instances, uint64_t seed, int max_grid, int max_curves) {
    int lemma_fail = 0, theorem_fail = 0, corollary_fail = 0, chain_fail = 0, identity_fail = 0;
    double worst_identity = 0.0, worst_theorem_slack = 1e300, worst_corollary_slack = 1e300,
           worst_chain_slack = 1e300;

    for (int i = 0; i < instances; ++i) {
        sbes::Rng rng(sbes::derive_seed(seed, i));
        const auto inst = sbes::make_random_instance(rng, max_grid, max_curves);
        const auto state = sbes::aligned_state(inst, sbes::random_history_indices(inst, rng), rng);

        for (const auto& d : sbes::detail::feasible_decisions(inst, state)) {
            const double gap =
                std::abs(sbes::predictive_mi(inst, state, d) + sbes::acquisition_nu(state, d.h, d.z));
            worst_identity = std::max(worst_identity, gap);
            if (gap > 1e-9) ++identity_fail;
        }
        if (!sbes::check_lemma1(inst, state)) ++lemma_fail;

        const auto check = sbes::check_theorem1(inst, state);
        if (!check.theorem_holds) ++theorem_fail;
        if (!check.corollary_holds) ++corollary_fail;
        if (!check.chain_holds) ++chain_fail;
        if (!check.report.truth_weight_zero) {
            worst_theorem_slack =
                std::min(worst_theorem_slack, check.report.bound_rhs - check.report.gap_nats);
            constexpr double ln2 = 0.6931471805599453;
            const double lower = std::max(
                sbes::perfect_mi(inst, state, sbes::exhaustive_optimal_policy(inst, state)) * ln2 -
                    check.report.bound_rhs,
                0.0);
            worst_corollary_slack =
                std::min(worst_corollary_slack, check.report.perfect * ln2 - lower);
            worst_chain_slack = std::min(
                worst_chain_slack,
                check.report.l1_weight_error -
                    std::abs(check.report.perfect - check.report.predictive));
        }
    }

    auto line = [](const std::string& name, int fails, int total, double slack) {
        std::cout << (fails == 0 ? "PASS  " : "FAIL  ") << name << "  (" << (total - fails) << "/"
                  << total << " instances, worst slack " << sbes::fmt_double(slack, 6) << ")\n";
    };
    std::cout << "randomized verification over " << instances << " instances\n";
    line("predictive-information = -acquisition identity", identity_fail, instances,
         1e-9 - worst_identity);
    line("one-step optimality of the search decision", lemma_fail, instances, 0.0);
    line("error bound |I*(opt) - I*(search)| <= 4 sqrt(2 KL)", theorem_fail, instances,
         worst_theorem_slack);
    line("lower bound I*(search) >= max(I*(opt) - bound, 0)", corollary_fail, instances,
         worst_corollary_slack);
    line("per-policy chain |I* - Ihat| <= L1 weight error", chain_fail, instances,
         worst_chain_slack);
    const bool ok =
        lemma_fail + theorem_fail + corollary_fail + chain_fail + identity_fail == 0;
    std::cout << (ok ? "ALL CHECKS PASSED\n" : "CHECK FAILURES PRESENT\n");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy-reduction search for noisy unimodal maximization"};
    app.require_subcommand(1);

    // optimize
    auto* optimize = app.add_subcommand("optimize", "run a single optimization");
    std::string objective = "gaussian-pdf", policy = "sbes";
    double gamma = 0.05;
    int budget = 30, m = 20, K = 32;
    uint64_t seed = 1;
    std::string trace_out, dump_posterior;
    optimize->add_option("--objective", objective, "objective name");
    optimize->add_option("--policy", policy, "sbes | sbes-scale");
    optimize->add_option("--gamma", gamma, "noise ratio");
    optimize->add_option("--budget", budget, "iterations N (N+1 evaluations)");
    optimize->add_option("--m", m, "posterior samples per iteration");
    optimize->add_option("--K", K, "belief ensemble size");
    optimize->add_option("--seed", seed, "master seed");
    optimize->add_option("--trace-out", trace_out, "write the per-iteration trace CSV here");
    optimize->add_option("--dump-posterior", dump_posterior,
                         "write the per-iteration posterior densities as JSON");

    // benchmark
    auto* benchmark = app.add_subcommand("benchmark", "run a configured experiment batch");
    std::string config_path, out_dir = "bench_out";
    benchmark->add_option("--config", config_path, "experiment config JSON")->required();
    benchmark->add_option("--out", out_dir, "output directory");

    // stepsize
    auto* stepsize = app.add_subcommand("stepsize", "run the SGD stepsize suite");
    std::string suite = "nonconvex", band = "far", step_out = "stepsize_out";
    int inits = 20, iterations = 10, threads = 0;
    double sigma = 0.1;
    uint64_t step_seed = 1;
    stepsize->add_option("--suite", suite, "convex | nonconvex");
    stepsize->add_option("--band", band, "close | medium | far");
    stepsize->add_option("--out", step_out, "output directory");
    stepsize->add_option("--inits", inits, "start points per objective");
    stepsize->add_option("--iterations", iterations, "SGD iterations");
    stepsize->add_option("--sigma", sigma, "observation noise");
    stepsize->add_option("--seed", step_seed, "master seed");
    stepsize->add_option("--threads", threads, "worker threads (0 = auto)");

    // verify
    auto* verify = app.add_subcommand("verify", "randomized information-bound checks");
    int instances = 200, max_grid = 41, max_curves = 6;
    uint64_t verify_seed = 7;
    verify->add_option("--instances", instances, "number of random instances");
    verify->add_option("--seed", verify_seed, "master seed");
    verify->add_option("--grid", max_grid, "max grid points (<= 41)");
    verify->add_option("--curves", max_curves, "max curves (<= 6)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (optimize->parsed())
            return cmd_optimize(objective, policy, gamma, budget, m, K, seed, trace_out,
                                dump_posterior);
        if (benchmark->parsed()) return cmd_benchmark(config_path, out_dir);
        if (stepsize->parsed())
            return cmd_stepsize(suite, band, step_out, inits, iterations, sigma, step_seed,
                                threads);
        if (verify->parsed()) return cmd_verify(instances, verify_seed, max_grid, max_curves);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
