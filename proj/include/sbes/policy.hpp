#pragma once
// The entropy-search policy over the piecewise posterior.  For a candidate
// pair (h, z) with ordered locations x_l < x_r, CDF values F_l = F(x_l),
// F_r = F(x_r) and region probabilities g, gbar, the expected one-step
// change in posterior entropy has the closed form (bits)
//
//   nu = [g log2 g + (1-g) log2(1-g)] (F_r - F_l - 1)
//      - [gbar log2 gbar + (1-gbar) log2(1-gbar)] (F_r - F_l)
//      + U1 log2 U1 + U0 log2 U0
//
// which equals E[H(P')] - H(P) under the predictive outcome distribution
// (U1, U0).  nu <= 0 always; the search picks the pair minimizing it, with
// the new point z drawn from the current posterior.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sbes/belief.hpp"
#include "sbes/posterior.hpp"

namespace sbes {

// Ordered decision: h reuses a historical observation, z is freshly evaluated.
struct Decision {
    double h = 0.0;
    double z = 0.0;
    double x_l() const { return std::min(h, z); }
    double x_r() const { return std::max(h, z); }
};

struct AcquisitionValue {
    Decision decision;
    double nu = 0.0;  // expected entropy change, bits; <= 0 up to rounding
};

// Full search state: posterior over the maximizer, evaluation history, and
// the belief ensemble.  Value semantics; updates return/produce new values.
struct SearchState {
    PiecewiseDensity posterior;
    std::vector<double> history_points;
    std::vector<double> history_values;
    BeliefEnsemble ensemble;
    int iteration = 0;
    int evaluations_used = 0;

    double delta() const { return posterior.delta(); }

    bool in_history(double x) const {
        for (double p : history_points)
            if (std::abs(p - x) < delta()) return true;
        return false;
    }

    double value_at(double x) const {
        for (std::size_t i = 0; i < history_points.size(); ++i)
            if (std::abs(history_points[i] - x) < delta()) return history_values[i];
        throw std::invalid_argument("value_at: point not in history");
    }
};

inline double nu_closed_form(double g, double g_bar, double cdf_l, double cdf_r) {
    const double u1 = normalizer_u1(g, g_bar, cdf_l, cdf_r);
    const double u0 = normalizer_u0(g, g_bar, cdf_l, cdf_r);
    const double span = cdf_r - cdf_l;
    return (plog2p(g) + plog2p(1.0 - g)) * (span - 1.0) -
           (plog2p(g_bar) + plog2p(1.0 - g_bar)) * span + plog2p(u1) + plog2p(u0);
}

inline double acquisition_nu(const SearchState& state, double h, double z) {
    const double x_l = std::min(h, z), x_r = std::max(h, z);
    if (!(x_r - x_l >= state.delta()))
        throw std::invalid_argument("acquisition_nu: pair points coincide");
    const double g = state.ensemble.g_mixture(x_l, x_r);
    const double g_bar = state.ensemble.g_bar(x_l, x_r);
    return nu_closed_form(g, g_bar, state.posterior.cdf(x_l), state.posterior.cdf(x_r));
}

// Argmin of nu over {h in history} x {z in candidates}; candidates colliding
// with the history are skipped.  Ties resolve to the smaller z, then the
// smaller h.  Every evaluated nu is checked against the information
// nonnegativity bound.
inline AcquisitionValue propose_from_candidates(const SearchState& state,
                                                std::span<const double> candidates) {
    if (state.history_points.size() < 2)
        throw std::invalid_argument("propose: state not initialized (needs >= 2 history points)");
    bool found = false;
    AcquisitionValue best;
    for (double z : candidates) {
        if (state.in_history(z)) continue;
        for (double h : state.history_points) {
            const double nu = acquisition_nu(state, h, z);
            if (nu > 1e-9)
                throw std::logic_error("acquisition bound violated: nu = " + std::to_string(nu));
            if (!found || nu < best.nu ||
                (nu == best.nu && (z < best.decision.z ||
                                   (z == best.decision.z && h < best.decision.h)))) {
                best = {{h, z}, nu};
                found = true;
            }
        }
    }
    if (!found) throw std::runtime_error("propose: no valid candidate pair");
    return best;
}

inline AcquisitionValue propose(const SearchState& state, int m, Rng& rng) {
    if (m < 1) throw std::invalid_argument("propose: m must be >= 1");
    auto candidates = state.posterior.sample(m, rng, state.history_points);
    // The jitter acceptance in sample() can still leave collisions in
    // pathological states; widen once before giving up.
    bool any = false;
    for (double z : candidates)
        if (!state.in_history(z)) { any = true; break; }
    if (!any) {
        candidates = state.posterior.sample(m, rng, state.history_points);
        for (double& z : candidates) {
            const double widened = z + 10.0 * state.delta();
            z = widened <= state.posterior.hi() ? widened : z - 10.0 * state.delta();
        }
    }
    return propose_from_candidates(state, candidates);
}

// One transition: form the comparison outcome from the stored value at h and
// the fresh observation at z, update posterior and weights, extend history.
inline SearchState step(SearchState state, const Decision& decision, double observed_z) {
    if (!state.in_history(decision.h))
        throw std::invalid_argument("step: decision.h not in history");
    if (state.in_history(decision.z))
        throw std::invalid_argument("step: decision.z already in history");
    if (decision.z < state.posterior.lo() || decision.z > state.posterior.hi())
        throw std::invalid_argument("step: decision.z outside domain");

    const double x_l = decision.x_l(), x_r = decision.x_r();
    const double value_h = state.value_at(decision.h);
    const double value_l = decision.h < decision.z ? value_h : observed_z;
    const double value_r = decision.h < decision.z ? observed_z : value_h;
    const int y_hat = value_l <= value_r ? 1 : 0;

    const double g = state.ensemble.g_mixture(x_l, x_r);
    const double g_bar = state.ensemble.g_bar(x_l, x_r);
    state.posterior.update({y_hat, x_l, x_r}, g, g_bar);

    state.history_points.push_back(decision.z);
    state.history_values.push_back(observed_z);
    state.ensemble.update_weights(decision.z, observed_z);
    state.iteration += 1;
    state.evaluations_used += 1;
    return state;
}

using Evaluator = std::function<double(double)>;

// Evaluates the initial pair (defaults to the golden-section interior points),
// performs the first posterior update from their comparison, and folds both
// observations into the weights.  Costs two evaluations.
inline SearchState initialize(double lo, double hi, BeliefEnsemble ensemble,
                              std::optional<std::pair<double, double>> x0,
                              const Evaluator& evaluate) {
    if (!(lo < hi)) throw std::invalid_argument("initialize: empty domain");
    double x_l = lo + 0.382 * (hi - lo);
    double x_r = lo + 0.618 * (hi - lo);
    if (x0) {
        x_l = std::min(x0->first, x0->second);
        x_r = std::max(x0->first, x0->second);
        if (x_l < lo || x_r > hi) throw std::invalid_argument("initialize: x0 outside domain");
        if (!(x_r - x_l >= 1e-9 * (hi - lo)))
            throw std::invalid_argument("initialize: x0 points must be distinct");
    }

    const double value_l = evaluate(x_l);
    const double value_r = evaluate(x_r);
    const int y_hat = value_l <= value_r ? 1 : 0;

    SearchState state{PiecewiseDensity(lo, hi), {}, {}, std::move(ensemble), 0, 0};
    const double g = state.ensemble.g_mixture(x_l, x_r);
    const double g_bar = state.ensemble.g_bar(x_l, x_r);
    state.posterior.update({y_hat, x_l, x_r}, g, g_bar);
    state.history_points = {x_l, x_r};
    state.history_values = {value_l, value_r};
    state.ensemble.update_weights(x_l, value_l);
    state.ensemble.update_weights(x_r, value_r);
    state.iteration = 1;
    state.evaluations_used = 2;
    return state;
}

struct TraceRow {
    int n = 0;
    double h = 0.0, z = 0.0;
    int y_hat = 0;
    double nu_bits = 0.0;
    double entropy_bits = 0.0;
    double kl_bits = 0.0;
    double recommend = 0.0;
    // weights summary: heaviest ensemble member and its mass
    int top_curve = 0;
    double top_weight = 0.0;
};

struct OptimizerConfig {
    double lo = 0.0, hi = 1.0;
    int budget = 30;      // N iterations; consumes budget + 1 evaluations
    int candidates = 20;  // m, posterior samples per iteration
    uint64_t seed = 1;
    std::optional<std::pair<double, double>> x0;
    // Called after every iteration with the freshly updated state.
    std::function<void(const SearchState&, const TraceRow&)> observer;
};

struct OptimizeOutcome {
    double recommendation = 0.0;
    std::vector<TraceRow> trace;
    SearchState state;
};

// Algorithm loop: initialize, then budget-1 propose/evaluate/step rounds.
inline OptimizeOutcome optimize(const Evaluator& evaluate, BeliefEnsemble ensemble,
                                const OptimizerConfig& config) {
    if (config.budget < 2) throw std::invalid_argument("optimize: budget must be >= 2");
    Rng rng(config.seed);

    // Acquisition of the initial pair, valued against the uninformed state.
    double x_l = config.lo + 0.382 * (config.hi - config.lo);
    double x_r = config.lo + 0.618 * (config.hi - config.lo);
    if (config.x0) {
        x_l = std::min(config.x0->first, config.x0->second);
        x_r = std::max(config.x0->first, config.x0->second);
    }
    SearchState pre{PiecewiseDensity(config.lo, config.hi), {}, {}, ensemble, 0, 0};
    const double nu0 = acquisition_nu(pre, x_l, x_r);

    SearchState state = initialize(config.lo, config.hi, std::move(ensemble), config.x0, evaluate);

    std::vector<TraceRow> trace;
    trace.reserve(config.budget);
    auto record = [&](double h, double z, int y, double nu) {
        const auto weights = state.ensemble.weights();
        int top = 0;
        for (int k = 1; k < int(weights.size()); ++k)
            if (weights[k] > weights[top]) top = k;
        trace.push_back({state.iteration, h, z, y, nu, state.posterior.entropy_bits(),
                         state.posterior.kl_to_uniform_bits(), state.posterior.recommend(),
                         top, weights[top]});
        if (config.observer) config.observer(state, trace.back());
    };
    record(x_l, x_r, state.history_values[0] <= state.history_values[1] ? 1 : 0, nu0);

    for (int n = 2; n <= config.budget; ++n) {
        const AcquisitionValue pick = propose(state, config.candidates, rng);
        const double observed = evaluate(pick.decision.z);
        const double value_h = state.value_at(pick.decision.h);
        const double value_l = pick.decision.h < pick.decision.z ? value_h : observed;
        const double value_r = pick.decision.h < pick.decision.z ? observed : value_h;
        state = step(std::move(state), pick.decision, observed);
        record(pick.decision.h, pick.decision.z, value_l <= value_r ? 1 : 0, pick.nu);
    }

    return {state.posterior.recommend(), std::move(trace), std::move(state)};
}

}  // namespace sbes
