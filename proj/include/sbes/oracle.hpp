#pragma once
// Brute-force verification of the information-theoretic claims on small
// finite instances.  The maximizer is categorical over the quantizer cells
// (one cell per belief curve, cells bounded by grid points), so entropies
// are discrete and every expectation is an exact enumeration over curves
// and the two comparison outcomes.
//
// The conditional outcome distribution per curve follows the region table:
// optimizer left of the pair -> 1-g, inside -> 1-gbar, right of -> g, with
// the mixture g/gbar.  Under that joint the posterior update is exact Bayes
// and the predictive mutual information equals -nu at aligned states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sbes/policy.hpp"

namespace sbes {

// Finite instance: grid points bound the quantizer cells; curve k's
// optimizer lies strictly inside cell curve_cell[k]; truth_index names the
// curve generating the data.
struct FiniteInstance {
    std::vector<double> grid;
    BeliefEnsemble ensemble;
    int truth_index = 0;
    std::vector<int> curve_cell;

    std::size_t cells() const { return grid.size() - 1; }
};

inline FiniteInstance make_instance(std::vector<double> grid, BeliefEnsemble ensemble,
                                    int truth_index) {
    if (grid.size() < 3 || grid.size() > 41)
        throw std::invalid_argument("make_instance: grid must have 3..41 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("make_instance: grid must be strictly increasing");
    if (truth_index < 0 || std::size_t(truth_index) >= ensemble.size())
        throw std::invalid_argument("make_instance: truth index out of range");

    std::vector<int> cell_of(ensemble.size(), -1);
    std::vector<bool> taken(grid.size() - 1, false);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        const double opt = ensemble.curve(k).argmax_location;
        int cell = -1;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (opt > grid[i] && opt < grid[i + 1]) { cell = int(i); break; }
        if (cell < 0)
            throw std::invalid_argument("make_instance: optimizer of curve " +
                                        ensemble.curve(k).label + " not strictly inside a cell");
        if (taken[cell])
            throw std::invalid_argument("make_instance: two optimizers share a cell");
        taken[cell] = true;
        cell_of[k] = cell;
    }
    return {std::move(grid), std::move(ensemble), truth_index, std::move(cell_of)};
}

// State whose piecewise posterior carries exactly the ensemble weights on the
// quantizer cells (the one-to-one alignment the theory assumes).  History
// values are noisy truth evaluations.
inline SearchState aligned_state(const FiniteInstance& inst,
                                 const std::vector<int>& history_indices, Rng& rng) {
    const auto w = inst.ensemble.weights();
    std::vector<double> dens(inst.cells(), 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) {
        const int c = inst.curve_cell[k];
        dens[c] = w[k] / (inst.grid[c + 1] - inst.grid[c]);
    }
    PiecewiseDensity posterior(inst.grid.front(), inst.grid.back(),
                               {inst.grid.begin() + 1, inst.grid.end() - 1}, std::move(dens));

    SearchState state{std::move(posterior), {}, {}, inst.ensemble, 1, 0};
    const auto& truth = inst.ensemble.curve(inst.truth_index);
    for (int idx : history_indices) {
        if (idx < 0 || std::size_t(idx) >= inst.grid.size())
            throw std::invalid_argument("aligned_state: history index out of range");
        const double x = inst.grid[idx];
        if (state.in_history(x)) continue;
        state.history_points.push_back(x);
        state.history_values.push_back(truth(x) + inst.ensemble.noise_sigma() * rng.normal());
        state.evaluations_used += 1;
    }
    if (state.history_points.size() < 2)
        throw std::invalid_argument("aligned_state: needs >= 2 distinct history points");
    return state;
}

namespace detail {

// Everything the enumeration needs for one decision on one instance.
struct OutcomeModel {
    std::vector<double> weights;  // p_k
    std::vector<double> q;        // P(y=1 | theta_k), region-table entries
    double u1 = 0.0;              // sum_k p_k q_k
    std::vector<double> post1;    // masses given y=1
    std::vector<double> post0;    // masses given y=0
};

inline double discrete_entropy_bits(const std::vector<double>& masses) {
    double h = 0.0;
    for (double m : masses) h -= plog2p(m);
    return h;
}

inline OutcomeModel outcome_model(const SearchState& state, const Decision& decision) {
    const double x_l = decision.x_l(), x_r = decision.x_r();
    const double g = state.ensemble.g_mixture(x_l, x_r);
    const double g_bar = state.ensemble.g_bar(x_l, x_r);

    OutcomeModel m;
    m.weights = state.ensemble.weights();
    m.q.resize(m.weights.size());
    for (std::size_t k = 0; k < m.weights.size(); ++k) {
        const double opt = state.ensemble.curve(k).argmax_location;
        if (opt <= x_l)
            m.q[k] = 1.0 - g;
        else if (opt >= x_r)
            m.q[k] = g;
        else
            m.q[k] = 1.0 - g_bar;
    }
    m.u1 = std::inner_product(m.weights.begin(), m.weights.end(), m.q.begin(), 0.0);
    const double u0 = 1.0 - m.u1;
    m.post1.resize(m.weights.size());
    m.post0.resize(m.weights.size());
    for (std::size_t k = 0; k < m.weights.size(); ++k) {
        m.post1[k] = m.weights[k] * m.q[k] / m.u1;
        m.post0[k] = m.weights[k] * (1.0 - m.q[k]) / u0;
    }
    return m;
}

// Feasible decisions shared by every policy on the instance: any history
// point paired with any grid point not already in the history.
inline std::vector<Decision> feasible_decisions(const FiniteInstance& inst,
                                                const SearchState& state) {
    std::vector<Decision> out;
    for (double z : inst.grid) {
        if (state.in_history(z)) continue;
        for (double h : state.history_points) out.push_back({h, z});
    }
    if (out.empty()) throw std::invalid_argument("feasible_decisions: no legal pair");
    return out;
}

}  // namespace detail

// H(X*) - E_theta E_{y|theta} [H(X* | y)], bits, by exact enumeration.
inline double predictive_mi([[maybe_unused]] const FiniteInstance& inst,
                            const SearchState& state, const Decision& decision) {
    const auto m = detail::outcome_model(state, decision);
    const double h1 = detail::discrete_entropy_bits(m.post1);
    const double h0 = detail::discrete_entropy_bits(m.post0);
    double expected = 0.0;
    for (std::size_t k = 0; k < m.weights.size(); ++k)
        expected += m.weights[k] * (m.q[k] * h1 + (1.0 - m.q[k]) * h0);
    return detail::discrete_entropy_bits(m.weights) - expected;
}

// Same decomposition with the outer expectation taken under the truth curve's
// outcome distribution.
inline double perfect_mi(const FiniteInstance& inst, const SearchState& state,
                         const Decision& decision) {
    const auto m = detail::outcome_model(state, decision);
    const double qs = m.q[inst.truth_index];
    const double expected = qs * detail::discrete_entropy_bits(m.post1) +
                            (1.0 - qs) * detail::discrete_entropy_bits(m.post0);
    return detail::discrete_entropy_bits(m.weights) - expected;
}

// Outcome-side forms, H(p(y)) - E[H(p(y|theta))]; the predictive one equals
// predictive_mi exactly, the perfect one is the form the error-bound proof
// manipulates.
inline double predictive_mi_outcome_side([[maybe_unused]] const FiniteInstance& inst,
                                         const SearchState& state, const Decision& decision) {
    const auto m = detail::outcome_model(state, decision);
    double cond = 0.0;
    for (std::size_t k = 0; k < m.weights.size(); ++k)
        cond += m.weights[k] * binary_entropy_bits(m.q[k]);
    return binary_entropy_bits(m.u1) - cond;
}

inline double perfect_mi_outcome_side(const FiniteInstance& inst, const SearchState& state,
                                      const Decision& decision) {
    const auto m = detail::outcome_model(state, decision);
    return binary_entropy_bits(m.u1) - binary_entropy_bits(m.q[inst.truth_index]);
}

// The search decision under full enumeration (candidate set = whole grid).
inline Decision sbes_decision(const FiniteInstance& inst, const SearchState& state) {
    std::vector<double> grid = inst.grid;
    return propose_from_candidates(state, grid).decision;
}

// Argmax of perfect mutual information over the feasible pairs; ties resolve
// like propose (smaller z, then smaller h).
inline Decision exhaustive_optimal_policy(const FiniteInstance& inst, const SearchState& state) {
    Decision best{};
    double best_value = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (const Decision& d : detail::feasible_decisions(inst, state)) {
        const double v = perfect_mi(inst, state, d);
        if (!found || v > best_value ||
            (v == best_value && (d.z < best.z || (d.z == best.z && d.h < best.h)))) {
            best = d;
            best_value = v;
            found = true;
        }
    }
    return best;
}

// Lemma check: the search decision attains the maximum predictive mutual
// information over every feasible pair.
inline bool check_lemma1(const FiniteInstance& inst, const SearchState& state,
                         double tol = 1e-9) {
    const double sbes_value = predictive_mi(inst, state, sbes_decision(inst, state));
    for (const Decision& d : detail::feasible_decisions(inst, state))
        if (predictive_mi(inst, state, d) > sbes_value + tol) return false;
    return true;
}

struct MutualInfoReport {
    double predictive = 0.0;    // bits, search decision
    double perfect = 0.0;       // bits, search decision
    double kl_to_truth = 0.0;   // nats, -ln p_{truth}
    double bound_rhs = 0.0;     // 4 sqrt(2 kl), nats
    double gap_nats = 0.0;      // |I*(pi*) - I*(search)|, nats
    double l1_weight_error = 0.0;
    bool truth_weight_zero = false;
};

struct TheoremCheck {
    MutualInfoReport report;
    bool theorem_holds = false;    // gap <= bound
    bool corollary_holds = false;  // I*(search) >= max(I*(pi*) - bound, 0)
    bool chain_holds = false;      // |I* - Ihat| <= ||p - p*||_1 per policy
};

inline TheoremCheck check_theorem1(const FiniteInstance& inst, const SearchState& state,
                                   double tol = 1e-9) {
    constexpr double ln2 = 0.6931471805599453;
    const Decision d_sbes = sbes_decision(inst, state);
    const Decision d_star = exhaustive_optimal_policy(inst, state);

    const auto w = state.ensemble.weights();
    double l1 = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        l1 += std::abs(w[k] - (int(k) == inst.truth_index ? 1.0 : 0.0));

    TheoremCheck out;
    out.report.predictive = predictive_mi(inst, state, d_sbes);
    out.report.perfect = perfect_mi(inst, state, d_sbes);
    out.report.l1_weight_error = l1;
    const double p_truth = w[inst.truth_index];
    out.report.truth_weight_zero = !(p_truth > 0.0);
    out.report.kl_to_truth =
        out.report.truth_weight_zero ? std::numeric_limits<double>::infinity() : -std::log(p_truth);
    out.report.bound_rhs = 4.0 * std::sqrt(2.0 * out.report.kl_to_truth);

    const double perfect_star_nats = perfect_mi(inst, state, d_star) * ln2;
    const double perfect_sbes_nats = out.report.perfect * ln2;
    out.report.gap_nats = std::abs(perfect_star_nats - perfect_sbes_nats);

    if (out.report.truth_weight_zero) {
        // Infinite divergence bound; both inequalities are vacuous.
        out.theorem_holds = true;
        out.corollary_holds = true;
    } else {
        out.theorem_holds = out.report.gap_nats <= out.report.bound_rhs + tol;
        out.corollary_holds = perfect_sbes_nats >=
                              std::max(perfect_star_nats - out.report.bound_rhs, 0.0) - tol;
    }
    out.chain_holds = true;
    for (const Decision& d : {d_sbes, d_star}) {
        const double gap_x = std::abs(perfect_mi(inst, state, d) - predictive_mi(inst, state, d));
        const double gap_y = std::abs(perfect_mi_outcome_side(inst, state, d) -
                                      predictive_mi_outcome_side(inst, state, d));
        if (gap_x > l1 + tol || gap_y > l1 + tol) out.chain_holds = false;
    }
    return out;
}

// Randomized instance generator for the property suites: jittered grid,
// 2..6 curves of mixed families with optimizers in distinct cells, Dirichlet
// weights, random truth.
inline FiniteInstance make_random_instance(Rng& rng, int max_grid = 41, int max_curves = 6) {
    const int points = rng.uniform_int(8, max_grid);
    const double lo = 0.0, hi = rng.uniform(1.0, 10.0);
    std::vector<double> grid(points);
    const double spacing = (hi - lo) / (points - 1);
    grid[0] = lo;
    grid[points - 1] = hi;
    for (int i = 1; i + 1 < points; ++i)
        grid[i] = lo + spacing * (i + rng.uniform(-0.3, 0.3));

    const int n_curves = rng.uniform_int(2, max_curves);
    std::vector<int> cells(points - 1);
    std::iota(cells.begin(), cells.end(), 0);
    for (int i = int(cells.size()) - 1; i > 0; --i)
        std::swap(cells[i], cells[rng.uniform_int(0, i)]);

    std::vector<BeliefCurve> curves;
    double amp_scale = rng.uniform(0.5, 2.0);
    for (int k = 0; k < n_curves; ++k) {
        const int cell = cells[k];
        const double cl = grid[cell], cr = grid[cell + 1];
        const double center = cl + (cr - cl) * rng.uniform(0.2, 0.8);
        const double amp = amp_scale * rng.uniform(0.5, 2.0);
        std::function<double(double)> fn;
        if (rng.uniform01() < 0.5) {
            const double width = (hi - lo) * rng.uniform(0.05, 0.4);
            fn = [center, width, amp](double x) {
                const double t = (x - center) / width;
                return amp * std::exp(-0.5 * t * t);
            };
        } else {
            const double curv = amp / ((hi - lo) * (hi - lo)) * rng.uniform(0.5, 4.0);
            fn = [center, curv, amp](double x) {
                return quadratic_curve(x, center, curv, amp);
            };
        }
        curves.push_back(make_curve("rand" + std::to_string(k), std::move(fn), lo, hi));
    }

    std::vector<double> weights(n_curves);
    for (double& w : weights) w = -std::log(rng.uniform01());
    const double sigma = amp_scale * rng.uniform(0.05, 1.0);
    BeliefEnsemble ensemble(std::move(curves), sigma, lo, hi, weights);
    return make_instance(std::move(grid), std::move(ensemble), rng.uniform_int(0, n_curves - 1));
}

inline std::vector<int> random_history_indices(const FiniteInstance& inst, Rng& rng) {
    const int count = rng.uniform_int(2, 4);
    std::vector<int> idx;
    while (int(idx.size()) < count) {
        const int i = rng.uniform_int(0, int(inst.grid.size()) - 1);
        if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    return idx;
}

}  // namespace sbes
