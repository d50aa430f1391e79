#pragma once
// Exact piecewise-constant density over a closed interval, used as the belief
// about the maximizer location.  A comparison outcome multiplies the three
// regions (-inf, x_l], (x_l, x_r), [x_r, +inf) clipped to the domain by
// region-constant factors and renormalizes, so piecewise-constant densities
// are closed under updates and CDF/entropy/sampling are exact:
//
//   y=1 (observed f(x_l) <= f(x_r)):  factors (1-g, 1-gbar, g),   normalizer U1
//   y=0 (observed f(x_l) >  f(x_r)):  factors (g, gbar, 1-g),     normalizer U0
//
//   U1 = (1-g)F(x_l) + (1-gbar)(F(x_r)-F(x_l)) + g(1-F(x_r))
//   U0 =     g F(x_l) +    gbar (F(x_r)-F(x_l)) + (1-g)(1-F(x_r))
//
// U1 + U0 = 1 identically.  Breakpoints grow by at most two per update.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbes/math.hpp"

namespace sbes {

// Comparison between the ordered pair (x_l, x_r): y_hat = 1 iff the noisy
// observation at x_l was <= the one at x_r.
struct ComparisonOutcome {
    int y_hat = 1;
    double x_l = 0.0;
    double x_r = 0.0;
};

class PiecewiseDensity {
public:
    // Uniform density on [lo, hi].
    PiecewiseDensity(double lo, double hi) {
        if (!(lo < hi)) throw std::invalid_argument("PiecewiseDensity: empty domain");
        edges_ = {lo, hi};
        dens_ = {1.0 / (hi - lo)};
    }

    PiecewiseDensity(double lo, double hi, std::vector<double> interior_breaks,
                     std::vector<double> densities) {
        if (!(lo < hi)) throw std::invalid_argument("PiecewiseDensity: empty domain");
        if (densities.size() != interior_breaks.size() + 1)
            throw std::invalid_argument("PiecewiseDensity: intervals != breakpoints + 1");
        edges_.reserve(interior_breaks.size() + 2);
        edges_.push_back(lo);
        for (double b : interior_breaks) {
            if (!(b > edges_.back()) || !(b < hi))
                throw std::invalid_argument("PiecewiseDensity: breakpoints must be strictly increasing inside (lo,hi)");
            edges_.push_back(b);
        }
        edges_.push_back(hi);
        for (double d : densities)
            if (d < 0.0) throw std::invalid_argument("PiecewiseDensity: negative density");
        dens_ = std::move(densities);
        normalize();
    }

    double lo() const { return edges_.front(); }
    double hi() const { return edges_.back(); }
    double width() const { return hi() - lo(); }
    // Merge tolerance for breakpoints and sample dedup.
    double delta() const { return 1e-9 * width(); }

    std::size_t interval_count() const { return dens_.size(); }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& densities() const { return dens_; }
    std::vector<double> interior_breakpoints() const {
        return {edges_.begin() + 1, edges_.end() - 1};
    }

    double total_mass() const {
        double m = 0.0;
        for (std::size_t i = 0; i < dens_.size(); ++i) m += dens_[i] * (edges_[i + 1] - edges_[i]);
        return m;
    }

    // Exact integral of the density from lo to x.
    double cdf(double x) const {
        if (x < lo() - delta() || x > hi() + delta())
            throw std::invalid_argument("cdf: point outside domain");
        x = std::clamp(x, lo(), hi());
        double acc = 0.0;
        for (std::size_t i = 0; i < dens_.size(); ++i) {
            if (x >= edges_[i + 1]) {
                acc += dens_[i] * (edges_[i + 1] - edges_[i]);
            } else {
                acc += dens_[i] * (x - edges_[i]);
                break;
            }
        }
        return std::min(acc, 1.0);
    }

    // Splits the interval containing x without changing the density function.
    // Points within delta() of an existing edge are merged with it.
    void refine_at(double x) { ensure_edge(x); }

    void update(const ComparisonOutcome& outcome, double g, double g_bar) {
        if (!(g > 0.0 && g < 1.0) || !(g_bar > 0.0 && g_bar < 1.0))
            throw std::invalid_argument("update: g and g_bar must lie in (0,1)");
        if (!(outcome.x_l < outcome.x_r))
            throw std::invalid_argument("update: requires x_l < x_r");
        if (outcome.x_l < lo() - delta() || outcome.x_r > hi() + delta())
            throw std::invalid_argument("update: pair outside domain");

        const std::size_t il = ensure_edge(outcome.x_l);
        const std::size_t ir = ensure_edge(outcome.x_r);

        const double f_left = outcome.y_hat ? 1.0 - g : g;
        const double f_mid = outcome.y_hat ? 1.0 - g_bar : g_bar;
        const double f_right = outcome.y_hat ? g : 1.0 - g;

        for (std::size_t i = 0; i < dens_.size(); ++i) {
            if (i < il)
                dens_[i] *= f_left;
            else if (i < ir)
                dens_[i] *= f_mid;
            else
                dens_[i] *= f_right;
        }
        const double total = total_mass();
        if (total < 1e-300) throw std::runtime_error("update: degenerate normalizer");
        for (double& d : dens_) d /= total;
        validate();
    }

    // -sum_i m_i log2(density_i), exact for piecewise-constant densities.
    double entropy_bits() const {
        double h = 0.0;
        for (std::size_t i = 0; i < dens_.size(); ++i) {
            const double len = edges_[i + 1] - edges_[i];
            if (dens_[i] > 0.0) h -= dens_[i] * len * std::log2(dens_[i]);
        }
        return h;
    }

    double kl_to_uniform_bits() const { return std::log2(width()) - entropy_bits(); }

    // Inverse CDF at u in (0,1); zero-mass intervals are skipped.  Rounding
    // overshoot past the accumulated mass lands in the last positive
    // interval.
    double inverse_cdf(double u) const {
        if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("inverse_cdf: u outside (0,1)");
        double acc = 0.0;
        std::size_t last = dens_.size();
        for (std::size_t i = 0; i < dens_.size(); ++i) {
            const double m = dens_[i] * (edges_[i + 1] - edges_[i]);
            if (m <= 0.0) continue;
            if (u <= acc + m)
                return std::min(edges_[i] + (u - acc) / dens_[i], edges_[i + 1]);
            acc += m;
            last = i;
        }
        return last == dens_.size() ? hi() : edges_[last + 1];
    }

    // Inverse-CDF sampling; points are deduplicated against `avoid` and each
    // other to spacing delta(), redrawing up to 100 times and then accepting
    // with a jitter of delta().
    std::vector<double> sample(int count, Rng& rng,
                               std::span<const double> avoid = {}) const {
        if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
        std::vector<double> out;
        out.reserve(count);
        auto collides = [&](double x) {
            for (double a : avoid)
                if (std::abs(x - a) < delta()) return true;
            for (double a : out)
                if (std::abs(x - a) < delta()) return true;
            return false;
        };
        for (int i = 0; i < count; ++i) {
            double x = inverse_cdf(rng.uniform01());
            for (int attempt = 0; attempt < 100 && collides(x); ++attempt)
                x = inverse_cdf(rng.uniform01());
            if (collides(x)) {
                double jittered = x + delta();
                if (jittered > hi()) jittered = x - delta();
                x = std::clamp(jittered, lo(), hi());
            }
            out.push_back(x);
        }
        return out;
    }

    // Midpoint of the highest-density interval; ties broken by larger mass,
    // then leftmost.
    double recommend() const {
        std::size_t best = 0;
        double best_d = -1.0, best_m = -1.0;
        for (std::size_t i = 0; i < dens_.size(); ++i) {
            const double m = dens_[i] * (edges_[i + 1] - edges_[i]);
            if (dens_[i] > best_d || (dens_[i] == best_d && m > best_m)) {
                best = i;
                best_d = dens_[i];
                best_m = m;
            }
        }
        return 0.5 * (edges_[best] + edges_[best + 1]);
    }

    void validate() const {
        const double mass = total_mass();
        if (std::abs(mass - 1.0) > 1e-9)
            throw std::runtime_error("PiecewiseDensity: mass " + std::to_string(mass) + " != 1");
        for (double d : dens_)
            if (!(d >= 0.0) || !std::isfinite(d))
                throw std::runtime_error("PiecewiseDensity: invalid density value");
    }

private:
    void normalize() {
        const double total = total_mass();
        if (total < 1e-300) throw std::invalid_argument("PiecewiseDensity: zero total mass");
        for (double& d : dens_) d /= total;
    }

    // Returns the index of the edge equal to x (after snapping within
    // delta()); inserts a new edge if needed.  Edges at the domain ends map
    // to the boundary indices, leaving the corresponding region empty.
    std::size_t ensure_edge(double x) {
        if (x <= lo() + delta()) return 0;
        if (x >= hi() - delta()) return edges_.size() - 1;
        for (std::size_t i = 1; i + 1 < edges_.size(); ++i)
            if (std::abs(edges_[i] - x) < delta()) return i;
        std::size_t i = 1;
        while (edges_[i] < x) ++i;
        edges_.insert(edges_.begin() + i, x);
        dens_.insert(dens_.begin() + i, dens_[i - 1]);
        return i;
    }

    std::vector<double> edges_;  // lo = e_0 < e_1 < ... < e_M = hi
    std::vector<double> dens_;   // one value per interval [e_i, e_{i+1}]
};

// Normalizers of the comparison update, evaluated from CDF values so callers
// can reuse them in the acquisition closed form.
inline double normalizer_u1(double g, double g_bar, double cdf_l, double cdf_r) {
    return (1.0 - g) * cdf_l + (1.0 - g_bar) * (cdf_r - cdf_l) + g * (1.0 - cdf_r);
}

inline double normalizer_u0(double g, double g_bar, double cdf_l, double cdf_r) {
    return g * cdf_l + g_bar * (cdf_r - cdf_l) + (1.0 - g) * (1.0 - cdf_r);
}

}  // namespace sbes
