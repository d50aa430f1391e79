#pragma once
// Sampled belief over the truth function: K unimodal candidate curves f_k
// with log-space weights and a known homoscedastic Gaussian noise sigma.
//
// Region-assignment probabilities for an ordered pair x_l < x_r:
//   g_k(x,y)   = Phi(|f_k(x) - f_k(y)| / (sqrt(2) sigma))        in [1/2, 1]
//   g(x,y)     = sum_k p_k g_k(x,y)                               (mixture)
//   gbar(x,y)  = sum_{k: x*_k in (x_l,x_r)} (p_k / P) *
//                Phi((f_k(x_l) - f_k(x_r)) / (sqrt(2) sigma))
// with gbar = 1/2 when no curve's optimizer lies inside the pair.  The
// sqrt(2) comes from comparing two observations, each with noise sigma.
//
// Weight updates are Bayesian with Gaussian likelihoods, carried out in
// log space with max subtraction so they survive small sigma.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sbes/math.hpp"

namespace sbes {

struct BeliefCurve {
    std::string label;
    std::function<double(double)> evaluate;
    double argmax_location = 0.0;

    double operator()(double x) const { return evaluate(x); }
};

// Single sign change of discrete differences on a dense grid.  Plateaus are
// tolerated; a rise after a fall is not.
inline bool is_unimodal(const std::function<double(double)>& f, double lo, double hi,
                        int grid_points = 1024) {
    double prev = f(lo);
    double vmin = prev, vmax = prev;
    std::vector<double> vals(grid_points + 1);
    vals[0] = prev;
    for (int i = 1; i <= grid_points; ++i) {
        const double x = lo + (hi - lo) * i / grid_points;
        const double v = f(x);
        if (!std::isfinite(v)) return false;
        vals[i] = v;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    const double tol = 1e-12 * std::max(1.0, vmax - vmin);
    bool falling = false;
    for (int i = 1; i <= grid_points; ++i) {
        const double d = vals[i] - vals[i - 1];
        if (d < -tol) falling = true;
        else if (d > tol && falling) return false;
    }
    return true;
}

inline BeliefCurve make_curve(std::string label, std::function<double(double)> fn,
                              double lo, double hi) {
    BeliefCurve c;
    c.label = std::move(label);
    c.argmax_location = grid_argmax(fn, lo, hi);
    c.evaluate = std::move(fn);
    return c;
}

class BeliefEnsemble {
public:
    BeliefEnsemble(std::vector<BeliefCurve> curves, double noise_sigma,
                   double domain_lo, double domain_hi,
                   std::vector<double> initial_weights = {})
        : curves_(std::move(curves)),
          sigma_(noise_sigma),
          lo_(domain_lo),
          hi_(domain_hi) {
        if (curves_.size() < 2) throw std::invalid_argument("BeliefEnsemble: needs K >= 2 curves");
        if (!(sigma_ >= 0.0)) throw std::invalid_argument("BeliefEnsemble: sigma must be >= 0");
        if (!(lo_ < hi_)) throw std::invalid_argument("BeliefEnsemble: empty domain");
        const double sep = delta();
        for (std::size_t i = 0; i < curves_.size(); ++i)
            for (std::size_t j = i + 1; j < curves_.size(); ++j)
                if (std::abs(curves_[i].argmax_location - curves_[j].argmax_location) < sep)
                    throw std::invalid_argument("BeliefEnsemble: curves " + curves_[i].label +
                                                " and " + curves_[j].label +
                                                " share an optimizer");
        if (initial_weights.empty()) {
            log_weights_.assign(curves_.size(), -std::log(double(curves_.size())));
        } else {
            if (initial_weights.size() != curves_.size())
                throw std::invalid_argument("BeliefEnsemble: weight/curve count mismatch");
            double total = 0.0;
            for (double w : initial_weights) {
                if (!(w > 0.0)) throw std::invalid_argument("BeliefEnsemble: initial weights must be > 0");
                total += w;
            }
            log_weights_.reserve(initial_weights.size());
            for (double w : initial_weights) log_weights_.push_back(std::log(w / total));
        }
    }

    std::size_t size() const { return curves_.size(); }
    double noise_sigma() const { return sigma_; }
    double domain_lo() const { return lo_; }
    double domain_hi() const { return hi_; }
    double delta() const { return 1e-9 * (hi_ - lo_); }
    const std::vector<BeliefCurve>& curves() const { return curves_; }
    const BeliefCurve& curve(std::size_t k) const { return curves_[k]; }
    const std::vector<double>& log_weights() const { return log_weights_; }

    std::vector<double> weights() const {
        std::vector<double> w(log_weights_.size());
        const double lz = logsumexp(log_weights_);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_weights_[k] - lz);
        return w;
    }

    // Weighted-average approximation of the truth, sum_k p_k f_k(x).
    double mean_curve(double x) const {
        const auto w = weights();
        double acc = 0.0;
        for (std::size_t k = 0; k < curves_.size(); ++k) acc += w[k] * curves_[k](x);
        return acc;
    }

    // Bayesian weight update from one noisy observation at x.
    void update_weights(double x, double observed) {
        if (x < lo_ - delta() || x > hi_ + delta())
            throw std::invalid_argument("update_weights: point outside domain");
        if (!std::isfinite(observed))
            throw std::invalid_argument("update_weights: non-finite observation");
        if (sigma_ > 0.0) {
            const double inv2s2 = 1.0 / (2.0 * sigma_ * sigma_);
            for (std::size_t k = 0; k < curves_.size(); ++k) {
                const double r = observed - curves_[k](x);
                log_weights_[k] -= r * r * inv2s2;
            }
        } else {
            // Noiseless: curves matching the observation keep their mass.  If
            // none matches the update carries no usable information.
            const double tol = 1e-12 * std::max(1.0, std::abs(observed));
            bool any = false;
            for (const auto& c : curves_)
                if (std::abs(observed - c(x)) <= tol) { any = true; break; }
            if (!any) return;
            for (std::size_t k = 0; k < curves_.size(); ++k)
                if (std::abs(observed - curves_[k](x)) > tol) log_weights_[k] = -1e300;
        }
        renormalize();
    }

    // P(observing the true order of f_k at x,y); 1 under sigma=0 with the
    // exact tie returning 1/2.
    static double g_single(const BeliefCurve& curve, double x, double y, double sigma) {
        if (!(sigma >= 0.0)) throw std::invalid_argument("g_single: sigma must be >= 0");
        const double diff = std::abs(curve(x) - curve(y));
        if (sigma == 0.0) return diff == 0.0 ? 0.5 : 1.0;
        return std_normal_cdf(diff / (std::numbers::sqrt2 * sigma));
    }

    // Mixture sum_k p_k g_k(x,y), clamped away from {0,1}.
    double g_mixture(double x, double y) const {
        const auto w = weights();
        double acc = 0.0;
        for (std::size_t k = 0; k < curves_.size(); ++k)
            acc += w[k] * g_single(curves_[k], x, y, sigma_);
        return clamp_prob(acc);
    }

    // P(observing f(x_l) > f(x_r)) given the optimizer lies inside
    // (x_l, x_r); 1/2 when no curve's optimizer does.
    double g_bar(double x_l, double x_r) const {
        if (!(x_l < x_r)) throw std::invalid_argument("g_bar: requires x_l < x_r");
        const auto w = weights();
        double restricted = 0.0, acc = 0.0;
        for (std::size_t k = 0; k < curves_.size(); ++k) {
            const double opt = curves_[k].argmax_location;
            if (opt <= x_l || opt >= x_r) continue;
            restricted += w[k];
            double p;
            if (sigma_ == 0.0) {
                const double d = curves_[k](x_l) - curves_[k](x_r);
                p = d > 0.0 ? 1.0 : (d < 0.0 ? 0.0 : 0.5);
            } else {
                p = std_normal_cdf((curves_[k](x_l) - curves_[k](x_r)) /
                                   (std::numbers::sqrt2 * sigma_));
            }
            acc += w[k] * p;
        }
        if (restricted <= 0.0) return 0.5;
        return clamp_prob(acc / restricted);
    }

private:
    void renormalize() {
        const double lz = logsumexp(log_weights_);
        for (double& lw : log_weights_) lw -= lz;
    }

    std::vector<BeliefCurve> curves_;
    std::vector<double> log_weights_;
    double sigma_;
    double lo_, hi_;
};

// ---------------------------------------------------------------------------
// Parametric families

enum class CurveFamily { GaussianPdf, GammaPdf, BetaPdf, Quadratic, Tabulated };

inline CurveFamily curve_family_from_name(const std::string& name) {
    if (name == "gaussian-pdf") return CurveFamily::GaussianPdf;
    if (name == "gamma-pdf") return CurveFamily::GammaPdf;
    if (name == "beta-pdf") return CurveFamily::BetaPdf;
    if (name == "quadratic") return CurveFamily::Quadratic;
    if (name == "tabulated") return CurveFamily::Tabulated;
    throw std::invalid_argument("unknown curve family: " + name);
}

inline std::string curve_family_name(CurveFamily f) {
    switch (f) {
        case CurveFamily::GaussianPdf: return "gaussian-pdf";
        case CurveFamily::GammaPdf: return "gamma-pdf";
        case CurveFamily::BetaPdf: return "beta-pdf";
        case CurveFamily::Quadratic: return "quadratic";
        case CurveFamily::Tabulated: return "tabulated";
    }
    return "?";
}

inline double gaussian_pdf(double x, double mu, double s) {
    const double z = (x - mu) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
}

inline double gamma_pdf(double x, double shape, double rate) {
    if (x < 0.0) return 0.0;
    if (x == 0.0) return shape > 1.0 ? 0.0 : (shape == 1.0 ? rate : 0.0);
    return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                    std::lgamma(shape));
}

inline double beta_pdf(double x, double a, double b) {
    if (x < 0.0 || x > 1.0) return 0.0;
    if (x == 0.0) return a > 1.0 ? 0.0 : (a == 1.0 ? b : 0.0);
    if (x == 1.0) return b > 1.0 ? 0.0 : (b == 1.0 ? a : 0.0);
    const double logb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) - logb);
}

// Concave parabola height - curvature*(x - center)^2; params (center,
// curvature[, height]).
inline double quadratic_curve(double x, double center, double curvature, double height) {
    const double d = x - center;
    return height - curvature * d * d;
}

// Two-column CSV (x, f(x)) with strictly increasing x; linear interpolation
// between rows, clamped at the ends.
inline std::function<double(double)> tabulated_curve_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("tabulated curve: cannot open " + path);
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw std::invalid_argument("tabulated curve: malformed row in " + path);
        try {
            const double x = std::stod(a), y = std::stod(b);
            xs.push_back(x);
            ys.push_back(y);
        } catch (const std::exception&) {
            if (xs.empty()) continue;  // header row
            throw std::invalid_argument("tabulated curve: malformed number in " + path);
        }
    }
    if (xs.size() < 2) throw std::invalid_argument("tabulated curve: needs >= 2 rows");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw std::invalid_argument("tabulated curve: x column must be strictly increasing");
    return [xs = std::move(xs), ys = std::move(ys)](double x) {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        std::size_t i = 1;
        while (xs[i] < x) ++i;
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + t * (ys[i] - ys[i - 1]);
    };
}

// Family name + parameter grid (+ optional scale multipliers, the SCALE
// variant).  Expansion produces |parameter_grid| x |scale_grid| curves and
// validates unimodality of each on the target domain.
struct ParametricFamilySpec {
    CurveFamily family = CurveFamily::GaussianPdf;
    std::vector<std::vector<double>> parameter_grid;
    std::vector<double> scale_grid;             // empty means {1}
    std::vector<std::string> tabulated_files;   // used by Tabulated only

    bool empty() const { return parameter_grid.empty() && tabulated_files.empty(); }

    std::vector<BeliefCurve> expand(double lo, double hi) const {
        std::vector<std::function<double(double)>> bases;
        std::vector<std::string> labels;
        if (family == CurveFamily::Tabulated) {
            for (const auto& path : tabulated_files) {
                bases.push_back(tabulated_curve_from_csv(path));
                labels.push_back("tab:" + path);
            }
        } else {
            for (const auto& p : parameter_grid) {
                bases.push_back(base_curve(p));
                labels.push_back(param_label(p));
            }
        }
        if (bases.empty()) throw std::invalid_argument("ParametricFamilySpec: empty grid");
        const std::vector<double> scales = scale_grid.empty() ? std::vector<double>{1.0} : scale_grid;
        for (double c : scales)
            if (!(c > 0.0)) throw std::invalid_argument("ParametricFamilySpec: scales must be > 0");

        std::vector<BeliefCurve> out;
        out.reserve(bases.size() * scales.size());
        for (std::size_t i = 0; i < bases.size(); ++i) {
            for (std::size_t j = 0; j < scales.size(); ++j) {
                const double c = scales[j];
                auto base = bases[i];
                // Scaling alone leaves the optimizer in place, which would
                // collide with the distinct-optimizer requirement; scaled
                // variants are shifted horizontally by a vanishing offset.
                const double off = j == 0 ? 0.0 : double(j) * 1e-8 * (hi - lo);
                std::function<double(double)> fn =
                    (c == 1.0 && off == 0.0)
                        ? base
                        : std::function<double(double)>(
                              [base, c, off](double x) { return c * base(x - off); });
                if (!is_unimodal(fn, lo, hi))
                    throw std::invalid_argument("ParametricFamilySpec: curve " + labels[i] +
                                                " is not unimodal on the domain");
                std::string label = labels[i];
                if (scales.size() > 1 || c != 1.0) label += " x" + std::to_string(c);
                out.push_back(make_curve(std::move(label), std::move(fn), lo, hi));
            }
        }
        return out;
    }

private:
    std::function<double(double)> base_curve(const std::vector<double>& p) const {
        switch (family) {
            case CurveFamily::GaussianPdf:
                require_params(p, 2);
                return [mu = p[0], s = p[1]](double x) { return gaussian_pdf(x, mu, s); };
            case CurveFamily::GammaPdf:
                require_params(p, 2);
                return [k = p[0], r = p[1]](double x) { return gamma_pdf(x, k, r); };
            case CurveFamily::BetaPdf:
                require_params(p, 2);
                return [a = p[0], b = p[1]](double x) { return beta_pdf(x, a, b); };
            case CurveFamily::Quadratic: {
                if (p.size() != 2 && p.size() != 3)
                    throw std::invalid_argument("quadratic curve takes (center, curvature[, height])");
                const double h = p.size() == 3 ? p[2] : 0.0;
                return [c = p[0], a = p[1], h](double x) { return quadratic_curve(x, c, a, h); };
            }
            case CurveFamily::Tabulated:
                break;
        }
        throw std::invalid_argument("base_curve: unsupported family");
    }

    static void require_params(const std::vector<double>& p, std::size_t n) {
        if (p.size() != n) throw std::invalid_argument("curve parameter tuple has wrong arity");
    }

    std::string param_label(const std::vector<double>& p) const {
        std::string s = curve_family_name(family) + "(";
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(p[i]);
        }
        return s + ")";
    }
};

inline BeliefEnsemble build_ensemble(const ParametricFamilySpec& spec, double lo, double hi,
                                     double sigma) {
    return BeliefEnsemble(spec.expand(lo, hi), sigma, lo, hi);
}

}  // namespace sbes
