#pragma once
// Shared numeric helpers: standard-normal CDF, base-2 entropy terms,
// probability clamping, log-sum-exp, golden-section refinement, and a
// self-contained RNG (splitmix64 + xoshiro256++) so seeded runs reproduce
// bit-for-bit independently of the standard library's distributions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sbes {

// Probabilities entering logarithms are kept inside [eps, 1-eps].
inline constexpr double kProbEps = 1e-12;

inline double std_normal_cdf(double t) {
    return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

// p*log2(p) with the 0*log(0) = 0 convention.
inline double plog2p(double p) {
    return p > 0.0 ? p * std::log2(p) : 0.0;
}

inline double binary_entropy_bits(double p) {
    return -plog2p(p) - plog2p(1.0 - p);
}

inline double clamp_prob(double p) {
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

// log(sum(exp(x_i))) with max subtraction; tolerates inputs that would all
// underflow in probability space.
inline double logsumexp(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("logsumexp: empty input");
    const double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

// Golden-section refinement of a maximizer of a unimodal function on [a,b].
template <class F>
double golden_section_argmax(F&& f, double a, double b, int iters = 40) {
    if (!(a <= b)) throw std::invalid_argument("golden_section_argmax: a > b");
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;  // 0.618...
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// Dense scan followed by golden-section refinement around the best cell.
template <class F>
double grid_argmax(F&& f, double a, double b, int grid_points = 4096, int refine_iters = 40) {
    if (!(a < b)) throw std::invalid_argument("grid_argmax: empty interval");
    const double step = (b - a) / grid_points;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid_points; ++i) {
        const double x = (i == grid_points) ? b : a + i * step;
        const double v = f(x);
        if (!std::isfinite(v))
            throw std::invalid_argument("grid_argmax: non-finite value in scan");
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = a + std::max(0, best - 1) * step;
    const double hi = std::min(b, a + (best + 1) * step);
    return golden_section_argmax(f, lo, hi, refine_iters);
}

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-run seed from (master, a, b) without correlation between
// neighbouring runs.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
    uint64_t s = master;
    uint64_t h = splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b * 0xbf58476d1ce4e5b9ULL + 0x1ce4e5b9ULL;
    h ^= splitmix64(s);
    return h ? h : 0x6a09e667f3bcc909ULL;
}

// xoshiro256++ with splitmix64 seeding.
class Rng {
public:
    explicit Rng(uint64_t seed = 0x853c49e6748fea9bULL) {
        uint64_t s = seed;
        for (auto& w : s_) w = splitmix64(s);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // Box-Muller; draws two uniforms per call, no cached state.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> s_{};
};

}  // namespace sbes
