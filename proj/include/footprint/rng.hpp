#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace footprint {

// splitmix64; used to derive independent stream seeds (per tree, per fold,
// per account) from one run seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled distributions. The engine's output sequence is
// pinned by the standard; std::*_distribution is not, so every draw here goes
// through our own mapping to keep models reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    // Box-Muller, cosine branch only (stateless between calls).
    double normal() {
        double u1;
        do {
            u1 = next_unit();
        } while (u1 <= 0.0);
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Parameterized by the distribution mean (not the log-space mean).
    double log_normal_mean(double mean, double sigma_log) {
        double mu_log = std::log(mean) - 0.5 * sigma_log * sigma_log;
        return std::exp(mu_log + sigma_log * normal());
    }

    // Knuth for small lambda, rounded normal approximation for large.
    std::int64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 30.0) {
            const double l = std::exp(-lambda);
            std::int64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= next_unit();
            } while (p > l);
            return k - 1;
        }
        double v = std::round(normal(lambda, std::sqrt(lambda)));
        return v < 0.0 ? 0 : static_cast<std::int64_t>(v);
    }

    bool bernoulli(double p) { return next_unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values in [0, n), ascending.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < k; ++i) {
            int j = i + static_cast<int>(bounded(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    // Index draw proportional to non-negative weights.
    std::size_t pick_weighted(const std::vector<double>& weights, double total) {
        double x = next_unit() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (x < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace footprint
