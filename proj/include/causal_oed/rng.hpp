#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "causal_oed/errors.hpp"

namespace causal_oed {

/// splitmix64 finalizer. Good avalanche, used for seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stable seed derivation: the same (master seed, index, role) triple maps
/// to the same stream seed on every platform. Pure integer mixing, no
/// std::hash.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index,
                                 std::string_view role) {
    std::uint64_t h = mix64(master_seed ^ 0x6f1d2b4358c9a3e7ULL);
    h = mix64(h ^ index);
    return mix64(h ^ fnv1a64(role));
}

/// Deterministic random stream over std::mt19937_64. The distributions are
/// written out here instead of using <random> adaptors because libstdc++ and
/// libc++ are free to produce different draws from the same engine state, and
/// every artifact output must be reproducible from a seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw Error("uniform_int: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// Index draw from nonnegative weights (need not be normalized).
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0 || !std::isfinite(w)) throw Error("categorical: invalid weight");
            total += w;
        }
        if (!(total > 0.0)) throw Error("categorical: weights sum to zero");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            acc += weights[k];
            if (u < acc) return static_cast<int>(k);
        }
        return static_cast<int>(weights.size()) - 1;  // u landed on accumulated rounding
    }

    /// Standard normal via Box-Muller. The sine partner is discarded so each
    /// call consumes a fixed number of engine draws.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang; boost with u^(1/shape) for shape < 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw Error("gamma: shape must be positive");
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            while (u <= 0.0) u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    /// Dirichlet draw with per-component concentrations.
    std::vector<double> dirichlet(const std::vector<double>& alphas) {
        std::vector<double> out(alphas.size());
        double total = 0.0;
        for (std::size_t k = 0; k < alphas.size(); ++k) {
            out[k] = gamma(alphas[k]);
            total += out[k];
        }
        if (!(total > 0.0)) return dirichlet(alphas);  // all draws underflowed, retry
        for (double& v : out) v /= total;
        return out;
    }

    /// Symmetric Dirichlet(1) draw, i.e. uniform on the simplex.
    std::vector<double> dirichlet_flat(int k) {
        std::vector<double> out(static_cast<std::size_t>(k));
        double total = 0.0;
        for (auto& v : out) {
            double u = uniform();
            v = -std::log1p(-u);  // Exp(1)
            total += v;
        }
        if (!(total > 0.0)) return dirichlet_flat(k);
        for (auto& v : out) v /= total;
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace causal_oed
