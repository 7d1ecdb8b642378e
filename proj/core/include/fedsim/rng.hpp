#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace fedsim {

// splitmix64 finalizer; used both as a seed mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives an independent child stream from a master seed and up to two
// stream indices (e.g. client id, round). Order-independent reproducibility:
// the child seed depends only on (master, a, b), never on call order.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(master ^ 0xA5A5A5A5DEADBEEFULL);
    h = splitmix64(h ^ splitmix64(a + 0x9E3779B97F4A7C15ULL));
    h = splitmix64(h ^ splitmix64(b + 0xC2B2AE3D27D4EB4FULL));
    return h;
}

// Deterministic RNG with explicit, platform-independent distributions.
// std:: distributions are implementation-defined, so the few we need are
// implemented here directly on top of the mt19937_64 bit stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [lo, hi], inclusive, rejection-sampled (no modulo bias).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(next_u64());  // full range
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % range);
    }

    // Marsaglia-Tsang; shape < 1 handled via the boosting identity.
    double gamma(double shape) {
        if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be > 0");
        if (shape < 1.0) {
            const double u = uniform_positive();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_positive();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::vector<double> dirichlet(double alpha, int k) {
        if (alpha <= 0.0) throw std::invalid_argument("dirichlet: alpha must be > 0");
        if (k < 1) throw std::invalid_argument("dirichlet: k must be >= 1");
        std::vector<double> g(static_cast<std::size_t>(k));
        double sum = 0.0;
        for (auto& gi : g) {
            gi = gamma(alpha);
            sum += gi;
        }
        for (auto& gi : g) gi /= sum;
        return g;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    double uniform_positive() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    // Box-Muller, one value per call (the pair's second half is discarded to
    // keep the draw count per sample fixed).
    double normal() {
        const double u1 = uniform_positive();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::mt19937_64 engine_;
};

}  // namespace fedsim
