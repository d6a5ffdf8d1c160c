// Deterministic RNG with labeled substream derivation. All sampling is
// hand-rolled on top of mt19937_64 so sequences do not depend on the
// standard library's unspecified distribution algorithms.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lucid {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_label(std::string_view label) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive an independent substream seed from a master seed and a label.
inline uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t index = 0) {
    return splitmix64(master ^ splitmix64(hash_label(label) + 0x632be59bd9b4e019ULL * index));
}

class Rng {
public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // Uniform in [0, n) by rejection sampling.
    uint64_t bounded(uint64_t n) {
        if (n == 0) return 0;
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Box-Muller; one value per call, cache holds the second.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_cached_) {
            has_cached_ = false;
            return mean + stddev * cached_;
        }
        double u1, u2;
        do {
            u1 = unit();
        } while (u1 <= 0.0);
        u2 = unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return mean + stddev * r * std::cos(a);
    }

    bool bernoulli(double p) { return unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<size_t>(bounded(v.size()))];
    }

private:
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace lucid
