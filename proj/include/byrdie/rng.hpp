#ifndef BYRDIE_RNG_HPP
#define BYRDIE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace byrdie {

// SplitMix64 stream. Self-contained so that results are identical on every
// platform and standard library; all randomness in the project flows through
// this type, seeded from a single master seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n); rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    // Standard normal via Box-Muller; consumes two draws per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Folds labels into a sub-stream seed. Used to derive independent
// deterministic streams (graph, data, attack, ...) from the master seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t v : labels) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        Rng r(h);
        h = r.next();
    }
    return h;
}

// Sub-stream tags used by the experiment runner.
namespace seed_tag {
constexpr std::uint64_t graph = 0x01;
constexpr std::uint64_t placement = 0x02;
constexpr std::uint64_t data = 0x03;
constexpr std::uint64_t partition = 0x04;
constexpr std::uint64_t attack = 0x05;
constexpr std::uint64_t permutation = 0x06;
constexpr std::uint64_t init = 0x07;
constexpr std::uint64_t certify = 0x08;
} // namespace seed_tag

} // namespace byrdie

#endif
