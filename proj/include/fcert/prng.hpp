#ifndef FCERT_PRNG_HPP
#define FCERT_PRNG_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace fcert {

/// SplitMix64 generator. Fixed bit-for-bit so that runs reproduce across
/// platforms and across reimplementations in other languages.
class Prng {
public:
    explicit Prng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw mapped to (0, 1]: ((x >> 11) + 1) * 2^-53.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n) by rejection sampling; no modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < threshold);
        return r % n;
    }

    /// Standard normal via Box-Muller, consuming two uniform draws.
    double next_normal() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Partial Fisher-Yates: k distinct indices drawn uniformly from [0, n).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::uint64_t state_;
};

/// Derive an independent stream seed from a root seed and a label. Each
/// logical stream owns its own Prng; streams never share state.
inline std::uint64_t derive_seed(std::uint64_t root, const std::string& label) {
    // FNV-1a over the label, then one SplitMix64 scramble of the combination.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    Prng mixer(root ^ h);
    return mixer.next_u64();
}

} // namespace fcert

#endif
