#ifndef FAIRRANK_RNG_HPP
#define FAIRRANK_RNG_HPP

#include <cstdint>
#include <string>

namespace fairrank {

// Deterministic PRNG (splitmix64). The standard <random> distributions are
// implementation-defined, so all sampling goes through this class to keep
// outputs reproducible across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1].
    double next_double_open_low() { return 1.0 - next_double(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Derive an independent stream for a named component. All component
    // seeds flow from one root seed; the label keeps streams decoupled.
    static std::uint64_t derive_seed(std::uint64_t root, const std::string& label) {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ root;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::uint64_t state_;
};

} // namespace fairrank

#endif
