#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace pilotidx {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// [0,1) with 53 random bits
inline double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// Counter-based draw: the value depends only on the key, never on call order,
// so parallel replications and policy choice cannot perturb each other.
inline double counter_uniform(std::uint64_t seed, std::uint64_t rep, std::uint64_t user,
                              std::uint64_t slot, std::uint64_t stream) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ rep);
    h = splitmix64(h ^ (user * 0xd6e8feb86659fd93ULL));
    h = splitmix64(h ^ slot);
    h = splitmix64(h ^ (stream * 0xa0761d6478bd642fULL));
    return to_unit(h);
}

// Sequential generator (splitmix64 stream); portable and deterministic across
// standard libraries, unlike std::uniform_real_distribution.
class SplitMix {
public:
    using result_type = std::uint64_t;
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return to_unit((*this)()); }
    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do x = (*this)();
        while (x >= limit);
        return x % n;
    }
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace pilotidx
