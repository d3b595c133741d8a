#ifndef SPARSELIFT_RNG_HPP
#define SPARSELIFT_RNG_HPP

#include <cstdint>
#include <cmath>

// Counter-derived random streams. Every consumer derives its own stream key
// from (seed, tags...), so draws never depend on evaluation order or thread
// schedule, and regeneration from the same tuple is bit-identical.
namespace sparselift::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    std::uint64_t z = splitmix64(s);
    return z ^ b;
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    return mix(seed, tag);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2) {
    return mix(mix(seed, tag1), tag2);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2,
                            std::uint64_t tag3) {
    return mix(mix(mix(seed, tag1), tag2), tag3);
}

// Key a double by its bit pattern (axis values such as lambda or w).
inline std::uint64_t key_of(double v) {
    union { double d; std::uint64_t u; } pun;
    pun.d = v;
    return pun.u;
}

class Stream {
public:
    explicit Stream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in (0,1]
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // standard normal via Box-Muller; pairs cached
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // integer in [0, bound) without modulo bias
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace sparselift::rng

#endif
