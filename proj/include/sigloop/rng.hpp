#ifndef SIGLOOP_RNG_HPP
#define SIGLOOP_RNG_HPP

#include <cstdint>

namespace sigloop {

// splitmix64; hand-rolled so seeded streams are identical across standard
// libraries and platforms.
struct SplitMix64 {
    std::uint64_t state = 1;

    explicit SplitMix64(std::uint64_t seed = 1) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0, 1)

    double symmetric() { return 2.0 * unit() - 1.0; }  // [-1, 1)

    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
};

}  // namespace sigloop

#endif
