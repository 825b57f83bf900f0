#pragma once

// Counter-based splittable RNG (splitmix64 core). A (seed, stream,
// counter) triple maps to a fixed 64-bit word, so any sample can be
// generated independently of ordering or worker count.

#include <cstdint>

namespace qcl {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), counter_(0) {}

    // Independent sub-stream; sample sequences never collide.
    CounterRng split(std::uint64_t sub) const {
        return CounterRng(seed_, mix(stream_ * 0x9e3779b97f4a7c15ULL + sub + 1));
    }

    std::uint64_t next_u64() { return word(counter_++); }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller (consumes two words).
    double normal();

    // Random sample at an absolute counter position (order-independent).
    double at(std::uint64_t counter) const {
        return static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t word(std::uint64_t counter) const {
        std::uint64_t h = mix(seed_ ^ 0x6a09e667f3bcc908ULL);
        h = mix(h ^ stream_);
        return mix(h ^ counter);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

}  // namespace qcl
