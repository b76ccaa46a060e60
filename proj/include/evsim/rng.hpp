#ifndef EVSIM_RNG_HPP
#define EVSIM_RNG_HPP

#include <cstdint>

namespace evsim {

// MT19937-32 with the standard 2002 initialization and tempering.
// Same seed gives the same stream on every platform. A generator is
// single-owner; never share one mid-stream across scenarios.
class Mt19937 {
public:
    static constexpr int kStateSize = 624;

    explicit Mt19937(std::uint32_t seed = 5489u) { reseed(seed); }

    void reseed(std::uint32_t seed) {
        state_[0] = seed;
        for (index_ = 1; index_ < kStateSize; ++index_) {
            state_[index_] =
                1812433253u * (state_[index_ - 1] ^ (state_[index_ - 1] >> 30)) + index_;
        }
    }

    std::uint32_t next_u32() {
        if (index_ >= kStateSize) twist();
        std::uint32_t y = state_[index_++];
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c5680u;
        y ^= (y << 15) & 0xefc60000u;
        y ^= y >> 18;
        return y;
    }

    // Uniform in [0, 1), 32 bits of resolution.
    double next_f64() { return next_u32() * (1.0 / 4294967296.0); }

private:
    void twist() {
        constexpr std::uint32_t kMatrixA = 0x9908b0dfu;
        constexpr std::uint32_t kUpperMask = 0x80000000u;
        constexpr std::uint32_t kLowerMask = 0x7fffffffu;
        constexpr int kShift = 397;
        for (int i = 0; i < kStateSize; ++i) {
            std::uint32_t y =
                (state_[i] & kUpperMask) | (state_[(i + 1) % kStateSize] & kLowerMask);
            std::uint32_t next = state_[(i + kShift) % kStateSize] ^ (y >> 1);
            if (y & 1u) next ^= kMatrixA;
            state_[i] = next;
        }
        index_ = 0;
    }

    std::uint32_t state_[kStateSize];
    int index_ = kStateSize;
};

// Per-scenario seed for parallel sweeps: decorrelates streams while
// keeping the mapping from scenario index to seed fixed.
inline std::uint32_t scenario_seed(std::uint32_t base_seed, std::uint32_t scenario_index) {
    return base_seed + 0x9e3779b9u * scenario_index;
}

}  // namespace evsim

#endif
