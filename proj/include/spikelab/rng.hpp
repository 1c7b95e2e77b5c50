/*
   Copyright 2026 the spikelab authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Counter-based random streams. Each Monte Carlo trial owns the stream
// keyed by (master seed, trial index), so serial and parallel executions
// produce identical draws.
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.

#pragma once

#include <cmath>
#include <cstdint>

#include "spikelab/numeric.hpp"

namespace spikelab {

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philoxRound(std::uint32_t counter[4], const std::uint32_t key[2]) {
    const std::uint64_t p0 =
        static_cast<std::uint64_t>(kPhiloxM4x32A) * counter[0];
    const std::uint64_t p1 =
        static_cast<std::uint64_t>(kPhiloxM4x32B) * counter[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    counter[0] = hi1 ^ counter[1] ^ key[0];
    counter[1] = lo1;
    counter[2] = hi0 ^ counter[3] ^ key[1];
    counter[3] = lo0;
}

}  // namespace detail

// Philox4x32-10 stream. The 128-bit counter is split as
// (block_lo, block_hi, stream_lo, stream_hi); the key carries the master
// seed. Distinct (seed, stream) pairs give independent streams.
class PhiloxStream {
public:
    using result_type = std::uint64_t;

    PhiloxStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        streamWord_[0] = static_cast<std::uint32_t>(stream);
        streamWord_[1] = static_cast<std::uint32_t>(stream >> 32);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() {
        if (bufPos_ >= 2) refill();
        return buffer_[bufPos_++];
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; safe under log().
    double uniformOpenClosed() {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; second value cached so the consumed
    // stream length is independent of call parity ordering at block level.
    double gaussian() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        const double u1 = uniformOpenClosed();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        haveSpare_ = true;
        return r * std::cos(a);
    }

    // +1 or -1, one bit per draw.
    double rademacher() { return ((*this)() & 1u) ? 1.0 : -1.0; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill() {
        std::uint32_t ctr[4] = {static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                streamWord_[0], streamWord_[1]};
        std::uint32_t key[2] = {key_[0], key_[1]};
        for (int round = 0; round < 10; ++round) {
            detail::philoxRound(ctr, key);
            key[0] += detail::kPhiloxW32A;
            key[1] += detail::kPhiloxW32B;
        }
        buffer_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
        buffer_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
        bufPos_ = 0;
        ++block_;
    }

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint32_t key_[2] = {0, 0};
    std::uint32_t streamWord_[2] = {0, 0};
    std::uint64_t block_ = 0;
    std::uint64_t buffer_[2] = {0, 0};
    int bufPos_ = 2;
    bool haveSpare_ = false;
    double spare_ = 0.0;
};

// Stable 64-bit mix of (seed, stream); used to label per-trial streams in
// reports. splitmix64 finalizer.
inline std::uint64_t derivedSeed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

}  // namespace spikelab
