// Copyright 2026 The dirng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Counter-based pseudo random generator used for every stochastic step.
 *
 * The block function is Philox4x32 with 10 rounds (Salmon et al., SC'11).
 * A generator is fully described by (key, stream); its output at position k
 * is a pure function of (key, stream, k), so per-round generators can be
 * created independently and in any order without sharing state.
 */

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace dirng {

inline constexpr std::string_view kRngName = "philox4x32-10";
inline constexpr int kRngVersion = 1;

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi,
                       std::uint32_t &lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

constexpr PhiloxKey split_key(std::uint64_t k) {
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

} // namespace detail

/// One Philox4x32-10 block: 128 output bits for a (counter, key) pair.
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += detail::kPhiloxW0;
            key[1] += detail::kPhiloxW1;
        }
        std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
        detail::mulhilo(detail::kPhiloxM0, ctr[0], hi0, lo0);
        detail::mulhilo(detail::kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Domain tags used when deriving child seeds, so that streams drawn for
/// different purposes from the same master seed never coincide.
enum class SeedDomain : std::uint32_t {
    Round = 1,
    RefereeA = 2,
    RefereeB = 3,
    Detection = 4,
    Qrng = 5,
    Toeplitz = 6,
    Bernoulli = 7,
};

/// Child seed for item `index` of `domain` under `master`.
///
/// Computed as one Philox block keyed by the master seed (xor a fixed tweak,
/// keeping it disjoint from the generator's own output blocks).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    SeedDomain domain = SeedDomain::Round) {
    constexpr std::uint64_t kTweak = 0x6A09E667F3BCC909ull;
    const PhiloxCounter ctr{static_cast<std::uint32_t>(index),
                            static_cast<std::uint32_t>(index >> 32),
                            static_cast<std::uint32_t>(domain), 0x5EEDu};
    const auto out = philox4x32_10(ctr, detail::split_key(master ^ kTweak));
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

/**
 * Philox4x32-10 stream generator, usable as a UniformRandomBitGenerator.
 *
 * Counter layout: words 0-1 hold the block index, words 2-3 the stream id.
 */
class Philox4x32 {
  public:
    using result_type = std::uint32_t;

    explicit constexpr Philox4x32(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(detail::split_key(seed)), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() {
        if (lane_ == 4) {
            refill();
        }
        return buffer_[lane_++];
    }

    constexpr std::uint64_t next_u64() {
        const std::uint64_t lo = (*this)();
        const std::uint64_t hi = (*this)();
        return (hi << 32) | lo;
    }

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    constexpr double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr std::uint8_t bit() { return static_cast<std::uint8_t>((*this)() >> 31); }

    /// Skip `blocks` 128-bit blocks ahead.
    constexpr void discard_blocks(std::uint64_t blocks) {
        block_ += blocks;
        lane_ = 4;
    }

    constexpr std::uint64_t seed() const {
        return (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
    }
    constexpr std::uint64_t stream() const { return stream_; }

  private:
    constexpr void refill() {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = philox4x32_10(ctr, key_);
        ++block_;
        lane_ = 0;
    }

    PhiloxKey key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int lane_ = 4;
};

} // namespace dirng
