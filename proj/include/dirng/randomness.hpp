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
 * Bit-stream generation, extraction and statistical testing.
 *
 * Generators:
 *   - hadamard_qrng: H on every qubit, one stream per qubit.
 *   - parity_qrng: uniform superposition over even-parity strings, so the
 *     XOR of all bits of every shot is 0 (for three qubits, any two bits XOR
 *     to the third).
 *
 * Extractors: von Neumann pairwise debiasing and Toeplitz hashing over GF(2).
 *
 * Tests: frequency (monobit), frequency within a block and runs, using the
 * NIST SP 800-22 rev1a formulas, passing at p >= 0.01.
 */

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "dirng/errors.hpp"
#include "dirng/io.hpp"
#include "dirng/simulator.hpp"

namespace dirng {

enum class SourceTag { Hadamard, Parity, Chsh, External };

inline std::string to_string(SourceTag t) {
    switch (t) {
    case SourceTag::Hadamard:
        return "hadamard";
    case SourceTag::Parity:
        return "parity";
    case SourceTag::Chsh:
        return "chsh";
    case SourceTag::External:
        return "external";
    }
    return "";
}

struct BitStream {
    std::vector<std::uint8_t> bits;
    SourceTag source_tag = SourceTag::External;

    std::size_t size() const { return bits.size(); }
    bool empty() const { return bits.empty(); }
    std::span<const std::uint8_t> view() const { return bits; }

    bool operator==(const BitStream &) const = default;
};

/// One stream per qubit from a record with per-shot memory, in shot order.
inline std::vector<BitStream> streams_from_memory(const CountsRecord &rec, SourceTag tag) {
    if (!rec.memory) {
        throw FormatError("per-qubit streams need a record with memory");
    }
    const std::size_t n = rec.width();
    std::vector<BitStream> out(n);
    for (auto &s : out) {
        s.source_tag = tag;
        s.bits.reserve(rec.memory->size());
    }
    for (const auto &shot : *rec.memory) {
        for (std::size_t q = 0; q < n; ++q) {
            out[q].bits.push_back(shot[q] == '1' ? 1 : 0);
        }
    }
    return out;
}

inline Circuit hadamard_circuit(int n_qubits) {
    Circuit c;
    for (int q = 0; q < n_qubits; ++q) {
        c.push_back(Gate::h(q));
    }
    return c;
}

/// Shot record of the Hadamard generator, memory included.
inline CountsRecord hadamard_record(int n_qubits, std::int64_t shots, std::uint64_t seed) {
    const auto state = run_circuit(n_qubits, hadamard_circuit(n_qubits));
    auto rec = sample(probabilities(state), shots, seed, true);
    rec.metadata["generator"] = "hadamard";
    return rec;
}

inline std::vector<BitStream> hadamard_qrng(int n_qubits, std::int64_t shots,
                                            std::uint64_t seed) {
    return streams_from_memory(hadamard_record(n_qubits, shots, seed), SourceTag::Hadamard);
}

/// H on qubits 0..n-2, then CNOT from each of them into qubit n-1.
inline Circuit parity_state(int n_qubits) {
    if (n_qubits < 3) {
        throw DomainError("parity state needs at least 3 qubits");
    }
    Circuit c;
    for (int q = 0; q + 1 < n_qubits; ++q) {
        c.push_back(Gate::h(q));
    }
    for (int q = 0; q + 1 < n_qubits; ++q) {
        c.push_back(Gate::cnot(q, n_qubits - 1));
    }
    return c;
}

inline CountsRecord parity_record(int n_qubits, std::int64_t shots, std::uint64_t seed) {
    const auto state = run_circuit(n_qubits, parity_state(n_qubits));
    auto rec = sample(probabilities(state), shots, seed, true);
    rec.metadata["generator"] = "parity";
    return rec;
}

inline std::vector<BitStream> parity_qrng(int n_qubits, std::int64_t shots,
                                          std::uint64_t seed) {
    return streams_from_memory(parity_record(n_qubits, shots, seed), SourceTag::Parity);
}

/// Non-overlapping pairs: 01 -> 0, 10 -> 1, 00 and 11 dropped.
inline BitStream von_neumann(const BitStream &input) {
    BitStream out;
    out.source_tag = input.source_tag;
    for (std::size_t i = 0; i + 1 < input.bits.size(); i += 2) {
        const auto a = input.bits[i];
        const auto b = input.bits[i + 1];
        if (a != b) {
            out.bits.push_back(a);
        }
    }
    return out;
}

struct ExtractionBudget {
    double min_entropy_rate = 1.0;
    std::int64_t security_margin = 64;

    /// floor(input_len * rate - margin), never negative.
    std::int64_t max_output(std::size_t input_len) const {
        const double cap =
            std::floor(static_cast<double>(input_len) * min_entropy_rate -
                       static_cast<double>(security_margin));
        return cap < 0.0 ? 0 : static_cast<std::int64_t>(cap);
    }
};

namespace detail {

inline std::vector<std::uint64_t> pack_words(std::span<const std::uint8_t> bits) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64 + 2, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            words[i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }
    return words;
}

} // namespace detail

/**
 * Toeplitz hash of `input` (n bits) to `out_len` (m) bits over GF(2).
 *
 * The m x n matrix is T[i][j] = seed[i - j + n - 1], so `seed_bits` must hold
 * n + m - 1 bits: seed[n-1 .. n+m-2] is the first column read downward and
 * seed[n-1], seed[n-2], ..., seed[0] the first row read left to right. A
 * seed that is 1 only at index n-1 gives the identity when m == n.
 *
 * Throws BudgetError if out_len exceeds budget.max_output(n) and DomainError
 * on a seed of the wrong length.
 */
inline BitStream toeplitz_extract(const BitStream &input, const BitStream &seed_bits,
                                  std::int64_t out_len, const ExtractionBudget &budget = {}) {
    if (input.empty()) {
        throw DomainError("toeplitz: empty input");
    }
    if (out_len < 0) {
        throw DomainError("toeplitz: negative output length");
    }
    BitStream out;
    out.source_tag = input.source_tag;
    if (out_len == 0) {
        return out;
    }
    const std::size_t n = input.size();
    const auto m = static_cast<std::size_t>(out_len);
    if (out_len > budget.max_output(n)) {
        throw BudgetError("toeplitz: output length " + std::to_string(out_len) +
                          " exceeds budget " + std::to_string(budget.max_output(n)));
    }
    if (seed_bits.size() != n + m - 1) {
        throw DomainError("toeplitz: seed must hold input_len + out_len - 1 = " +
                          std::to_string(n + m - 1) + " bits, got " +
                          std::to_string(seed_bits.size()));
    }
    // With r the reversed seed, row i is the window r[m-1-i .. m-1-i+n-1].
    std::vector<std::uint8_t> reversed(seed_bits.bits.rbegin(), seed_bits.bits.rend());
    const auto r = detail::pack_words(reversed);
    const auto x = detail::pack_words(input.bits);
    const std::size_t full_words = n / 64;
    const std::size_t tail_bits = n % 64;
    const std::uint64_t tail_mask = tail_bits ? (std::uint64_t{1} << tail_bits) - 1 : 0;

    out.bits.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t offset = m - 1 - i;
        const std::size_t base = offset / 64;
        const unsigned shift = offset % 64;
        auto window = [&](std::size_t w) {
            const std::uint64_t lo = r[base + w] >> shift;
            const std::uint64_t hi = shift ? r[base + w + 1] << (64 - shift) : 0;
            return lo | hi;
        };
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < full_words; ++w) {
            acc ^= window(w) & x[w];
        }
        if (tail_bits) {
            acc ^= window(full_words) & x[full_words] & tail_mask;
        }
        out.bits[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
    }
    return out;
}

struct TestReport {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 0.0;
    bool pass = false;

    nlohmann::json to_json() const {
        return {{"test_name", test_name},
                {"statistic", statistic},
                {"p_value", p_value},
                {"pass", pass}};
    }

    bool operator==(const TestReport &) const = default;
};

inline constexpr double kSignificanceLevel = 0.01;

struct TestOptions {
    /// Off only for short published test vectors.
    bool enforce_min_length = true;
};

namespace detail {

inline TestReport make_report(std::string name, double statistic, double p) {
    p = std::clamp(p, 0.0, 1.0);
    return {std::move(name), statistic, p, p >= kSignificanceLevel};
}

inline void require_length(std::size_t n, std::size_t min_len, const char *test,
                           const TestOptions &opts) {
    if (n == 0 || (opts.enforce_min_length && n < min_len)) {
        throw LengthError(std::string(test) + ": needs at least " + std::to_string(min_len) +
                          " bits, got " + std::to_string(n));
    }
}

} // namespace detail

/// Frequency test. Statistic s_obs = |sum(2b - 1)| / sqrt(n),
/// p = erfc(s_obs / sqrt(2)).
inline TestReport monobit_test(std::span<const std::uint8_t> bits, TestOptions opts = {}) {
    detail::require_length(bits.size(), 100, "monobit", opts);
    const auto n = static_cast<double>(bits.size());
    double sum = 0.0;
    for (auto b : bits) {
        sum += b ? 1.0 : -1.0;
    }
    const double s_obs = std::abs(sum) / std::sqrt(n);
    return detail::make_report("monobit", s_obs, std::erfc(s_obs / std::numbers::sqrt2));
}

/// Frequency within blocks of `block_len` bits; chi-square of the block
/// proportions, p = igamc(N/2, chi2/2).
inline TestReport block_frequency_test(std::span<const std::uint8_t> bits,
                                       std::size_t block_len = 128, TestOptions opts = {}) {
    if (block_len == 0) {
        throw DomainError("block_frequency: block length must be >= 1");
    }
    detail::require_length(bits.size(), 10 * block_len, "block_frequency", opts);
    const std::size_t blocks = bits.size() / block_len;
    if (blocks == 0) {
        throw LengthError("block_frequency: input shorter than one block");
    }
    double chi2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < block_len; ++j) {
            ones += bits[b * block_len + j];
        }
        const double pi = static_cast<double>(ones) / static_cast<double>(block_len) - 0.5;
        chi2 += pi * pi;
    }
    chi2 *= 4.0 * static_cast<double>(block_len);
    const double p = boost::math::gamma_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
    return detail::make_report("block_frequency", chi2, p);
}

/// Runs test. Gated on the frequency pre-test |pi - 1/2| < 2/sqrt(n); a
/// failing pre-test reports p = 0. Statistic is the run count V_n.
inline TestReport runs_test(std::span<const std::uint8_t> bits, TestOptions opts = {}) {
    detail::require_length(bits.size(), 100, "runs", opts);
    const auto n = static_cast<double>(bits.size());
    std::size_t ones = 0;
    std::size_t runs = 1;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        ones += bits[i];
        if (i > 0 && bits[i] != bits[i - 1]) {
            ++runs;
        }
    }
    const double pi = static_cast<double>(ones) / n;
    const auto v = static_cast<double>(runs);
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
        return detail::make_report("runs", v, 0.0);
    }
    const double q = pi * (1.0 - pi);
    const double p = std::erfc(std::abs(v - 2.0 * n * q) / (2.0 * std::sqrt(2.0 * n) * q));
    return detail::make_report("runs", v, p);
}

/// Runs the named tests ("monobit", "block_frequency", "runs") in order.
inline std::vector<TestReport> run_battery(std::span<const std::uint8_t> bits,
                                           const std::vector<std::string> &tests,
                                           std::size_t block_len = 128) {
    std::vector<TestReport> out;
    for (const auto &name : tests) {
        if (name == "monobit") {
            out.push_back(monobit_test(bits));
        } else if (name == "block_frequency") {
            out.push_back(block_frequency_test(bits, block_len));
        } else if (name == "runs") {
            out.push_back(runs_test(bits));
        } else {
            throw DomainError("unknown test '" + name + "'");
        }
    }
    return out;
}

inline nlohmann::json reports_to_json(const std::vector<TestReport> &reports) {
    auto arr = nlohmann::json::array();
    for (const auto &r : reports) {
        arr.push_back(r.to_json());
    }
    return arr;
}

/// Packs 8 bits per byte, first bit in the most significant position; the
/// final byte is zero-padded in its low bits.
inline std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) {
            bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        }
    }
    return bytes;
}

/// Inverse of pack_bits. Without `bit_count` every byte yields 8 bits,
/// padding included.
inline std::vector<std::uint8_t> unpack_bits(std::span<const std::uint8_t> bytes,
                                             std::optional<std::size_t> bit_count = {}) {
    const std::size_t n = bit_count.value_or(bytes.size() * 8);
    if (n > bytes.size() * 8) {
        throw FormatError("bit count exceeds packed data");
    }
    std::vector<std::uint8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) {
        bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    }
    return bits;
}

inline std::string to_text(std::span<const std::uint8_t> bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

/// ASCII '0'/'1'; whitespace is skipped, anything else is a FormatError.
inline std::vector<std::uint8_t> from_text(std::string_view text) {
    std::vector<std::uint8_t> bits;
    bits.reserve(text.size());
    for (char c : text) {
        if (c == '0' || c == '1') {
            bits.push_back(static_cast<std::uint8_t>(c - '0'));
        } else if (c != ' ' && c != '\n' && c != '\r' && c != '\t') {
            throw FormatError(std::string("unexpected character '") + c + "' in bit text");
        }
    }
    return bits;
}

/// Reads a `.txt` file as ASCII bits and anything else as packed binary.
inline BitStream read_bit_file(const std::filesystem::path &path,
                               std::optional<std::size_t> bit_count = {}) {
    const auto raw = io::read_file(path);
    BitStream s;
    if (path.extension() == ".txt") {
        s.bits = from_text(raw);
        if (bit_count) {
            if (*bit_count > s.bits.size()) {
                throw FormatError("bit count exceeds text data");
            }
            s.bits.resize(*bit_count);
        }
    } else {
        const auto *p = reinterpret_cast<const std::uint8_t *>(raw.data());
        s.bits = unpack_bits(std::span<const std::uint8_t>(p, raw.size()), bit_count);
    }
    return s;
}

inline void write_packed(const std::filesystem::path &path, std::span<const std::uint8_t> bits) {
    const auto bytes = pack_bits(bits);
    io::write_file_atomic(path, std::string_view(reinterpret_cast<const char *>(bytes.data()),
                                                 bytes.size()));
}

/// Bernoulli(p_one) stream from a seeded generator.
inline BitStream bernoulli_stream(double p_one, std::size_t n, std::uint64_t seed) {
    if (!(p_one >= 0.0 && p_one <= 1.0)) {
        throw DomainError("bernoulli probability must lie in [0, 1]");
    }
    Philox4x32 rng(seed);
    BitStream s;
    s.bits.resize(n);
    for (auto &b : s.bits) {
        b = rng.uniform() < p_one ? 1 : 0;
    }
    return s;
}

/// `n` uniform bits from a seeded generator (e.g. Toeplitz seeds).
inline BitStream seeded_bits(std::size_t n, std::uint64_t seed) {
    Philox4x32 rng(seed);
    BitStream s;
    s.bits.resize(n);
    for (auto &b : s.bits) {
        b = rng.bit();
    }
    return s;
}

} // namespace dirng
