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
 * Minimal pure-statevector simulator.
 *
 * Qubit ordering: qubit 0 is the most significant bit of an amplitude index
 * and therefore the leftmost character of an outcome bitstring. Amplitude
 * index i written in n binary digits is exactly the outcome string of i.
 *
 * Noise is applied at the outcome-distribution level (`depolarize`), not to
 * the state.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dirng/counts_record.hpp"
#include "dirng/errors.hpp"
#include "dirng/rng.hpp"

namespace dirng {

using Amplitude = std::complex<double>;

inline constexpr int kDefaultQubitCap = 12;
inline constexpr double kNormTolerance = 1e-12;

/// Outcome string of basis index `index` over `n_qubits` (qubit 0 leftmost).
inline std::string bitstring(std::size_t index, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int q = 0; q < n_qubits; ++q) {
        if ((index >> (n_qubits - 1 - q)) & 1u) {
            s[static_cast<std::size_t>(q)] = '1';
        }
    }
    return s;
}

/// Bit of qubit `q` in basis index `index`.
constexpr unsigned qubit_bit(std::size_t index, int q, int n_qubits) {
    return static_cast<unsigned>((index >> (n_qubits - 1 - q)) & 1u);
}

class StateVector {
  public:
    /// Wraps explicit amplitudes; length must be 2^n_qubits and the vector
    /// normalized.
    static StateVector from_amplitudes(int n_qubits, std::vector<Amplitude> amps,
                                       int cap = kDefaultQubitCap) {
        check_capacity(n_qubits, cap);
        if (amps.size() != (std::size_t{1} << n_qubits)) {
            throw DomainError("amplitude count does not equal 2^n_qubits");
        }
        double norm = 0.0;
        for (const auto &a : amps) {
            norm += std::norm(a);
        }
        if (std::abs(norm - 1.0) > kNormTolerance) {
            throw DomainError("state is not normalized");
        }
        return StateVector(n_qubits, std::move(amps));
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const Amplitude> amplitudes() const { return amps_; }
    Amplitude operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto &a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    static void check_capacity(int n_qubits, int cap) {
        if (n_qubits < 1 || n_qubits > cap) {
            throw CapacityError("n_qubits must be in [1, " + std::to_string(cap) +
                                "], got " + std::to_string(n_qubits));
        }
    }

  private:
    friend StateVector new_state(int, int);
    friend class GateApplier;

    StateVector(int n, std::vector<Amplitude> amps) : n_qubits_(n), amps_(std::move(amps)) {}

    int n_qubits_;
    std::vector<Amplitude> amps_;
};

/// |0...0> on `n_qubits` qubits.
inline StateVector new_state(int n_qubits, int cap = kDefaultQubitCap) {
    StateVector::check_capacity(n_qubits, cap);
    std::vector<Amplitude> amps(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
    amps[0] = 1.0;
    return StateVector(n_qubits, std::move(amps));
}

enum class GateKind { H, X, CNOT, Ry };

struct Gate {
    GateKind kind = GateKind::H;
    double theta = 0.0;
    // For CNOT, qubits[0] is the control and qubits[1] the target.
    std::array<int, 2> qubits{0, 0};

    static Gate h(int q) { return {GateKind::H, 0.0, {q, q}}; }
    static Gate x(int q) { return {GateKind::X, 0.0, {q, q}}; }
    static Gate cnot(int control, int target) {
        return {GateKind::CNOT, 0.0, {control, target}};
    }
    static Gate ry(int q, double theta) { return {GateKind::Ry, theta, {q, q}}; }

    int arity() const { return kind == GateKind::CNOT ? 2 : 1; }

    bool operator==(const Gate &) const = default;
};

using Circuit = std::vector<Gate>;

/// Row-major unitary of `gate`. 2x2 for single-qubit gates; 4x4 for CNOT in
/// the |control target> basis.
inline std::vector<Amplitude> gate_matrix(const Gate &gate) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (gate.kind) {
    case GateKind::H:
        return {r, r, r, -r};
    case GateKind::X:
        return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Ry: {
        const double c = std::cos(gate.theta / 2.0);
        const double s = std::sin(gate.theta / 2.0);
        return {c, -s, s, c};
    }
    case GateKind::CNOT:
        return {1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0};
    }
    return {};
}

class GateApplier {
  public:
    static StateVector apply(const StateVector &state, const Gate &gate) {
        const int n = state.n_qubits();
        for (int i = 0; i < gate.arity(); ++i) {
            if (gate.qubits[i] < 0 || gate.qubits[i] >= n) {
                throw IndexError("gate target " + std::to_string(gate.qubits[i]) +
                                 " out of range for " + std::to_string(n) + " qubits");
            }
        }
        if (gate.arity() == 2 && gate.qubits[0] == gate.qubits[1]) {
            throw IndexError("gate targets must be distinct");
        }

        std::vector<Amplitude> amps = state.amps_;
        if (gate.kind == GateKind::CNOT) {
            const std::size_t cmask = std::size_t{1} << (n - 1 - gate.qubits[0]);
            const std::size_t tmask = std::size_t{1} << (n - 1 - gate.qubits[1]);
            for (std::size_t i = 0; i < amps.size(); ++i) {
                if ((i & cmask) && !(i & tmask)) {
                    std::swap(amps[i], amps[i | tmask]);
                }
            }
        } else {
            const auto m = gate_matrix(gate);
            const std::size_t mask = std::size_t{1} << (n - 1 - gate.qubits[0]);
            for (std::size_t i = 0; i < amps.size(); ++i) {
                if (i & mask) {
                    continue;
                }
                const Amplitude a0 = amps[i];
                const Amplitude a1 = amps[i | mask];
                amps[i] = m[0] * a0 + m[1] * a1;
                amps[i | mask] = m[2] * a0 + m[3] * a1;
            }
        }
        return StateVector(n, std::move(amps));
    }
};

/// U|state> for the gate's unitary on its target qubits.
inline StateVector apply_gate(const StateVector &state, const Gate &gate) {
    return GateApplier::apply(state, gate);
}

/// Applies `gates` in order to |0...0>.
inline StateVector run_circuit(int n_qubits, std::span<const Gate> gates,
                               int cap = kDefaultQubitCap) {
    StateVector s = new_state(n_qubits, cap);
    for (const auto &g : gates) {
        s = apply_gate(s, g);
    }
    return s;
}

class OutcomeDistribution {
  public:
    OutcomeDistribution(int n_qubits, std::vector<double> probs)
        : n_qubits_(n_qubits), probs_(std::move(probs)) {
        if (n_qubits < 1 || probs_.size() != (std::size_t{1} << n_qubits)) {
            throw DomainError("distribution size does not equal 2^n_qubits");
        }
        double sum = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0)) {
                throw DomainError("negative or NaN probability");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kNormTolerance) {
            throw DomainError("probabilities do not sum to 1");
        }
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return probs_.size(); }
    std::span<const double> probs() const { return probs_; }
    double operator[](std::size_t i) const { return probs_[i]; }

    bool operator==(const OutcomeDistribution &) const = default;

  private:
    int n_qubits_;
    std::vector<double> probs_;
};

/// Born-rule probabilities |amplitude|^2.
inline OutcomeDistribution probabilities(const StateVector &state) {
    std::vector<double> probs;
    probs.reserve(state.dimension());
    for (const auto &a : state.amplitudes()) {
        probs.push_back(std::norm(a));
    }
    return OutcomeDistribution(state.n_qubits(), std::move(probs));
}

/// (1 - lambda) * dist + lambda * uniform.
inline OutcomeDistribution depolarize(const OutcomeDistribution &dist, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw DomainError("depolarizing weight must lie in [0, 1]");
    }
    const double u = 1.0 / static_cast<double>(dist.size());
    std::vector<double> out(dist.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (1.0 - lambda) * dist[i] + lambda * u;
    }
    return OutcomeDistribution(dist.n_qubits(), std::move(out));
}

/// Draws `shots` outcomes from `dist` using `rng` (one uniform per shot,
/// inverse-CDF lookup).
inline CountsRecord sample(const OutcomeDistribution &dist, std::int64_t shots,
                           Philox4x32 &rng, bool record_memory = false) {
    if (shots < 1) {
        throw DomainError("shots must be >= 1");
    }
    const auto p = dist.probs();
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    // Pin the cumulative mass to exactly 1 from the last reachable outcome on,
    // so rounding can neither drop mass nor select a zero-probability tail.
    std::size_t last = p.size() - 1;
    while (last > 0 && p[last] == 0.0) {
        --last;
    }
    std::fill(cdf.begin() + static_cast<std::ptrdiff_t>(last), cdf.end(), 1.0);

    std::vector<std::int64_t> tally(p.size(), 0);
    CountsRecord rec;
    rec.shots = shots;
    if (record_memory) {
        rec.memory.emplace();
        rec.memory->reserve(static_cast<std::size_t>(shots));
    }
    std::vector<std::string> labels(p.size());
    for (std::int64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform();
        const auto idx = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        ++tally[idx];
        if (record_memory) {
            if (labels[idx].empty()) {
                labels[idx] = bitstring(idx, dist.n_qubits());
            }
            rec.memory->push_back(labels[idx]);
        }
    }
    for (std::size_t i = 0; i < tally.size(); ++i) {
        if (tally[i] > 0) {
            rec.counts[bitstring(i, dist.n_qubits())] = tally[i];
        }
    }
    rec.metadata["rng"] = std::string(kRngName);
    rec.metadata["rng_version"] = kRngVersion;
    rec.metadata["seed"] = rng.seed();
    return rec;
}

/// Seeded sampling; identical (dist, shots, seed) give identical records.
inline CountsRecord sample(const OutcomeDistribution &dist, std::int64_t shots,
                           std::uint64_t rng_seed, bool record_memory = false) {
    Philox4x32 rng(rng_seed);
    return sample(dist, shots, rng, record_memory);
}

} // namespace dirng
