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
 * The CHSH nonlocal game.
 *
 * A referee sends bits x (to Alice) and y (to Bob); they answer a and b and
 * win iff a XOR b == x AND y. Classical players win at most 3/4 of the time
 * averaged over uniform inputs; players sharing (|00> + |11>)/sqrt(2) and
 * measuring in planar bases A0 = 0, A1 = pi/4, B0 = pi/8, B1 = -pi/8 win with
 * probability cos^2(pi/8) on every input pair.
 *
 * The hardware only measures in the computational basis, so a measurement in
 * a basis at planar angle phi is compiled as Ry(2 * phi) on the qubit followed
 * by a computational-basis measurement. Both parties use the same sign, which
 * gives P(a == b) = cos^2(phi_A - phi_B).
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "dirng/errors.hpp"
#include "dirng/rng.hpp"
#include "dirng/simulator.hpp"

namespace dirng {

/// cos^2(pi/8), the optimal quantum winning probability.
inline const double kQuantumWinProbability =
    std::cos(std::numbers::pi / 8.0) * std::cos(std::numbers::pi / 8.0);
inline constexpr double kClassicalWinBound = 0.75;

struct GameSetting {
    std::uint8_t x = 0;
    std::uint8_t y = 0;

    GameSetting() = default;
    GameSetting(int x_in, int y_in) : x(static_cast<std::uint8_t>(x_in)), y(static_cast<std::uint8_t>(y_in)) {
        if ((x_in != 0 && x_in != 1) || (y_in != 0 && y_in != 1)) {
            throw DomainError("game inputs must be bits");
        }
    }

    /// x AND y: 1 means the players must disagree.
    unsigned product() const { return static_cast<unsigned>(x & y); }

    bool operator==(const GameSetting &) const = default;
};

inline std::array<GameSetting, 4> all_settings() {
    return {GameSetting{0, 0}, GameSetting{0, 1}, GameSetting{1, 0}, GameSetting{1, 1}};
}

/// True iff a XOR b equals x AND y.
inline bool win_condition(const GameSetting &setting, unsigned a, unsigned b) {
    if (a > 1 || b > 1) {
        throw DomainError("game outputs must be bits");
    }
    return (a ^ b) == setting.product();
}

/// Planar measurement angles (radians). Only the differences between Alice's
/// and Bob's angles matter, so `global_offset` leaves every statistic intact.
struct QuantumStrategy {
    std::array<double, 2> alice{0.0, std::numbers::pi / 4.0};
    std::array<double, 2> bob{std::numbers::pi / 8.0, -std::numbers::pi / 8.0};
    double global_offset = 0.0;

    double alice_angle(unsigned x) const { return alice.at(x) + global_offset; }
    double bob_angle(unsigned y) const { return bob.at(y) + global_offset; }

    bool operator==(const QuantumStrategy &) const = default;
};

/// Deterministic response functions a(x), b(y).
struct ClassicalStrategy {
    std::array<std::uint8_t, 2> alice{0, 0};
    std::array<std::uint8_t, 2> bob{0, 0};

    /// The 16 deterministic strategies, indexed by the bits (a0 a1 b0 b1).
    static std::vector<ClassicalStrategy> all() {
        std::vector<ClassicalStrategy> out;
        for (unsigned m = 0; m < 16; ++m) {
            ClassicalStrategy s;
            s.alice = {static_cast<std::uint8_t>((m >> 3) & 1u),
                       static_cast<std::uint8_t>((m >> 2) & 1u)};
            s.bob = {static_cast<std::uint8_t>((m >> 1) & 1u),
                     static_cast<std::uint8_t>(m & 1u)};
            out.push_back(s);
        }
        return out;
    }

    bool operator==(const ClassicalStrategy &) const = default;
};

inline bool play_classical_round(const GameSetting &setting,
                                 const ClassicalStrategy &strategy) {
    return win_condition(setting, strategy.alice[setting.x], strategy.bob[setting.y]);
}

/// Bell pair on (q0, q1), then the basis rotations for this setting.
/// A zero rotation is left out of the circuit.
inline Circuit compile_round(const GameSetting &setting, const QuantumStrategy &strategy) {
    Circuit c{Gate::h(0), Gate::cnot(0, 1)};
    const double theta_a = 2.0 * strategy.alice_angle(setting.x);
    const double theta_b = 2.0 * strategy.bob_angle(setting.y);
    if (theta_a != 0.0) {
        c.push_back(Gate::ry(0, theta_a));
    }
    if (theta_b != 0.0) {
        c.push_back(Gate::ry(1, theta_b));
    }
    return c;
}

/// Outcome distribution of one round (before sampling), with noise applied.
inline OutcomeDistribution round_distribution(const GameSetting &setting,
                                              const QuantumStrategy &strategy,
                                              double lambda = 0.0) {
    const Circuit c = compile_round(setting, strategy);
    return depolarize(probabilities(run_circuit(2, c)), lambda);
}

inline double analytic_win_probability(const GameSetting &setting,
                                       const QuantumStrategy &strategy,
                                       double lambda = 0.0) {
    const auto dist = round_distribution(setting, strategy, lambda);
    double p = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (win_condition(setting, qubit_bit(i, 0, 2), qubit_bit(i, 1, 2))) {
            p += dist[i];
        }
    }
    return p;
}

struct RoundResult {
    GameSetting setting;
    std::int64_t shots = 0;
    std::int64_t same_count = 0;
    std::int64_t diff_count = 0;
    double win_fraction = 0.0;
    CountsRecord counts;

    std::int64_t win_count() const {
        return setting.product() == 0 ? same_count : diff_count;
    }

    /// Tallies a two-qubit counts record (Alice = qubit 0, Bob = qubit 1).
    static RoundResult from_counts(const GameSetting &setting, CountsRecord counts) {
        RoundResult r;
        r.setting = setting;
        r.shots = counts.shots;
        for (const auto &[key, n] : counts.counts) {
            if (key.size() != 2) {
                throw FormatError("round outcome '" + key + "' is not a two-bit string");
            }
            (key[0] == key[1] ? r.same_count : r.diff_count) += n;
        }
        if (r.same_count + r.diff_count != r.shots) {
            throw IntegrityError("round counts do not sum to shots");
        }
        r.counts = std::move(counts);
        r.win_fraction = static_cast<double>(r.win_count()) / static_cast<double>(r.shots);
        return r;
    }

    /// Rebuilds a round from its tallies alone (no outcome-level detail).
    static RoundResult from_tallies(const GameSetting &setting, std::int64_t same,
                                    std::int64_t diff) {
        if (same < 0 || diff < 0 || same + diff < 1) {
            throw FormatError("round tallies must be non-negative with at least one shot");
        }
        CountsRecord rec;
        rec.shots = same + diff;
        if (same > 0) {
            rec.counts["00"] = same;
        }
        if (diff > 0) {
            rec.counts["01"] = diff;
        }
        rec.metadata["tallies_only"] = true;
        return from_counts(setting, std::move(rec));
    }
};

/// Compiles, applies noise, samples `shots` outcomes and tallies one round.
inline RoundResult play_round(const GameSetting &setting, const QuantumStrategy &strategy,
                              std::int64_t shots, double lambda, Philox4x32 &rng,
                              bool record_memory = false) {
    const auto dist = round_distribution(setting, strategy, lambda);
    return RoundResult::from_counts(setting, sample(dist, shots, rng, record_memory));
}

inline RoundResult play_round(const GameSetting &setting, const QuantumStrategy &strategy,
                              std::int64_t shots, double lambda, std::uint64_t rng_seed,
                              bool record_memory = false) {
    Philox4x32 rng(rng_seed);
    return play_round(setting, strategy, shots, lambda, rng, record_memory);
}

/// Source of referee input bits.
class BitSource {
  public:
    virtual ~BitSource() = default;
    virtual std::uint8_t next_bit() = 0;
    /// Stable description of where the bits come from; two sources with the
    /// same identity would feed the same bits to both players.
    virtual std::string identity() const = 0;
};

class SeededBitSource final : public BitSource {
  public:
    explicit SeededBitSource(std::uint64_t seed) : seed_(seed), rng_(seed) {}

    std::uint8_t next_bit() override { return rng_.bit(); }
    std::string identity() const override { return "seed:" + std::to_string(seed_); }

  private:
    std::uint64_t seed_;
    Philox4x32 rng_;
};

/// `rounds` input pairs; x is drawn only from `source_a`, y only from
/// `source_b`. Throws ConfigError when the two sources are not independent.
inline std::vector<GameSetting> referee_inputs(std::int64_t rounds, BitSource &source_a,
                                               BitSource &source_b) {
    if (rounds < 1) {
        throw DomainError("rounds must be >= 1");
    }
    if (&source_a == &source_b || source_a.identity() == source_b.identity()) {
        throw ConfigError("freedom of choice: referee sources for x and y must be "
                          "independent (got '" +
                          source_a.identity() + "' twice)");
    }
    std::vector<GameSetting> out;
    out.reserve(static_cast<std::size_t>(rounds));
    for (std::int64_t i = 0; i < rounds; ++i) {
        const auto x = source_a.next_bit();
        const auto y = source_b.next_bit();
        out.emplace_back(x, y);
    }
    return out;
}

struct ExperimentResult {
    std::vector<RoundResult> rounds;
    double p_min = 0.0;
    double p_avg = 0.0;
    double p_max = 0.0;
    /// Population standard deviation of the per-round win fractions.
    double sigma = 0.0;

    std::int64_t total_shots() const {
        std::int64_t n = 0;
        for (const auto &r : rounds) {
            n += r.shots;
        }
        return n;
    }
    std::int64_t total_wins() const {
        std::int64_t n = 0;
        for (const auto &r : rounds) {
            n += r.win_count();
        }
        return n;
    }
    /// Shots-weighted win probability over all rounds.
    double pooled_p_win() const {
        const auto n = total_shots();
        return n == 0 ? 0.0 : static_cast<double>(total_wins()) / static_cast<double>(n);
    }

    static ExperimentResult summarize(std::vector<RoundResult> rounds) {
        ExperimentResult e;
        e.rounds = std::move(rounds);
        if (e.rounds.empty()) {
            return e;
        }
        e.p_min = e.rounds.front().win_fraction;
        e.p_max = e.p_min;
        double sum = 0.0;
        for (const auto &r : e.rounds) {
            e.p_min = std::min(e.p_min, r.win_fraction);
            e.p_max = std::max(e.p_max, r.win_fraction);
            sum += r.win_fraction;
        }
        const auto n = static_cast<double>(e.rounds.size());
        e.p_avg = std::clamp(sum / n, e.p_min, e.p_max);
        double ss = 0.0;
        for (const auto &r : e.rounds) {
            ss += (r.win_fraction - e.p_avg) * (r.win_fraction - e.p_avg);
        }
        e.sigma = std::sqrt(ss / n);
        return e;
    }
};

struct ExperimentParams {
    std::int64_t rounds = 100;
    std::int64_t shots = 1000;
    QuantumStrategy strategy;
    double lambda = 0.0;
    std::uint64_t master_seed = 0;
    bool record_memory = false;
    /// Worker threads for playing rounds; results do not depend on it.
    int threads = 1;
};

/// Plays the given input pairs, round i with seed derive_seed(master, i).
inline ExperimentResult play_rounds(const std::vector<GameSetting> &settings,
                                    const ExperimentParams &params) {
    if (settings.empty()) {
        throw DomainError("rounds must be >= 1");
    }
    if (params.shots < 1) {
        throw DomainError("shots must be >= 1");
    }
    if (!(params.lambda >= 0.0 && params.lambda <= 1.0)) {
        throw DomainError("depolarizing weight must lie in [0, 1]");
    }
    std::vector<RoundResult> results(settings.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < settings.size(); i += stride) {
            results[i] = play_round(settings[i], params.strategy, params.shots, params.lambda,
                                    derive_seed(params.master_seed, i, SeedDomain::Round),
                                    params.record_memory);
        }
    };
    const auto workers = static_cast<std::size_t>(std::max(1, params.threads));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w, workers);
        }
    }
    return ExperimentResult::summarize(std::move(results));
}

/// Seeds for the two referee streams of a master seed.
inline std::pair<std::uint64_t, std::uint64_t> referee_seeds(std::uint64_t master) {
    return {derive_seed(master, 0, SeedDomain::RefereeA),
            derive_seed(master, 0, SeedDomain::RefereeB)};
}

/// Full experiment with referee inputs from two streams derived from the
/// master seed.
inline ExperimentResult run_experiment(const ExperimentParams &params) {
    const auto [seed_a, seed_b] = referee_seeds(params.master_seed);
    SeededBitSource a(seed_a);
    SeededBitSource b(seed_b);
    return play_rounds(referee_inputs(params.rounds, a, b), params);
}

} // namespace dirng
