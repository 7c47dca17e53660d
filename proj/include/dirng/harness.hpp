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
 * Experiment orchestration: loophole controls, device noise profiles,
 * record/replay of counts, certified runs and report files.
 *
 * Loophole controls:
 *   - freedom of choice: x and y come from two distinct sources (seeded
 *     streams or replayed counts records);
 *   - memory: with fresh_state_per_round every round draws from its own
 *     generator derived from (master_seed, round_index), so any round can be
 *     replayed in isolation. This mirrors discarding device memory between
 *     jobs; the device itself is still shared, so the loophole is only
 *     partially addressed;
 *   - fair sampling: each party detects each shot independently with
 *     probability detection_efficiency; post-selected and all-event win
 *     fractions can both be reported;
 *   - locality: not modeled, always reported open.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirng/certify.hpp"
#include "dirng/counts_record.hpp"
#include "dirng/errors.hpp"
#include "dirng/game.hpp"
#include "dirng/io.hpp"
#include "dirng/randomness.hpp"
#include "dirng/rng.hpp"

namespace dirng {

struct LoopholeConfig {
    bool independent_inputs = true;
    bool fresh_state_per_round = true;
    double detection_efficiency = 1.0;
    bool report_all_events = false;

    void validate() const {
        if (!(detection_efficiency > 0.0 && detection_efficiency <= 1.0)) {
            throw ConfigError("detection_efficiency must lie in (0, 1]");
        }
    }

    nlohmann::json to_json() const {
        return {{"independent_inputs", independent_inputs},
                {"fresh_state_per_round", fresh_state_per_round},
                {"detection_efficiency", detection_efficiency},
                {"report_all_events", report_all_events}};
    }

    static LoopholeConfig from_json(const nlohmann::json &j) {
        LoopholeConfig c;
        c.independent_inputs = j.value("independent_inputs", c.independent_inputs);
        c.fresh_state_per_round = j.value("fresh_state_per_round", c.fresh_state_per_round);
        c.detection_efficiency = j.value("detection_efficiency", c.detection_efficiency);
        c.report_all_events = j.value("report_all_events", c.report_all_events);
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// Noise fitting

/// Win probability of the default strategy under depolarizing weight lambda:
/// (1 - lambda) * cos^2(pi/8) + lambda / 2.
inline double model_win_probability(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw DomainError("depolarizing weight must lie in [0, 1]");
    }
    return (1.0 - lambda) * kQuantumWinProbability + lambda * 0.5;
}

/// Inverts model_win_probability in closed form.
inline double fit_lambda(double avg_win_target) {
    constexpr double kSlack = 1e-12;
    if (!(avg_win_target >= 0.5 - kSlack && avg_win_target <= kQuantumWinProbability + kSlack)) {
        throw UnfittableError("target win probability must lie in [0.5, cos^2(pi/8)]");
    }
    const double lambda =
        (kQuantumWinProbability - avg_win_target) / (kQuantumWinProbability - 0.5);
    return std::clamp(lambda, 0.0, 1.0);
}

struct DeviceProfile {
    std::string name;
    double avg_win_target = 0.0;
    double fitted_lambda = 0.0;
    nlohmann::json metadata = nlohmann::json::object();

    nlohmann::json to_json() const {
        return {{"format_version", kFormatVersion},
                {"name", name},
                {"avg_win_target", avg_win_target},
                {"fitted_lambda", fitted_lambda},
                {"metadata", metadata}};
    }

    /// `fitted_lambda` is recomputed from the target when absent.
    static DeviceProfile from_json(const nlohmann::json &j) {
        DeviceProfile p;
        try {
            p.name = j.at("name").get<std::string>();
            p.avg_win_target = j.at("avg_win_target").get<double>();
            p.fitted_lambda = j.contains("fitted_lambda") ? j.at("fitted_lambda").get<double>()
                                                          : fit_lambda(p.avg_win_target);
            if (j.contains("metadata")) {
                p.metadata = j.at("metadata");
            }
        } catch (const nlohmann::json::exception &e) {
            throw FormatError(std::string("device profile: ") + e.what());
        }
        return p;
    }
};

namespace detail {

struct DeviceRow {
    const char *name;
    double avg, min, max, sigma;
    int qubits, quantum_volume;
    double t1_us, t2_us;
    const char *processor;
};

// Hardware statistics at 1000 shots/round, 100 rounds.
inline constexpr DeviceRow kDeviceRows[] = {
    {"ibmq_belem", 0.79622, 0.743, 0.839, 0.0191, 5, 16, 101.42, 98.85, "Falcon r4T"},
    {"ibmq_quito", 0.80335, 0.775, 0.834, 0.0151, 5, 16, 96.83, 104.39, "Falcon r4T"},
    {"ibmq_manila", 0.82014, 0.776, 0.853, 0.0130, 5, 32, 141.15, 56.53, "Falcon r5.11L"},
    {"ibmq_lima", 0.82448, 0.769, 0.883, 0.0344, 5, 8, 98.68, 115.32, "Falcon r4T"},
    {"ibmq_jakarta", 0.82245, 0.793, 0.850, 0.0121, 7, 16, 136.95, 38.99, "Falcon r5.11H"},
};

} // namespace detail

/// The five reference devices. Only the average is a fit target; min, max and
/// sigma are carried as metadata since one noise parameter cannot match them.
inline std::vector<DeviceProfile> builtin_device_profiles() {
    std::vector<DeviceProfile> out;
    for (const auto &row : detail::kDeviceRows) {
        DeviceProfile p;
        p.name = row.name;
        p.avg_win_target = row.avg;
        p.fitted_lambda = fit_lambda(row.avg);
        p.metadata = {{"shots", 1000},
                      {"rounds", 100},
                      {"min_win", row.min},
                      {"max_win", row.max},
                      {"sigma", row.sigma},
                      {"qubits", row.qubits},
                      {"max_circuits", 100},
                      {"quantum_volume", row.quantum_volume},
                      {"t1_us", row.t1_us},
                      {"t2_us", row.t2_us},
                      {"processor", row.processor}};
        out.push_back(std::move(p));
    }
    return out;
}

inline nlohmann::json profiles_to_json(const std::vector<DeviceProfile> &profiles) {
    auto arr = nlohmann::json::array();
    for (const auto &p : profiles) {
        arr.push_back(p.to_json());
    }
    return arr;
}

inline std::vector<DeviceProfile> load_device_profiles(const std::filesystem::path &path) {
    const auto j = io::read_json(path);
    if (!j.is_array()) {
        throw FormatError("device profiles: expected a JSON array");
    }
    std::vector<DeviceProfile> out;
    for (const auto &e : j) {
        out.push_back(DeviceProfile::from_json(e));
    }
    return out;
}

inline const DeviceProfile *find_profile(const std::vector<DeviceProfile> &profiles,
                                         const std::string &name) {
    for (const auto &p : profiles) {
        if (p.name == name) {
            return &p;
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Replay

/// Ordered outcomes from one or more counts records, consumed front to back.
/// Records must carry per-shot memory. Running out is reported, never wrapped.
class ReplaySource {
  public:
    explicit ReplaySource(const std::vector<std::filesystem::path> &files) {
        if (files.empty()) {
            throw ConfigError("replay source needs at least one file");
        }
        for (const auto &f : files) {
            auto rec = CountsRecord::load(f.string());
            append(rec, f.string());
            labels_.push_back(std::filesystem::weakly_canonical(f).string());
        }
    }

    explicit ReplaySource(const std::vector<CountsRecord> &records, std::string label) {
        for (const auto &r : records) {
            r.validate();
            append(r, label);
        }
        labels_.push_back(std::move(label));
    }

    /// Next recorded outcome, or nullopt once every outcome is used.
    std::optional<std::string> next_outcome() {
        if (pos_ >= outcomes_.size()) {
            return std::nullopt;
        }
        return outcomes_[pos_++];
    }

    std::size_t remaining() const { return outcomes_.size() - pos_; }
    std::size_t size() const { return outcomes_.size(); }

    std::string identity() const {
        std::string id = "replay:";
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            id += (i ? "," : "") + labels_[i];
        }
        return id;
    }

  private:
    void append(const CountsRecord &rec, const std::string &what) {
        if (!rec.memory) {
            throw FormatError("replay: '" + what + "' has no per-shot memory");
        }
        outcomes_.insert(outcomes_.end(), rec.memory->begin(), rec.memory->end());
    }

    std::vector<std::string> outcomes_;
    std::vector<std::string> labels_;
    std::size_t pos_ = 0;
};

/// Referee bits read from replayed outcomes: every character of every
/// outcome in recorded order.
class ReplayBitSource final : public BitSource {
  public:
    explicit ReplayBitSource(ReplaySource source) : source_(std::move(source)) {}

    std::uint8_t next_bit() override {
        if (char_ >= current_.size()) {
            auto next = source_.next_outcome();
            if (!next) {
                throw DepletedSourceError("replay source '" + source_.identity() +
                                          "' is exhausted");
            }
            current_ = std::move(*next);
            char_ = 0;
        }
        return current_[char_++] == '1' ? 1 : 0;
    }

    std::string identity() const override { return source_.identity(); }

  private:
    ReplaySource source_;
    std::string current_;
    std::size_t char_ = 0;
};

// ---------------------------------------------------------------------------
// Certified runs

enum class InputMode { Seeded, Replay };

struct ExperimentConfig {
    std::int64_t rounds = 100;
    std::int64_t shots = 1000;
    double lambda = 0.0;
    std::uint64_t master_seed = 0;
    QuantumStrategy strategy;
    InputMode input_mode = InputMode::Seeded;
    /// Referee seeds; derived from master_seed when unset.
    std::optional<std::uint64_t> seed_x;
    std::optional<std::uint64_t> seed_y;
    std::vector<std::filesystem::path> replay_x;
    std::vector<std::filesystem::path> replay_y;
    double threshold_z = kDefaultThresholdZ;
    int threads = 1;
    std::optional<std::string> profile;

    void validate() const {
        if (rounds < 1) {
            throw ConfigError("rounds must be >= 1");
        }
        if (shots < 1) {
            throw ConfigError("shots must be >= 1");
        }
        if (!(lambda >= 0.0 && lambda <= 1.0)) {
            throw ConfigError("lambda must lie in [0, 1]");
        }
        if (threads < 1) {
            throw ConfigError("threads must be >= 1");
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = kFormatVersion;
        j["rounds"] = rounds;
        j["shots"] = shots;
        j["lambda"] = lambda;
        j["master_seed"] = master_seed;
        j["strategy"] = {{"alice", strategy.alice},
                         {"bob", strategy.bob},
                         {"global_offset", strategy.global_offset}};
        nlohmann::json inputs;
        inputs["mode"] = input_mode == InputMode::Seeded ? "seeded" : "replay";
        if (seed_x) {
            inputs["seed_x"] = *seed_x;
        }
        if (seed_y) {
            inputs["seed_y"] = *seed_y;
        }
        auto paths = [](const std::vector<std::filesystem::path> &v) {
            auto a = nlohmann::json::array();
            for (const auto &p : v) {
                a.push_back(p.string());
            }
            return a;
        };
        if (input_mode == InputMode::Replay) {
            inputs["replay_x"] = paths(replay_x);
            inputs["replay_y"] = paths(replay_y);
        }
        j["inputs"] = inputs;
        j["threshold_z"] = threshold_z;
        j["threads"] = threads;
        if (profile) {
            j["profile"] = *profile;
        }
        return j;
    }

    /// Relative replay paths are resolved against `base_dir`.
    static ExperimentConfig from_json(const nlohmann::json &j,
                                      const std::filesystem::path &base_dir = {}) {
        ExperimentConfig c;
        try {
            c.rounds = j.value("rounds", c.rounds);
            c.shots = j.value("shots", c.shots);
            c.lambda = j.value("lambda", c.lambda);
            c.master_seed = j.value("master_seed", c.master_seed);
            c.threshold_z = j.value("threshold_z", c.threshold_z);
            c.threads = j.value("threads", c.threads);
            if (j.contains("profile")) {
                c.profile = j.at("profile").get<std::string>();
            }
            if (j.contains("strategy")) {
                const auto &s = j.at("strategy");
                c.strategy.alice = s.value("alice", c.strategy.alice);
                c.strategy.bob = s.value("bob", c.strategy.bob);
                c.strategy.global_offset = s.value("global_offset", 0.0);
            }
            if (j.contains("inputs")) {
                const auto &in = j.at("inputs");
                const auto mode = in.value("mode", std::string("seeded"));
                if (mode == "seeded") {
                    c.input_mode = InputMode::Seeded;
                } else if (mode == "replay") {
                    c.input_mode = InputMode::Replay;
                } else {
                    throw FormatError("config: unknown input mode '" + mode + "'");
                }
                if (in.contains("seed_x")) {
                    c.seed_x = in.at("seed_x").get<std::uint64_t>();
                }
                if (in.contains("seed_y")) {
                    c.seed_y = in.at("seed_y").get<std::uint64_t>();
                }
                auto paths = [&](const char *key) {
                    std::vector<std::filesystem::path> out;
                    if (in.contains(key)) {
                        for (const auto &p : in.at(key)) {
                            std::filesystem::path path = p.get<std::string>();
                            out.push_back(path.is_relative() && !base_dir.empty()
                                              ? base_dir / path
                                              : path);
                        }
                    }
                    return out;
                };
                c.replay_x = paths("replay_x");
                c.replay_y = paths("replay_y");
            }
        } catch (const nlohmann::json::exception &e) {
            throw FormatError(std::string("experiment config: ") + e.what());
        }
        return c;
    }
};

struct DetectionSummary {
    double efficiency = 1.0;
    std::int64_t total_shots = 0;
    std::int64_t detected_shots = 0;
    std::int64_t detected_wins = 0;
    double post_selected_p_win = 0.0;
    /// Wins among jointly detected shots over all shots; set only when all
    /// events are reported.
    std::optional<double> all_event_p_win;
};

struct CertifiedRun {
    ExperimentResult experiment;
    Certificate certificate;
    /// Alice's output bit for every analyzed shot, rounds in order.
    BitStream alice_bits;
    DetectionSummary detection;
};

namespace detail {

inline std::vector<GameSetting> draw_inputs(const ExperimentConfig &config,
                                            const LoopholeConfig &loopholes) {
    std::unique_ptr<BitSource> a;
    std::unique_ptr<BitSource> b;
    if (config.input_mode == InputMode::Seeded) {
        const auto [da, db] = referee_seeds(config.master_seed);
        a = std::make_unique<SeededBitSource>(config.seed_x.value_or(da));
        if (loopholes.independent_inputs) {
            b = std::make_unique<SeededBitSource>(config.seed_y.value_or(db));
        }
    } else {
        if (config.replay_x.empty()) {
            throw ConfigError("replay mode needs replay_x files");
        }
        a = std::make_unique<ReplayBitSource>(ReplaySource(config.replay_x));
        if (loopholes.independent_inputs) {
            if (config.replay_y.empty()) {
                throw ConfigError("independent inputs need a second replay source (replay_y)");
            }
            b = std::make_unique<ReplayBitSource>(ReplaySource(config.replay_y));
        }
    }
    if (loopholes.independent_inputs) {
        return referee_inputs(config.rounds, *a, *b);
    }
    // Both inputs from one source: the freedom-of-choice control is off.
    std::vector<GameSetting> out;
    for (std::int64_t i = 0; i < config.rounds; ++i) {
        const auto x = a->next_bit();
        const auto y = a->next_bit();
        out.emplace_back(x, y);
    }
    return out;
}

} // namespace detail

/// Plays every round under the loophole controls and certifies the result.
///
/// With detection_efficiency < 1 the experiment and certificate describe the
/// post-selected shots (both parties detected); rounds left with no detected
/// shot are dropped.
inline CertifiedRun run_certified_experiment(const ExperimentConfig &config,
                                             const LoopholeConfig &loopholes) {
    config.validate();
    loopholes.validate();
    const auto settings = detail::draw_inputs(config, loopholes);

    ExperimentParams params;
    params.rounds = config.rounds;
    params.shots = config.shots;
    params.strategy = config.strategy;
    params.lambda = config.lambda;
    params.master_seed = config.master_seed;
    params.record_memory = true;
    params.threads = config.threads;

    ExperimentResult raw;
    if (loopholes.fresh_state_per_round) {
        raw = play_rounds(settings, params);
    } else {
        // One generator carried across rounds: round i depends on rounds < i.
        Philox4x32 rng(derive_seed(config.master_seed, 0, SeedDomain::Round));
        std::vector<RoundResult> rounds;
        for (const auto &s : settings) {
            rounds.push_back(play_round(s, config.strategy, config.shots, config.lambda, rng, true));
        }
        raw = ExperimentResult::summarize(std::move(rounds));
    }

    CertifiedRun run;
    run.alice_bits.source_tag = SourceTag::Chsh;
    run.detection.efficiency = loopholes.detection_efficiency;
    run.detection.total_shots = raw.total_shots();

    if (loopholes.detection_efficiency >= 1.0) {
        for (const auto &r : raw.rounds) {
            for (const auto &shot : *r.counts.memory) {
                run.alice_bits.bits.push_back(shot[0] == '1' ? 1 : 0);
            }
        }
        run.experiment = std::move(raw);
    } else {
        const double eta = loopholes.detection_efficiency;
        Philox4x32 carried(derive_seed(config.master_seed, 0, SeedDomain::Detection));
        std::vector<RoundResult> kept;
        for (std::size_t i = 0; i < raw.rounds.size(); ++i) {
            const auto &r = raw.rounds[i];
            Philox4x32 fresh(derive_seed(config.master_seed, i, SeedDomain::Detection));
            Philox4x32 &rng = loopholes.fresh_state_per_round ? fresh : carried;
            CountsRecord rec;
            rec.memory.emplace();
            rec.metadata = r.counts.metadata;
            rec.metadata["detection_efficiency"] = eta;
            for (const auto &shot : *r.counts.memory) {
                const bool alice_clicks = rng.uniform() < eta;
                const bool bob_clicks = rng.uniform() < eta;
                if (alice_clicks && bob_clicks) {
                    rec.memory->push_back(shot);
                    ++rec.counts[shot];
                    run.alice_bits.bits.push_back(shot[0] == '1' ? 1 : 0);
                }
            }
            rec.shots = static_cast<std::int64_t>(rec.memory->size());
            if (rec.shots > 0) {
                kept.push_back(RoundResult::from_counts(r.setting, std::move(rec)));
            }
        }
        run.experiment = ExperimentResult::summarize(std::move(kept));
    }

    run.detection.detected_shots = run.experiment.total_shots();
    run.detection.detected_wins = run.experiment.total_wins();
    run.detection.post_selected_p_win = run.experiment.pooled_p_win();
    if (loopholes.report_all_events) {
        run.detection.all_event_p_win =
            static_cast<double>(run.detection.detected_wins) /
            static_cast<double>(run.detection.total_shots);
    }
    run.certificate = certify(run.experiment, config.threshold_z);
    return run;
}

// ---------------------------------------------------------------------------
// Report files

inline constexpr double kHistogramBinWidth = 0.01;
inline constexpr int kHistogramBins = 100;
inline constexpr int kDensityGridPoints = 501;

/// Index of the 0.01-wide bin holding `p`; 1.0 falls in the last bin.
inline int histogram_bin(double p) {
    const int b = static_cast<int>(std::floor(p / kHistogramBinWidth + 1e-9));
    return std::clamp(b, 0, kHistogramBins - 1);
}

inline std::vector<std::int64_t> win_histogram(const ExperimentResult &e) {
    std::vector<std::int64_t> h(kHistogramBins, 0);
    for (const auto &r : e.rounds) {
        ++h[static_cast<std::size_t>(histogram_bin(r.win_fraction))];
    }
    return h;
}

/// Gaussian kernel bandwidth: Silverman's rule on the round win fractions,
/// falling back to the histogram bin width when the spread is zero.
inline double kde_bandwidth(const ExperimentResult &e) {
    const auto n = static_cast<double>(e.rounds.size());
    if (e.rounds.size() < 2) {
        return kHistogramBinWidth;
    }
    const double sample_sd = e.sigma * std::sqrt(n / (n - 1.0));
    const double h = 1.06 * sample_sd * std::pow(n, -0.2);
    return h > 0.0 ? h : kHistogramBinWidth;
}

/// (grid point, density) pairs on [0, 1].
inline std::vector<std::pair<double, double>> win_density(const ExperimentResult &e) {
    std::vector<std::pair<double, double>> out;
    const double h = kde_bandwidth(e);
    const auto n = static_cast<double>(e.rounds.size());
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    for (int k = 0; k < kDensityGridPoints; ++k) {
        const double x = static_cast<double>(k) / (kDensityGridPoints - 1);
        double d = 0.0;
        for (const auto &r : e.rounds) {
            const double u = (x - r.win_fraction) / h;
            d += std::exp(-0.5 * u * u);
        }
        out.emplace_back(x, d * norm);
    }
    return out;
}

inline std::vector<double> running_average(const ExperimentResult &e) {
    std::vector<double> out;
    double sum = 0.0;
    for (std::size_t i = 0; i < e.rounds.size(); ++i) {
        sum += e.rounds[i].win_fraction;
        out.push_back(sum / static_cast<double>(i + 1));
    }
    return out;
}

/// Extra fields for summary.json.
struct SummaryInfo {
    std::optional<std::string> device;
    std::optional<double> avg_win_target;
    std::optional<double> lambda;
    std::optional<LoopholeConfig> loopholes;
    std::optional<DetectionSummary> detection;
};

inline std::string rounds_csv(const ExperimentResult &e) {
    std::ostringstream os;
    os << "round_index,x,y,same_count,diff_count,win_fraction\n";
    for (std::size_t i = 0; i < e.rounds.size(); ++i) {
        const auto &r = e.rounds[i];
        os << i << ',' << int(r.setting.x) << ',' << int(r.setting.y) << ',' << r.same_count
           << ',' << r.diff_count << ',' << io::fmt6(r.win_fraction) << '\n';
    }
    return os.str();
}

/// Parses rounds_csv output back into an experiment. Win fractions are
/// recomputed from the tallies.
inline ExperimentResult parse_rounds_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("round_index,x,y,same_count,diff_count,win_fraction", 0) != 0) {
        throw FormatError("rounds csv: missing header");
    }
    std::vector<RoundResult> rounds;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ls, f, ',')) {
            fields.push_back(f);
        }
        if (fields.size() != 6) {
            throw FormatError("rounds csv: expected 6 fields in '" + line + "'");
        }
        try {
            const int x = std::stoi(fields[1]);
            const int y = std::stoi(fields[2]);
            rounds.push_back(RoundResult::from_tallies(GameSetting(x, y), std::stoll(fields[3]),
                                                       std::stoll(fields[4])));
        } catch (const std::logic_error &) {
            throw FormatError("rounds csv: bad numeric field in '" + line + "'");
        } catch (const DomainError &e) {
            throw FormatError(std::string("rounds csv: ") + e.what());
        }
    }
    return ExperimentResult::summarize(std::move(rounds));
}

inline nlohmann::json summary_json(const ExperimentResult &e, const SummaryInfo &info) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["rounds"] = e.rounds.size();
    j["total_shots"] = e.total_shots();
    j["p_min"] = io::round6(e.p_min);
    j["p_avg"] = io::round6(e.p_avg);
    j["p_max"] = io::round6(e.p_max);
    j["sigma"] = io::round6(e.sigma);
    j["pooled_p_win"] = io::round6(e.pooled_p_win());
    if (info.device) {
        j["device"] = *info.device;
    }
    if (info.avg_win_target) {
        j["avg_win_target"] = *info.avg_win_target;
    }
    if (info.lambda) {
        j["lambda"] = io::round6(*info.lambda);
    }
    const LoopholeConfig lc = info.loopholes.value_or(LoopholeConfig{});
    nlohmann::json notes;
    notes["freedom_of_choice"] = lc.independent_inputs
                                     ? "closed: x and y drawn from independent sources"
                                     : "open: x and y drawn from one source";
    notes["memory"] = lc.fresh_state_per_round
                          ? "partially closed: fresh generator state per round, same device"
                          : "open: generator state carried across rounds";
    notes["fair_sampling"] =
        lc.detection_efficiency >= 1.0
            ? "closed: every shot detected"
            : "post-selected: detection efficiency " + io::fmt6(lc.detection_efficiency);
    notes["locality"] = "open: parties are not space-like separated";
    j["loopholes"] = notes;
    if (info.loopholes) {
        j["loophole_config"] = info.loopholes->to_json();
    }
    if (info.detection) {
        const auto &d = *info.detection;
        nlohmann::json dj;
        dj["efficiency"] = d.efficiency;
        dj["total_shots"] = d.total_shots;
        dj["detected_shots"] = d.detected_shots;
        dj["post_selected_p_win"] = io::round6(d.post_selected_p_win);
        if (d.all_event_p_win) {
            dj["all_event_p_win"] = io::round6(*d.all_event_p_win);
        }
        j["detection"] = dj;
    }
    return j;
}

/// Writes running_avg.csv, hist.csv, density.csv and summary.json to
/// `out_dir` (created if missing). Returns the written paths.
inline std::vector<std::filesystem::path> emit_reports(const ExperimentResult &e,
                                                       const std::filesystem::path &out_dir,
                                                       const SummaryInfo &info = {}) {
    if (e.rounds.empty()) {
        throw DomainError("emit_reports: experiment has no rounds");
    }
    io::ensure_directory(out_dir);
    std::vector<std::filesystem::path> written;

    {
        std::ostringstream os;
        os << "round_index,win_fraction,running_avg\n";
        const auto avg = running_average(e);
        for (std::size_t i = 0; i < avg.size(); ++i) {
            os << i << ',' << io::fmt6(e.rounds[i].win_fraction) << ',' << io::fmt6(avg[i])
               << '\n';
        }
        written.push_back(out_dir / "running_avg.csv");
        io::write_file_atomic(written.back(), os.str());
    }
    {
        std::ostringstream os;
        os << "bin_lo,bin_hi,count\n";
        const auto h = win_histogram(e);
        for (int b = 0; b < kHistogramBins; ++b) {
            os << io::fmt6(b * kHistogramBinWidth) << ',' << io::fmt6((b + 1) * kHistogramBinWidth)
               << ',' << h[static_cast<std::size_t>(b)] << '\n';
        }
        written.push_back(out_dir / "hist.csv");
        io::write_file_atomic(written.back(), os.str());
    }
    {
        std::ostringstream os;
        os << "p_win,density\n";
        for (const auto &[x, d] : win_density(e)) {
            os << io::fmt6(x) << ',' << io::fmt6(d) << '\n';
        }
        written.push_back(out_dir / "density.csv");
        io::write_file_atomic(written.back(), os.str());
    }
    written.push_back(out_dir / "summary.json");
    io::write_file_atomic(written.back(), io::dump(summary_json(e, info)));
    return written;
}

} // namespace dirng
