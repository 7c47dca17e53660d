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
 * Device-independence verdict from observed CHSH game statistics.
 *
 * The game value p and the CHSH correlator are related by S = 8p - 4, so the
 * classical bound p = 3/4 is S = 2 and the quantum optimum cos^2(pi/8) is the
 * Tsirelson bound S = 2*sqrt(2). Certified min-entropy per output bit is
 * bounded below by
 *
 *     H_min >= 1 - log2(1 + sqrt(2 - S^2/4))
 *
 * (Pironio et al., Nature 464, 2010), which is 0 at S = 2 and 1 at S = 2*sqrt(2).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "dirng/counts_record.hpp"
#include "dirng/errors.hpp"
#include "dirng/game.hpp"

namespace dirng {

inline constexpr double kTsirelsonBound = 2.0 * std::numbers::sqrt2;
inline constexpr double kClassicalSBound = 2.0;
inline constexpr double kDefaultThresholdZ = 5.0;

/// CHSH correlator for a game value: 8p - 4.
inline double s_value(double p_win) {
    if (!(p_win >= 0.0 && p_win <= 1.0)) {
        throw DomainError("win probability must lie in [0, 1]");
    }
    return 8.0 * p_win - 4.0;
}

/// One-sided z-score of p_win against the classical bound 3/4 using the
/// binomial standard error. Returns +/-infinity when p_win is 0 or 1.
inline double violation_significance(double p_win, std::int64_t n_total_shots) {
    if (n_total_shots < 1) {
        throw DomainError("n_total_shots must be >= 1");
    }
    if (!(p_win >= 0.0 && p_win <= 1.0)) {
        throw DomainError("win probability must lie in [0, 1]");
    }
    const double delta = p_win - kClassicalWinBound;
    const double var = p_win * (1.0 - p_win) / static_cast<double>(n_total_shots);
    if (var == 0.0) {
        return std::copysign(std::numeric_limits<double>::infinity(), delta);
    }
    return delta / std::sqrt(var);
}

/// Certified min-entropy bits per output bit for CHSH value `s`.
inline double min_entropy_rate(double s) {
    // A hair of slack so s_value(cos^2(pi/8)) is accepted despite rounding.
    if (!(s >= 0.0) || s > kTsirelsonBound + 1e-12) {
        throw DomainError("CHSH value must lie in [0, 2*sqrt(2)]");
    }
    const double inner = std::max(0.0, 2.0 - s * s / 4.0);
    return std::max(0.0, 1.0 - std::log2(1.0 + std::sqrt(inner)));
}

enum class Verdict { Certified, NotViolated, InsufficientData };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Certified:
        return "CERTIFIED";
    case Verdict::NotViolated:
        return "NOT_VIOLATED";
    case Verdict::InsufficientData:
        return "INSUFFICIENT_DATA";
    }
    return "";
}

inline Verdict verdict_from_string(const std::string &s) {
    if (s == "CERTIFIED") {
        return Verdict::Certified;
    }
    if (s == "NOT_VIOLATED") {
        return Verdict::NotViolated;
    }
    if (s == "INSUFFICIENT_DATA") {
        return Verdict::InsufficientData;
    }
    throw FormatError("unknown verdict '" + s + "'");
}

struct Certificate {
    double p_win = 0.0;
    std::int64_t n_total_shots = 0;
    double s_value = 0.0;
    double z_score = 0.0;
    double min_entropy_rate = 0.0;
    Verdict verdict = Verdict::InsufficientData;
    double threshold_z = kDefaultThresholdZ;

    bool certified() const { return verdict == Verdict::Certified; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = kFormatVersion;
        j["p_win"] = p_win;
        j["n"] = n_total_shots;
        j["s"] = s_value;
        if (std::isfinite(z_score)) {
            j["z"] = z_score;
        } else {
            j["z"] = z_score > 0 ? "inf" : "-inf";
        }
        j["min_entropy_rate"] = min_entropy_rate;
        j["verdict"] = to_string(verdict);
        j["threshold_z"] = threshold_z;
        return j;
    }

    static Certificate from_json(const nlohmann::json &j) {
        Certificate c;
        try {
            c.p_win = j.at("p_win").get<double>();
            c.n_total_shots = j.at("n").get<std::int64_t>();
            c.s_value = j.at("s").get<double>();
            const auto &z = j.at("z");
            if (z.is_string()) {
                const auto s = z.get<std::string>();
                if (s != "inf" && s != "-inf") {
                    throw FormatError("certificate: bad z value '" + s + "'");
                }
                c.z_score = (s == "inf" ? 1.0 : -1.0) * std::numeric_limits<double>::infinity();
            } else {
                c.z_score = z.get<double>();
            }
            c.min_entropy_rate = j.at("min_entropy_rate").get<double>();
            c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
            c.threshold_z = j.at("threshold_z").get<double>();
        } catch (const nlohmann::json::exception &e) {
            throw FormatError(std::string("certificate: ") + e.what());
        }
        return c;
    }

    bool operator==(const Certificate &) const = default;
};

/// Pools every shot of `experiment` and issues a verdict.
///
/// CERTIFIED requires z >= threshold_z and S > 2. The entropy rate is only
/// reported for certified data; a sampled S above 2*sqrt(2) is clamped to the
/// bound. Empty experiments, and pooled p_win of exactly 0 or 1 (no variance
/// estimate), give INSUFFICIENT_DATA.
inline Certificate certify(const ExperimentResult &experiment,
                           double threshold_z = kDefaultThresholdZ) {
    Certificate c;
    c.threshold_z = threshold_z;
    c.n_total_shots = experiment.total_shots();
    if (experiment.rounds.empty() || c.n_total_shots == 0) {
        c.verdict = Verdict::InsufficientData;
        return c;
    }
    c.p_win = experiment.pooled_p_win();
    c.s_value = s_value(c.p_win);
    c.z_score = violation_significance(c.p_win, c.n_total_shots);
    if (!std::isfinite(c.z_score)) {
        c.verdict = Verdict::InsufficientData;
        return c;
    }
    c.verdict = (c.z_score >= threshold_z && c.s_value > kClassicalSBound)
                    ? Verdict::Certified
                    : Verdict::NotViolated;
    if (c.certified()) {
        c.min_entropy_rate = min_entropy_rate(std::min(c.s_value, kTsirelsonBound));
    }
    return c;
}

} // namespace dirng
