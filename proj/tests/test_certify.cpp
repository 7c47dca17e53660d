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

#include "gtest/gtest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dirng/certify.hpp"

using namespace dirng;

namespace {

const double kCos2 = std::pow(std::cos(std::numbers::pi / 8), 2);

ExperimentResult rounds_with(std::vector<std::pair<std::int64_t, std::int64_t>> same_diff,
                             GameSetting setting = {0, 0}) {
    std::vector<RoundResult> rounds;
    for (const auto &[s, d] : same_diff) {
        rounds.push_back(RoundResult::from_tallies(setting, s, d));
    }
    return ExperimentResult::summarize(std::move(rounds));
}

} // namespace

TEST(SValue, Endpoints) {
    EXPECT_EQ(s_value(0.75), 2.0);
    EXPECT_NEAR(s_value(kCos2), 2.0 * std::numbers::sqrt2, 1e-12);
    // 8 * (1 + cos(pi/4)) / 2 - 4 = 4 cos(pi/4) = 2 sqrt 2
    EXPECT_NEAR(s_value(kCos2), 4.0 * std::cos(std::numbers::pi / 4), 1e-12);
    EXPECT_NEAR(s_value(0.79622), 2.36976, 1e-12);
    EXPECT_THROW(s_value(-0.1), DomainError);
    EXPECT_THROW(s_value(1.1), DomainError);
}

TEST(SValue, AffineIncreasing) {
    double prev = -10.0;
    for (int k = 0; k <= 1000; ++k) {
        const double s = s_value(k / 1000.0);
        EXPECT_GT(s, prev);
        prev = s;
    }
}

TEST(Significance, Values) {
    EXPECT_EQ(violation_significance(0.75, 12345), 0.0);
    EXPECT_NEAR(violation_significance(0.79622, 100000), 36.2855, 1e-3);
    EXPECT_NEAR(violation_significance(0.76, 100), 0.234146, 1e-5);
    EXPECT_NEAR(violation_significance(0.9, 10), 1.581139, 1e-5);
    EXPECT_EQ(violation_significance(1.0, 10), std::numeric_limits<double>::infinity());
    EXPECT_EQ(violation_significance(0.0, 10), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(violation_significance(0.8, 0), DomainError);
}

TEST(MinEntropy, Endpoints) {
    EXPECT_EQ(min_entropy_rate(2.0), 0.0);
    EXPECT_NEAR(min_entropy_rate(2.0 * std::numbers::sqrt2), 1.0, 1e-9);
    EXPECT_NEAR(min_entropy_rate(s_value(kCos2)), 1.0, 1e-6);
    // 1 - log2(1 + sqrt(0.56))
    EXPECT_NEAR(min_entropy_rate(2.4), 1.0 - std::log2(1.0 + std::sqrt(0.56)), 1e-15);
    EXPECT_NEAR(min_entropy_rate(2.4), 0.19402, 1e-4);
    EXPECT_THROW(min_entropy_rate(2.9), DomainError);
    EXPECT_THROW(min_entropy_rate(-0.1), DomainError);
}

TEST(MinEntropy, ZeroBelowClassicalAndMonotoneAbove) {
    for (int k = 0; k <= 200; ++k) {
        EXPECT_EQ(min_entropy_rate(2.0 * k / 200.0), 0.0);
    }
    double prev = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double s = 2.0 + (2.0 * std::numbers::sqrt2 - 2.0) * k / 99.0;
        const double h = min_entropy_rate(s);
        EXPECT_GE(h, prev);
        prev = h;
    }
}

TEST(Certify, IdealExperimentCertified) {
    ExperimentParams p;
    p.master_seed = 1;
    const auto c = certify(run_experiment(p));
    EXPECT_EQ(c.verdict, Verdict::Certified);
    EXPECT_EQ(c.n_total_shots, 100000);
    EXPECT_NEAR(c.s_value, 8 * c.p_win - 4, 1e-12);
    EXPECT_GE(c.min_entropy_rate, 0.95);
    EXPECT_LE(c.min_entropy_rate, 1.0);
}

TEST(Certify, FullNoiseNotViolated) {
    ExperimentParams p;
    p.master_seed = 1;
    p.lambda = 1.0;
    const auto c = certify(run_experiment(p));
    EXPECT_EQ(c.verdict, Verdict::NotViolated);
    EXPECT_EQ(c.min_entropy_rate, 0.0);
}

TEST(Certify, SmallSampleNotViolated) {
    const auto c = certify(rounds_with({{9, 1}}));
    EXPECT_NEAR(c.p_win, 0.9, 1e-15);
    EXPECT_NEAR(c.z_score, 1.5811, 1e-4);
    EXPECT_EQ(c.verdict, Verdict::NotViolated);
}

TEST(Certify, EmptyAndDegenerate) {
    EXPECT_EQ(certify(ExperimentResult{}).verdict, Verdict::InsufficientData);
    EXPECT_EQ(certify(rounds_with({{10, 0}})).verdict, Verdict::InsufficientData);
}

TEST(Certify, PoolsByShots) {
    // 900/1000 and 1/10: pooled 901/1010, not the mean of 0.9 and 0.1
    const auto e = rounds_with({{900, 100}, {1, 9}});
    const auto c = certify(e);
    EXPECT_NEAR(c.p_win, 901.0 / 1010.0, 1e-15);
    EXPECT_NEAR(e.p_avg, 0.5, 1e-15);
}

TEST(Certify, NeverCertifiesAtOrBelowClassicalBound) {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> shots(1, 5000);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::pair<std::int64_t, std::int64_t>> rounds;
        for (int r = 0; r < 20; ++r) {
            const int n = shots(gen);
            std::uniform_int_distribution<int> wins(0, (3 * n) / 4);
            const int w = wins(gen);
            rounds.emplace_back(w, n - w);
        }
        EXPECT_NE(certify(rounds_with(rounds)).verdict, Verdict::Certified);
    }
}

TEST(Certify, ThresholdIsConfigurable) {
    const auto e = rounds_with({{790, 210}}); // z ~ 3.1
    EXPECT_EQ(certify(e).verdict, Verdict::NotViolated);
    EXPECT_EQ(certify(e, 3.0).verdict, Verdict::Certified);
}

TEST(Certificate, JsonRoundTrip) {
    ExperimentParams p;
    p.master_seed = 8;
    p.lambda = 0.12;
    const auto c = certify(run_experiment(p));
    EXPECT_EQ(Certificate::from_json(nlohmann::json::parse(c.to_json().dump())), c);

    const auto inf = certify(rounds_with({{10, 0}}));
    EXPECT_EQ(Certificate::from_json(nlohmann::json::parse(inf.to_json().dump())), inf);

    Certificate degenerate;
    degenerate.z_score = std::numeric_limits<double>::infinity();
    EXPECT_EQ(Certificate::from_json(degenerate.to_json()), degenerate);

    const auto j = c.to_json();
    for (const char *key : {"p_win", "n", "s", "z", "min_entropy_rate", "verdict", "threshold_z"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    auto bad = j;
    bad["verdict"] = "MAYBE";
    EXPECT_THROW(Certificate::from_json(bad), FormatError);
}
