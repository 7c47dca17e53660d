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

#include <sstream>

#include "dirng/cli.hpp"
#include "test_util.hpp"

using namespace dirng;
using dirng::testing::TempDir;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "dirng");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path &p) { return io::read_file(p); }

} // namespace

TEST(Cli, PlayIdealIsCertified) {
    TempDir dir;
    const auto r = run_cli({"play", "--rounds", "100", "--shots", "1000", "--lambda", "0",
                            "--seed", "7", "--out", dir.path().string()});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto cert = Certificate::from_json(io::read_json(dir / "certificate.json"));
    EXPECT_EQ(cert.verdict, Verdict::Certified);
    for (const char *f : {"rounds.csv", "summary.json", "running_avg.csv", "hist.csv",
                          "density.csv", "config.json", "alice_bits.bin"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    EXPECT_EQ(std::filesystem::file_size(dir / "alice_bits.bin"), 100000u / 8);
    EXPECT_NE(r.out.find("CERTIFIED"), std::string::npos);
}

TEST(Cli, PlayProfile) {
    TempDir dir;
    const auto r = run_cli({"play", "--profile", "ibmq_belem", "--rounds", "100", "--shots",
                            "1000", "--seed", "7", "--out", dir.path().string()});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto summary = io::read_json(dir / "summary.json");
    EXPECT_NEAR(summary.at("p_avg").get<double>(), 0.79622, 0.01);
    EXPECT_EQ(summary.at("device").get<std::string>(), "ibmq_belem");
    EXPECT_EQ(run_cli({"play", "--profile", "ibmq_nowhere", "--out", dir.path().string()}).code,
              64);
    EXPECT_EQ(run_cli({"play", "--profile", "ibmq_lima", "--lambda", "0.1"}).code, 64);
}

TEST(Cli, PlayDeterministicBytes) {
    TempDir a, b;
    const std::vector<std::string> flags{"play", "--rounds", "30", "--shots", "500", "--lambda",
                                         "0.05", "--seed", "123", "--efficiency", "0.8",
                                         "--report-all-events"};
    auto fa = flags, fb = flags;
    fa.insert(fa.end(), {"--out", a.path().string()});
    fb.insert(fb.end(), {"--out", b.path().string(), "--threads", "3"});
    const auto ra = run_cli(fa);
    const auto rb = run_cli(fb);
    EXPECT_EQ(ra.out, rb.out);
    for (const char *f : {"rounds.csv", "summary.json", "running_avg.csv", "hist.csv",
                          "density.csv", "certificate.json", "alice_bits.bin"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(Cli, PlayNotViolatedExitsTwo) {
    TempDir dir;
    const auto r = run_cli({"play", "--rounds", "20", "--shots", "100", "--lambda", "1", "--seed",
                            "3", "--out", dir.path().string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("NOT_VIOLATED"), std::string::npos);
}

TEST(Cli, PlayUsageErrors) {
    EXPECT_EQ(run_cli({"play", "--rounds", "0"}).code, 64);
    EXPECT_EQ(run_cli({"play", "--shots", "-5"}).code, 64);
    EXPECT_EQ(run_cli({"play", "--lambda", "1.5"}).code, 64);
    EXPECT_EQ(run_cli({"play", "--efficiency", "0"}).code, 64);
    EXPECT_EQ(run_cli({"play", "--bogus"}).code, 64);
    EXPECT_EQ(run_cli({}).code, 64);
    EXPECT_EQ(run_cli({"levitate"}).code, 64);
}

TEST(Cli, PlayValidatesBeforeWriting) {
    TempDir dir;
    const auto out = dir / "never";
    EXPECT_EQ(run_cli({"play", "--rounds", "0", "--out", out.string()}).code, 64);
    EXPECT_EQ(run_cli({"play", "--profile", "nope", "--out", out.string()}).code, 64);
    EXPECT_FALSE(std::filesystem::exists(out));
}

TEST(Cli, PlayIoError) {
    TempDir dir;
    io::write_file_atomic(dir / "file", "x");
    const auto r = run_cli({"play", "--rounds", "2", "--shots", "10", "--out",
                            (dir / "file" / "sub").string()});
    EXPECT_EQ(r.code, 74);
}

TEST(Cli, PlayReplayIsReproducible) {
    TempDir dir;
    ASSERT_EQ(run_cli({"qrng", "--mode", "hadamard", "--qubits", "1", "--shots", "200", "--seed",
                       "1", "--out", (dir / "x").string()})
                  .code,
              0);
    ASSERT_EQ(run_cli({"qrng", "--mode", "hadamard", "--qubits", "1", "--shots", "200", "--seed",
                       "2", "--out", (dir / "y").string()})
                  .code,
              0);
    std::vector<std::string> flags{"play", "--rounds", "50", "--shots", "200", "--seed", "4",
                                   "--replay-x", (dir / "x.json").string(), "--replay-y",
                                   (dir / "y.json").string()};
    auto f1 = flags, f2 = flags;
    f1.insert(f1.end(), {"--out", (dir / "r1").string()});
    f2.insert(f2.end(), {"--out", (dir / "r2").string()});
    EXPECT_EQ(run_cli(f1).code, 0);
    EXPECT_EQ(run_cli(f2).code, 0);
    EXPECT_EQ(slurp(dir / "r1" / "rounds.csv"), slurp(dir / "r2" / "rounds.csv"));
    EXPECT_EQ(slurp(dir / "r1" / "alice_bits.bin"), slurp(dir / "r2" / "alice_bits.bin"));

    // Same file for both referees is refused; exhaustion is a data error.
    EXPECT_EQ(run_cli({"play", "--rounds", "10", "--replay-x", (dir / "x.json").string(),
                       "--replay-y", (dir / "x.json").string(), "--out", (dir / "r3").string()})
                  .code,
              64);
    EXPECT_EQ(run_cli({"play", "--rounds", "201", "--shots", "10", "--replay-x",
                       (dir / "x.json").string(), "--replay-y", (dir / "y.json").string(), "--out",
                       (dir / "r4").string()})
                  .code,
              65);
}

TEST(Cli, PlayConfigFile) {
    TempDir dir;
    io::write_file_atomic(dir / "cfg.json",
                          R"({"rounds": 12, "shots": 50, "lambda": 0.2, "master_seed": 9})");
    EXPECT_LE(run_cli({"play", "--config", (dir / "cfg.json").string(), "--out",
                       (dir / "a").string()})
                  .code,
              2);
    const auto cfg = io::read_json(dir / "a" / "config.json");
    EXPECT_EQ(cfg.at("rounds").get<int>(), 12);
    EXPECT_EQ(cfg.at("master_seed").get<int>(), 9);
    // Flags override the file.
    EXPECT_LE(run_cli({"play", "--config", (dir / "cfg.json").string(), "--rounds", "3", "--out",
                       (dir / "b").string()})
                  .code,
              2);
    EXPECT_EQ(io::read_json(dir / "b" / "config.json").at("rounds").get<int>(), 3);

    io::write_file_atomic(dir / "bad.json", "{");
    EXPECT_EQ(run_cli({"play", "--config", (dir / "bad.json").string()}).code, 65);
}

TEST(Cli, OutDirFromEnvironment) {
    TempDir dir;
    ::setenv(cli::kOutDirEnv, dir.path().c_str(), 1);
    const auto r = run_cli({"play", "--rounds", "2", "--shots", "10", "--seed", "1"});
    ::unsetenv(cli::kOutDirEnv);
    EXPECT_LE(r.code, 2);
    EXPECT_TRUE(std::filesystem::exists(dir / "rounds.csv"));
}

TEST(Cli, QrngHadamard) {
    TempDir dir;
    const auto prefix = (dir / "h").string();
    const auto r = run_cli({"qrng", "--mode", "hadamard", "--qubits", "5", "--shots", "20000",
                            "--seed", "3", "--out", prefix});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "bits 100000 streams 5\n");
    EXPECT_EQ(std::filesystem::file_size(prefix + ".bin"), 100000u / 8);
    const auto text = slurp(prefix + ".txt");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 20000);
    EXPECT_EQ(std::count(text.begin(), text.end(), '0') + std::count(text.begin(), text.end(), '1'),
              100000);
    const auto rec = CountsRecord::load(prefix + ".json");
    EXPECT_EQ(rec.shots, 20000);
    EXPECT_EQ(rec.width(), 5);

    EXPECT_EQ(run_cli({"test", "--in", prefix + ".bin", "--tests", "monobit,runs"}).code, 0);
}

TEST(Cli, QrngParity) {
    TempDir dir;
    const auto prefix = (dir / "p").string();
    EXPECT_EQ(run_cli({"qrng", "--mode", "parity", "--qubits", "3", "--shots", "1000", "--seed",
                       "3", "--out", prefix})
                  .code,
              0);
    std::istringstream lines(slurp(prefix + ".txt"));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        ASSERT_EQ(line.size(), 3u);
        EXPECT_EQ(std::count(line.begin(), line.end(), '1') % 2, 0) << line;
        ++n;
    }
    EXPECT_EQ(n, 1000);
    EXPECT_EQ(run_cli({"qrng", "--mode", "parity", "--qubits", "2", "--out", prefix}).code, 64);
    EXPECT_EQ(run_cli({"qrng", "--mode", "bell", "--out", prefix}).code, 64);
    EXPECT_EQ(run_cli({"qrng", "--mode", "hadamard", "--qubits", "13", "--out", prefix}).code, 64);
}

TEST(Cli, TestCommand) {
    TempDir dir;
    write_packed(dir / "zeros.bin", std::vector<std::uint8_t>(2000, 0));
    const auto r = run_cli({"test", "--in", (dir / "zeros.bin").string()});
    EXPECT_EQ(r.code, 1);
    const auto reports = nlohmann::json::parse(r.out);
    ASSERT_TRUE(reports.is_array());
    EXPECT_EQ(reports.size(), 3u);

    // 1000 bits are enough for monobit but not for 128-bit blocks.
    write_packed(dir / "k.bin", std::vector<std::uint8_t>(1000, 0));
    EXPECT_EQ(run_cli({"test", "--in", (dir / "k.bin").string(), "--tests", "monobit"}).code, 1);
    EXPECT_EQ(run_cli({"test", "--in", (dir / "k.bin").string()}).code, 65);
    io::write_file_atomic(dir / "short.txt", "0101");
    EXPECT_EQ(run_cli({"test", "--in", (dir / "short.txt").string()}).code, 65);
    EXPECT_EQ(run_cli({"test", "--in", (dir / "zeros.bin").string(), "--tests", "fft"}).code, 64);
    EXPECT_EQ(run_cli({"test", "--in", (dir / "missing.bin").string()}).code, 64);

    write_packed(dir / "good.bin", seeded_bits(20000, 4).bits);
    const auto json_out = dir / "report.json";
    EXPECT_EQ(run_cli({"test", "--in", (dir / "good.bin").string(), "--json", json_out.string()})
                  .code,
              0);
    EXPECT_TRUE(std::filesystem::exists(json_out));
}

TEST(Cli, FitNoise) {
    auto r = run_cli({"fit-noise", "--target", "0.82448"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "0.082232\n");
    EXPECT_NEAR(std::stod(r.out), 0.0822319666, 1e-6);
    r = run_cli({"fit-noise", "--profile", "ibmq_belem"});
    EXPECT_EQ(r.out, "0.162163\n");
    EXPECT_EQ(run_cli({"fit-noise", "--target", "0.9"}).code, 64);
    EXPECT_EQ(run_cli({"fit-noise"}).code, 64);
}

TEST(Cli, ExtractVonNeumannAndToeplitz) {
    TempDir dir;
    io::write_file_atomic(dir / "in.txt", "0110\n");
    auto r = run_cli({"extract", "--method", "von-neumann", "--in", (dir / "in.txt").string(),
                      "--out", (dir / "vn.txt").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "vn.txt"), "01\n");

    io::write_file_atomic(dir / "x.txt", "101\n");
    io::write_file_atomic(dir / "seed.txt", "01100\n");
    r = run_cli({"extract", "--method", "toeplitz", "--in", (dir / "x.txt").string(), "--out",
                 (dir / "t.txt").string(), "--out-len", "3", "--margin", "0", "--seed-file",
                 (dir / "seed.txt").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "t.txt"), "111\n");

    // Default margin of 64 makes 3 output bits from 3 inputs impossible.
    EXPECT_EQ(run_cli({"extract", "--method", "toeplitz", "--in", (dir / "x.txt").string(),
                       "--out", (dir / "t2.txt").string(), "--out-len", "3", "--seed-file",
                       (dir / "seed.txt").string()})
                  .code,
              64);
    EXPECT_EQ(run_cli({"extract", "--method", "toeplitz", "--in", (dir / "x.txt").string(),
                       "--out", (dir / "t3.txt").string(), "--out-len", "3"})
                  .code,
              64);
    EXPECT_EQ(run_cli({"extract", "--method", "sha256", "--in", (dir / "x.txt").string(),
                       "--out", (dir / "t4.txt").string()})
                  .code,
              64);
}

TEST(Cli, ExtractWithCertificateRate) {
    TempDir dir;
    ASSERT_EQ(run_cli({"play", "--rounds", "100", "--shots", "1000", "--seed", "7", "--out",
                       dir.path().string()})
                  .code,
              0);
    const auto cert = Certificate::from_json(io::read_json(dir / "certificate.json"));
    const std::int64_t budget =
        static_cast<std::int64_t>(std::floor(100000 * cert.min_entropy_rate - 64));
    const auto run_extract = [&](std::int64_t len) {
        return run_cli({"extract", "--method", "toeplitz", "--in", (dir / "alice_bits.bin").string(),
                        "--out", (dir / "final.bin").string(), "--bits", "100000", "--out-len",
                        std::to_string(len), "--certificate", (dir / "certificate.json").string(),
                        "--toeplitz-seed", "5"});
    };
    EXPECT_EQ(run_extract(budget).code, 0);
    EXPECT_EQ(std::filesystem::file_size(dir / "final.bin"),
              static_cast<std::uintmax_t>((budget + 7) / 8));
    EXPECT_EQ(run_extract(budget + 1).code, 64);
}

TEST(Cli, CertifyAndReport) {
    TempDir dir;
    ASSERT_EQ(run_cli({"play", "--rounds", "40", "--shots", "1000", "--seed", "2", "--out",
                       dir.path().string()})
                  .code,
              0);
    const auto r = run_cli({"certify", "--in", (dir / "rounds.csv").string()});
    EXPECT_EQ(r.code, 0);
    const auto from_csv = Certificate::from_json(nlohmann::json::parse(r.out));
    const auto from_play = Certificate::from_json(io::read_json(dir / "certificate.json"));
    EXPECT_EQ(from_csv, from_play);

    EXPECT_EQ(run_cli({"report", "--in", (dir / "rounds.csv").string(), "--out",
                       (dir / "rep").string(), "--device", "sim"})
                  .code,
              0);
    EXPECT_EQ(slurp(dir / "rep" / "hist.csv"), slurp(dir / "hist.csv"));
    EXPECT_EQ(io::read_json(dir / "rep" / "summary.json").at("device"), "sim");

    io::write_file_atomic(dir / "bad.csv", "round_index,x,y,same_count,diff_count,win_fraction\n0,2,0,1,1,0.5\n");
    EXPECT_EQ(run_cli({"certify", "--in", (dir / "bad.csv").string()}).code, 65);
    EXPECT_EQ(run_cli({"certify", "--in", (dir / "none.csv").string()}).code, 64);
}

TEST(Cli, HelpListsEveryFlag) {
    const std::map<std::string, std::vector<std::string>> flags{
        {"play",
         {"--rounds", "--shots", "--lambda", "--profile", "--profiles", "--seed", "--out",
          "--config", "--efficiency", "--report-all-events", "--reuse-state", "--shared-inputs",
          "--replay-x", "--replay-y", "--threshold-z", "--threads"}},
        {"certify", {"--in", "--out", "--threshold-z"}},
        {"qrng", {"--mode", "--qubits", "--shots", "--seed", "--out"}},
        {"extract",
         {"--method", "--in", "--out", "--bits", "--out-len", "--min-entropy-rate",
          "--certificate", "--margin", "--seed-file", "--toeplitz-seed"}},
        {"test", {"--in", "--tests", "--block-len", "--bits", "--json"}},
        {"fit-noise", {"--target", "--profile", "--profiles"}},
        {"report", {"--in", "--out", "--device"}},
    };
    for (const auto &[cmd, names] : flags) {
        const auto r = run_cli({cmd, "--help"});
        EXPECT_EQ(r.code, 0) << cmd;
        for (const auto &f : names) {
            EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
        }
        EXPECT_EQ(run_cli({cmd, "--no-such-flag"}).code, 64) << cmd;
    }
}
