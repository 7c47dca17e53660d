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
 * Command-line front end. `run` is the whole program minus process setup,
 * so tests can drive it in-process.
 *
 * Exit codes: 0 ok, 1 statistical test failed, 2 Bell violation not
 * certified, 64 usage, 65 bad input data, 74 I/O.
 */

#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dirng/certify.hpp"
#include "dirng/errors.hpp"
#include "dirng/game.hpp"
#include "dirng/harness.hpp"
#include "dirng/io.hpp"
#include "dirng/randomness.hpp"

namespace dirng::cli {

enum ExitCode : int {
    kOk = 0,
    kTestFailed = 1,
    kNotViolated = 2,
    kUsage = 64,
    kDataFormat = 65,
    kIoError = 74,
};

inline constexpr const char *kOutDirEnv = "DIRNG_OUT_DIR";

namespace detail {

namespace fs = std::filesystem;

struct PlayOptions {
    std::int64_t rounds = 100;
    std::int64_t shots = 1000;
    double lambda = 0.0;
    std::string profile;
    std::string profiles_file;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string config;
    double efficiency = 1.0;
    bool report_all_events = false;
    bool reuse_state = false;
    bool shared_inputs = false;
    std::vector<std::string> replay_x;
    std::vector<std::string> replay_y;
    double threshold_z = kDefaultThresholdZ;
    int threads = 1;
};

struct CertifyOptions {
    std::string in;
    std::string out;
    double threshold_z = kDefaultThresholdZ;
};

struct QrngOptions {
    std::string mode;
    int qubits = 5;
    std::int64_t shots = 20000;
    std::uint64_t seed = 0;
    std::string out;
};

struct ExtractOptions {
    std::string method;
    std::string in;
    std::string out;
    std::optional<std::size_t> bits;
    std::int64_t out_len = -1;
    double min_entropy_rate = 1.0;
    std::string certificate;
    std::int64_t margin = 64;
    std::string seed_file;
    std::optional<std::uint64_t> toeplitz_seed;
};

struct TestOptions {
    std::string in;
    std::vector<std::string> tests{"monobit", "block_frequency", "runs"};
    std::size_t block_len = 128;
    std::optional<std::size_t> bits;
    std::string json_out;
};

struct FitOptions {
    std::optional<double> target;
    std::string profile;
    std::string profiles_file;
};

struct ReportOptions {
    std::string in;
    std::string out_dir = ".";
    std::string device;
};

inline std::vector<DeviceProfile> profiles_from(const std::string &file) {
    return file.empty() ? builtin_device_profiles() : load_device_profiles(file);
}

inline const DeviceProfile &require_profile(const std::vector<DeviceProfile> &profiles,
                                            const std::string &name) {
    const auto *p = find_profile(profiles, name);
    if (!p) {
        throw ConfigError("unknown device profile '" + name + "'");
    }
    return *p;
}

/// Writes bits as packed binary, or as ASCII text for a `.txt` path.
inline void write_bits(const fs::path &path, std::span<const std::uint8_t> bits) {
    if (path.extension() == ".txt") {
        io::write_file_atomic(path, to_text(bits) + "\n");
    } else {
        write_packed(path, bits);
    }
}

inline int cmd_play(const PlayOptions &o, const CLI::App &sub, std::ostream &out) {
    ExperimentConfig cfg;
    if (!o.config.empty()) {
        const fs::path path(o.config);
        cfg = ExperimentConfig::from_json(io::read_json(path), path.parent_path());
    }
    if (sub.count("--rounds")) {
        cfg.rounds = o.rounds;
    }
    if (sub.count("--shots")) {
        cfg.shots = o.shots;
    }
    if (sub.count("--seed")) {
        cfg.master_seed = o.seed;
    }
    if (sub.count("--threshold-z")) {
        cfg.threshold_z = o.threshold_z;
    }
    if (sub.count("--threads")) {
        cfg.threads = o.threads;
    }
    if (!o.replay_x.empty() || !o.replay_y.empty()) {
        cfg.input_mode = InputMode::Replay;
        cfg.replay_x.assign(o.replay_x.begin(), o.replay_x.end());
        cfg.replay_y.assign(o.replay_y.begin(), o.replay_y.end());
    }

    SummaryInfo info;
    if (!o.profile.empty()) {
        cfg.profile = o.profile;
    }
    if (sub.count("--lambda")) {
        cfg.lambda = o.lambda;
        cfg.profile.reset();
    }
    if (cfg.profile) {
        const auto profiles = profiles_from(o.profiles_file);
        const auto &p = require_profile(profiles, *cfg.profile);
        cfg.lambda = p.fitted_lambda;
        info.device = p.name;
        info.avg_win_target = p.avg_win_target;
    }
    info.lambda = cfg.lambda;

    LoopholeConfig lc;
    lc.independent_inputs = !o.shared_inputs;
    lc.fresh_state_per_round = !o.reuse_state;
    lc.detection_efficiency = o.efficiency;
    lc.report_all_events = o.report_all_events;
    cfg.validate();
    lc.validate();
    info.loopholes = lc;

    const fs::path dir(o.out_dir);
    const auto run = run_certified_experiment(cfg, lc);
    if (run.experiment.rounds.empty()) {
        throw DomainError("no round had a detected shot");
    }
    info.detection = run.detection;

    emit_reports(run.experiment, dir, info);
    io::write_file_atomic(dir / "rounds.csv", rounds_csv(run.experiment));
    io::write_file_atomic(dir / "certificate.json", io::dump(run.certificate.to_json()));
    io::write_file_atomic(dir / "config.json", io::dump(cfg.to_json()));
    write_packed(dir / "alice_bits.bin", run.alice_bits.view());

    out << "rounds " << run.experiment.rounds.size() << " p_avg " << io::fmt6(run.experiment.p_avg)
        << " sigma " << io::fmt6(run.experiment.sigma) << " S " << io::fmt6(run.certificate.s_value)
        << " z " << io::fmt6(run.certificate.z_score) << " verdict "
        << to_string(run.certificate.verdict) << '\n';
    return run.certificate.certified() ? kOk : kNotViolated;
}

inline int cmd_certify(const CertifyOptions &o, std::ostream &out) {
    const auto experiment = parse_rounds_csv(io::read_file(o.in));
    const auto cert = certify(experiment, o.threshold_z);
    const auto text = io::dump(cert.to_json());
    if (o.out.empty()) {
        out << text;
    } else {
        io::write_file_atomic(o.out, text);
    }
    return cert.certified() ? kOk : kNotViolated;
}

inline int cmd_qrng(const QrngOptions &o, std::ostream &out) {
    if (o.mode == "parity" && o.qubits < 3) {
        throw ConfigError("parity mode needs --qubits >= 3");
    }
    StateVector::check_capacity(o.qubits, kDefaultQubitCap);
    const auto rec = o.mode == "hadamard" ? hadamard_record(o.qubits, o.shots, o.seed)
                                          : parity_record(o.qubits, o.shots, o.seed);
    const auto streams =
        streams_from_memory(rec, o.mode == "hadamard" ? SourceTag::Hadamard : SourceTag::Parity);

    std::vector<std::uint8_t> stream_major;
    for (const auto &s : streams) {
        stream_major.insert(stream_major.end(), s.bits.begin(), s.bits.end());
    }
    std::string lines;
    lines.reserve(rec.memory->size() * (static_cast<std::size_t>(o.qubits) + 1));
    for (const auto &shot : *rec.memory) {
        lines += shot;
        lines += '\n';
    }
    const fs::path base(o.out);
    if (base.has_parent_path()) {
        io::ensure_directory(base.parent_path());
    }
    write_packed(fs::path(o.out + ".bin"), stream_major);
    io::write_file_atomic(fs::path(o.out + ".txt"), lines);
    io::write_file_atomic(fs::path(o.out + ".json"), io::dump(rec.to_json()));
    out << "bits " << stream_major.size() << " streams " << streams.size() << '\n';
    return kOk;
}

inline int cmd_extract(const ExtractOptions &o, std::ostream &out) {
    const auto input = read_bit_file(o.in, o.bits);
    BitStream result;
    if (o.method == "von-neumann") {
        if (input.empty()) {
            throw FormatError("input stream is empty");
        }
        result = von_neumann(input);
    } else {
        if (o.out_len < 0) {
            throw ConfigError("toeplitz needs --out-len");
        }
        if (o.seed_file.empty() == !o.toeplitz_seed.has_value()) {
            throw ConfigError("toeplitz needs exactly one of --seed-file or --toeplitz-seed");
        }
        ExtractionBudget budget;
        budget.security_margin = o.margin;
        budget.min_entropy_rate = o.min_entropy_rate;
        if (!o.certificate.empty()) {
            const auto cert = Certificate::from_json(io::read_json(o.certificate));
            if (!cert.certified()) {
                throw ConfigError("certificate verdict is " + to_string(cert.verdict));
            }
            budget.min_entropy_rate = cert.min_entropy_rate;
        }
        const std::size_t seed_len = input.size() + static_cast<std::size_t>(o.out_len) - 1;
        BitStream seed = o.toeplitz_seed ? seeded_bits(seed_len, *o.toeplitz_seed)
                                         : read_bit_file(o.seed_file);
        if (!o.toeplitz_seed && seed.size() > seed_len) {
            seed.bits.resize(seed_len);
        }
        result = toeplitz_extract(input, seed, o.out_len, budget);
    }
    write_bits(o.out, result.view());
    out << "in " << input.size() << " out " << result.size() << '\n';
    return kOk;
}

inline int cmd_test(const TestOptions &o, std::ostream &out) {
    const auto bits = read_bit_file(o.in, o.bits);
    const auto reports = run_battery(bits.view(), o.tests, o.block_len);
    const auto text = io::dump(reports_to_json(reports));
    out << text;
    if (!o.json_out.empty()) {
        io::write_file_atomic(o.json_out, text);
    }
    for (const auto &r : reports) {
        if (!r.pass) {
            return kTestFailed;
        }
    }
    return kOk;
}

inline int cmd_fit(const FitOptions &o, std::ostream &out) {
    double target = 0.0;
    if (o.target) {
        target = *o.target;
    } else if (!o.profile.empty()) {
        target = require_profile(profiles_from(o.profiles_file), o.profile).avg_win_target;
    } else {
        throw ConfigError("fit-noise needs --target or --profile");
    }
    out << io::fmt6(fit_lambda(target)) << '\n';
    return kOk;
}

inline int cmd_report(const ReportOptions &o, std::ostream &out) {
    const auto experiment = parse_rounds_csv(io::read_file(o.in));
    if (experiment.rounds.empty()) {
        throw FormatError("rounds csv has no rounds");
    }
    SummaryInfo info;
    if (!o.device.empty()) {
        info.device = o.device;
    }
    const auto files = emit_reports(experiment, o.out_dir, info);
    for (const auto &f : files) {
        out << f.string() << '\n';
    }
    return kOk;
}

} // namespace detail

/// Runs the CLI on `args` (args[0] is the program name).
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    using namespace detail;
    CLI::App app{"Device-independent quantum random number generation via the CHSH game"};
    app.name("dirng");
    app.require_subcommand(1);

    std::string default_out = ".";
    if (const char *env = std::getenv(kOutDirEnv); env && *env) {
        default_out = env;
    }

    PlayOptions play;
    play.out_dir = default_out;
    auto *p = app.add_subcommand("play", "Play a certified CHSH experiment");
    p->add_option("--rounds", play.rounds, "Rounds of the game")->check(CLI::PositiveNumber);
    p->add_option("--shots", play.shots, "Shots per round")->check(CLI::PositiveNumber);
    auto *lambda_opt =
        p->add_option("--lambda", play.lambda, "Depolarizing weight")->check(CLI::Range(0.0, 1.0));
    auto *profile_opt = p->add_option("--profile", play.profile, "Device profile name");
    lambda_opt->excludes(profile_opt);
    p->add_option("--profiles", play.profiles_file, "Device profiles JSON (default: built-in)")
        ->check(CLI::ExistingFile);
    p->add_option("--seed", play.seed, "Master seed");
    p->add_option("--out", play.out_dir, "Output directory")->envname(kOutDirEnv);
    p->add_option("--config", play.config, "Experiment config JSON")->check(CLI::ExistingFile);
    p->add_option("--efficiency", play.efficiency, "Per-party detection efficiency")
        ->check(CLI::Range(0.0, 1.0));
    p->add_flag("--report-all-events", play.report_all_events,
                "Also report the win fraction over all shots");
    p->add_flag("--reuse-state", play.reuse_state,
                "Carry one generator across rounds instead of a fresh one per round");
    p->add_flag("--shared-inputs", play.shared_inputs, "Draw x and y from a single source");
    p->add_option("--replay-x", play.replay_x, "Counts records feeding Alice's inputs")
        ->check(CLI::ExistingFile);
    p->add_option("--replay-y", play.replay_y, "Counts records feeding Bob's inputs")
        ->check(CLI::ExistingFile);
    p->add_option("--threshold-z", play.threshold_z, "Significance threshold")
        ->check(CLI::PositiveNumber);
    p->add_option("--threads", play.threads, "Worker threads")->check(CLI::PositiveNumber);

    CertifyOptions cert;
    auto *c = app.add_subcommand("certify", "Certify a rounds CSV");
    c->add_option("--in", cert.in, "rounds.csv")->required()->check(CLI::ExistingFile);
    c->add_option("--out", cert.out, "Certificate JSON (default: stdout)");
    c->add_option("--threshold-z", cert.threshold_z, "Significance threshold")
        ->check(CLI::PositiveNumber);

    QrngOptions qrng;
    qrng.out = (std::filesystem::path(default_out) / "qrng").string();
    auto *q = app.add_subcommand("qrng", "Generate Hadamard or parity QRNG streams");
    q->add_option("--mode", qrng.mode, "hadamard | parity")
        ->required()
        ->check(CLI::IsMember({"hadamard", "parity"}));
    q->add_option("--qubits", qrng.qubits, "Qubits")->check(CLI::Range(1, kDefaultQubitCap));
    q->add_option("--shots", qrng.shots, "Shots")->check(CLI::PositiveNumber);
    q->add_option("--seed", qrng.seed, "Seed");
    q->add_option("--out", qrng.out,
                  "Output path prefix; writes PREFIX.bin, PREFIX.txt, PREFIX.json");

    ExtractOptions ext;
    auto *e = app.add_subcommand("extract", "Debias or hash a bit stream");
    e->add_option("--method", ext.method, "von-neumann | toeplitz")
        ->required()
        ->check(CLI::IsMember({"von-neumann", "toeplitz"}));
    e->add_option("--in", ext.in, "Input bits (.txt text, otherwise packed)")
        ->required()
        ->check(CLI::ExistingFile);
    e->add_option("--out", ext.out, "Output bits (.txt text, otherwise packed)")->required();
    e->add_option("--bits", ext.bits, "Use only the first N input bits");
    e->add_option("--out-len", ext.out_len, "Toeplitz output length")->check(CLI::NonNegativeNumber);
    auto *rate_opt = e->add_option("--min-entropy-rate", ext.min_entropy_rate,
                                   "Min-entropy per input bit")
                         ->check(CLI::Range(0.0, 1.0));
    e->add_option("--certificate", ext.certificate, "Take the rate from a certificate JSON")
        ->check(CLI::ExistingFile)
        ->excludes(rate_opt);
    e->add_option("--margin", ext.margin, "Security margin in bits")->check(CLI::NonNegativeNumber);
    auto *seed_file = e->add_option("--seed-file", ext.seed_file, "Toeplitz seed bits")
                          ->check(CLI::ExistingFile);
    e->add_option("--toeplitz-seed", ext.toeplitz_seed, "Generate Toeplitz seed bits from this seed")
        ->excludes(seed_file);

    TestOptions test;
    auto *t = app.add_subcommand("test", "Run the statistical test battery");
    t->add_option("--in", test.in, "Input bits (.txt text, otherwise packed)")
        ->required()
        ->check(CLI::ExistingFile);
    t->add_option("--tests", test.tests, "monobit,block_frequency,runs")
        ->delimiter(',')
        ->check(CLI::IsMember({"monobit", "block_frequency", "runs"}));
    t->add_option("--block-len", test.block_len, "Block length for block_frequency")
        ->check(CLI::PositiveNumber);
    t->add_option("--bits", test.bits, "Use only the first N bits");
    t->add_option("--json", test.json_out, "Also write the report JSON here");

    FitOptions fit;
    auto *f = app.add_subcommand("fit-noise", "Fit the depolarizing weight to a win probability");
    auto *target_opt = f->add_option("--target", fit.target, "Average win probability");
    f->add_option("--profile", fit.profile, "Device profile name")->excludes(target_opt);
    f->add_option("--profiles", fit.profiles_file, "Device profiles JSON (default: built-in)")
        ->check(CLI::ExistingFile);

    ReportOptions rep;
    rep.out_dir = default_out;
    auto *r = app.add_subcommand("report", "Write figure data files from a rounds CSV");
    r->add_option("--in", rep.in, "rounds.csv")->required()->check(CLI::ExistingFile);
    r->add_option("--out", rep.out_dir, "Output directory")->envname(kOutDirEnv);
    r->add_option("--device", rep.device, "Device label for the summary");

    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*p) {
            return cmd_play(play, *p, out);
        }
        if (*c) {
            return cmd_certify(cert, out);
        }
        if (*q) {
            return cmd_qrng(qrng, out);
        }
        if (*e) {
            return cmd_extract(ext, out);
        }
        if (*t) {
            return cmd_test(test, out);
        }
        if (*f) {
            return cmd_fit(fit, out);
        }
        if (*r) {
            return cmd_report(rep, out);
        }
    } catch (const IoError &ex) {
        err << "error: " << ex.what() << '\n';
        return kIoError;
    } catch (const FormatError &ex) {
        err << "error: " << ex.what() << '\n';
        return kDataFormat;
    } catch (const IntegrityError &ex) {
        err << "error: " << ex.what() << '\n';
        return kDataFormat;
    } catch (const DepletedSourceError &ex) {
        err << "error: " << ex.what() << '\n';
        return kDataFormat;
    } catch (const LengthError &ex) {
        err << "error: " << ex.what() << '\n';
        return kDataFormat;
    } catch (const Error &ex) {
        err << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error &ex) {
        err << "error: " << ex.what() << '\n';
        return kIoError;
    }
    return kUsage;
}

} // namespace dirng::cli
