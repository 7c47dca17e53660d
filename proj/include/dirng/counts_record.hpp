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
 * Execution result interchange record (counts map plus optional per-shot
 * memory), written by the simulator and read back by the replay backend.
 *
 * JSON layout:
 *
 *     {"format_version": 1,
 *      "shots": 1000,
 *      "counts": {"00": 430, "11": 570},
 *      "memory": ["00", "11", ...] | null,
 *      "metadata": {...}}
 *
 * Bitstring keys put qubit 0 in the leftmost character.
 */

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirng/errors.hpp"

namespace dirng {

inline constexpr int kFormatVersion = 1;

struct CountsRecord {
    std::int64_t shots = 0;
    std::map<std::string, std::int64_t> counts;
    std::optional<std::vector<std::string>> memory;
    nlohmann::json metadata = nlohmann::json::object();

    /// Width of the bitstring keys; 0 for an empty record.
    std::size_t width() const {
        if (!counts.empty()) {
            return counts.begin()->first.size();
        }
        if (memory && !memory->empty()) {
            return memory->front().size();
        }
        return 0;
    }

    std::int64_t count(const std::string &key) const {
        const auto it = counts.find(key);
        return it == counts.end() ? 0 : it->second;
    }

    /// Throws FormatError on malformed keys and IntegrityError when the
    /// counts, memory and shots totals disagree.
    void validate() const {
        if (shots < 1) {
            throw FormatError("counts record: shots must be >= 1");
        }
        const std::size_t n = width();
        std::int64_t total = 0;
        for (const auto &[key, value] : counts) {
            if (key.empty() || key.size() != n ||
                key.find_first_not_of("01") != std::string::npos) {
                throw FormatError("counts record: bad outcome key '" + key + "'");
            }
            if (value < 0) {
                throw FormatError("counts record: negative count for '" + key + "'");
            }
            total += value;
        }
        if (total != shots) {
            throw IntegrityError("counts record: counts sum to " +
                                 std::to_string(total) + " but shots = " +
                                 std::to_string(shots));
        }
        if (memory) {
            if (static_cast<std::int64_t>(memory->size()) != shots) {
                throw IntegrityError("counts record: memory holds " +
                                     std::to_string(memory->size()) +
                                     " outcomes but shots = " + std::to_string(shots));
            }
            std::map<std::string, std::int64_t> tally;
            for (const auto &outcome : *memory) {
                ++tally[outcome];
            }
            if (tally != counts) {
                throw IntegrityError("counts record: memory does not tally to counts");
            }
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format_version"] = kFormatVersion;
        j["shots"] = shots;
        j["counts"] = counts;
        j["memory"] = memory ? nlohmann::json(*memory) : nlohmann::json(nullptr);
        j["metadata"] = metadata;
        return j;
    }

    static CountsRecord from_json(const nlohmann::json &j) {
        CountsRecord r;
        try {
            if (!j.is_object()) {
                throw FormatError("counts record: expected a JSON object");
            }
            if (j.contains("format_version") &&
                j.at("format_version").get<int>() > kFormatVersion) {
                throw FormatError("counts record: unsupported format_version");
            }
            r.shots = j.at("shots").get<std::int64_t>();
            for (const auto &[key, value] : j.at("counts").items()) {
                r.counts[key] = value.get<std::int64_t>();
            }
            if (j.contains("memory") && !j.at("memory").is_null()) {
                r.memory = j.at("memory").get<std::vector<std::string>>();
            }
            if (j.contains("metadata")) {
                r.metadata = j.at("metadata");
                if (!r.metadata.is_object()) {
                    throw FormatError("counts record: metadata must be an object");
                }
            }
        } catch (const nlohmann::json::exception &e) {
            throw FormatError(std::string("counts record: ") + e.what());
        }
        r.validate();
        return r;
    }

    static CountsRecord load(const std::string &path) {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open counts record '" + path + "'");
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error &e) {
            throw FormatError("counts record '" + path + "': " + e.what());
        }
        return from_json(j);
    }

    bool operator==(const CountsRecord &) const = default;
};

} // namespace dirng
