// SPDX-License-Identifier: Apache-2.0
//
// mmimo-iot: Monte-Carlo simulation of massive MIMO links for URLLC and mMTC
// Copyright (C) 2026 mmimo-iot contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "mmimo/random_access.hpp"
#include "mmimo/result_table.hpp"
#include "mmimo/types.hpp"
#include "mmimo/urllc.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mmimo {

inline constexpr const char *kToolName = "mmimo";
inline constexpr const char *kToolVersion = "1.0.0";

// A configuration problem tied to a dotted key path such as "frame.payload_bits".
class ValidationError : public ConfigError
{
  public:
    ValidationError(const std::string &field, const std::string &message)
        : ConfigError(field + ": " + message), field_(field)
    {
    }
    const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

enum class Experiment
{
    snr_training,
    outage_training,
    tdm_vs_sdm,
    fdd_ns_sweep,
    latency_reliability,
    ra_crowded,
    coded_ra,
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string &s);
const std::vector<Experiment> &all_experiments();

// Flat map of dotted keys to values. Every key belongs to a fixed schema with
// defaults; unknown keys are rejected on input. Precedence, lowest first:
// schema defaults, recipe defaults, config file, --set overrides, dedicated
// command-line flags.
class ExperimentConfig
{
  public:
    ExperimentConfig(); // schema defaults

    static ExperimentConfig from_ini(std::istream &in, const std::string &source = "<config>");
    static ExperimentConfig from_ini_file(const std::string &path);
    // Overlays the file on an existing configuration.
    void merge_ini(std::istream &in, const std::string &source = "<config>");

    void set(const std::string &key, const std::string &value);
    // "key=value"
    void set_assignment(const std::string &assignment);

    const std::string &get(const std::string &key) const;
    const std::map<std::string, std::string> &values() const { return values_; }

    std::int64_t get_int(const std::string &key) const;
    std::uint64_t get_uint(const std::string &key) const;
    double get_real(const std::string &key) const;
    bool get_bool(const std::string &key) const;
    std::vector<int> get_int_list(const std::string &key) const;
    std::vector<double> get_real_list(const std::string &key) const;
    std::vector<std::string> get_string_list(const std::string &key) const;

    Experiment experiment() const;
    // 0 means automatic: MMIMO_WORKERS if set, else hardware concurrency.
    int workers() const;

    // Checks every key the experiment reads, plus the module preconditions.
    void validate() const;

    // "key = value" lines in key order, without workers; the hash input.
    std::string canonical() const;
    std::uint64_t hash() const { return fnv1a64(canonical()); }
    std::string to_ini() const;

  private:
    std::map<std::string, std::string> values_;
};

struct KeyInfo
{
    std::string key;
    std::string default_value;
    std::string help;
};

const std::vector<KeyInfo> &config_schema();

struct Recipe
{
    std::string name;
    std::string description;
    ExperimentConfig config;
};

const std::vector<Recipe> &recipes();
const Recipe &find_recipe(const std::string &name); // throws ValidationError

// Typed views used by run(); each throws ValidationError with field paths.
ChannelConfig channel_config(const ExperimentConfig &cfg);
FrameConfig frame_config(const ExperimentConfig &cfg);
LinkBudget link_budget(const ExperimentConfig &cfg);
RaGeometry ra_geometry(const ExperimentConfig &cfg);
RaSimConfig ra_sim_config(const ExperimentConfig &cfg);
CodedRaConfig coded_ra_config(const ExperimentConfig &cfg);
TwoUserConfig two_user_config(const ExperimentConfig &cfg);

// Half-width target for trial escalation: max(0.1 p, 1e-5).
bool precise_enough(const OutageResult &r);

// Validates, then dispatches. Deterministic for a fixed configuration: only
// the wall_time_s metadata entry varies between runs.
ResultTable run(const ExperimentConfig &cfg);

// Re-hash of the config.* metadata entries of an emitted table.
std::uint64_t rehash_metadata(const ResultTable &table);

} // namespace mmimo
