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

#include "mmimo/precoding.hpp"
#include "mmimo/stats.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mmimo {

// A DL frame of N symbols carrying b payload bits. Latency in milliseconds
// follows from the numerology: 14 symbols per slot, 2^(scs/15 kHz) slots per ms.
struct FrameConfig
{
    int total_symbols = 28;
    int payload_bits = 144;
    int scs_khz = 60;
    int symbols_per_slot = 14;
    int guard_symbols = 1; // per UL/DL switch, TDD only

    void validate() const;
    double latency_ms() const { return latency_ms_for(total_symbols); }
    double latency_ms_for(int symbols) const;
};

double slots_per_ms(int scs_khz);

struct RateSpec
{
    double rate = 0.0;     // bits per complex data symbol
    double gamma_th = 0.0; // 2^R - 1
};

RateSpec rate_for_bits(int payload_bits, int data_symbols);
// R = b / (N - overhead).
RateSpec rate_for(const FrameConfig &frame, int overhead_symbols);

enum class Scheme
{
    tdd_mrt,
    tdd_sv,
    fdd,
    perfect_csi,
};

std::string to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

enum class ChannelKind
{
    sparse,
    iid,
};

struct ChannelConfig
{
    ArrayConfig array;
    ClusterModel cluster;
    ChannelKind kind = ChannelKind::sparse;
    // Draw one path set for the whole experiment instead of one per trial.
    bool freeze_paths = false;

    void validate() const;
};

struct McOptions
{
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    int workers = 0; // 0 = auto
};

struct OutageResult
{
    double p_outage = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t outages = 0;
    Interval ci95;

    static OutageResult from_counts(std::uint64_t outages, std::uint64_t trials);
    double half_width() const { return 0.5 * (ci95.hi - ci95.lo); }
};

// Symbols consumed by CSI acquisition. `param` is the UL training length t for
// TDD and the number of estimated singular vectors N_s for FDD.
int overhead_symbols(Scheme scheme, int param, const FrameConfig &frame);

// Feasible training parameters for a scheme: every value leaves at least one
// data symbol; FDD is further bounded by the number of paths (and M).
std::vector<int> feasible_params(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame);

// Per-trial SNR for a list of training parameters with common random numbers:
// one channel draw and one nested noise realization serve every parameter.
// Trials of all schemes share the path and channel draws for a given seed.
class LinkSampler
{
  public:
    LinkSampler(Scheme scheme, ChannelConfig channel, LinkBudget budget, std::vector<int> params,
                std::uint64_t seed);

    const std::vector<int> &params() const { return params_; }
    void sample(std::uint64_t trial, std::vector<double> &gammas) const;

  private:
    Scheme scheme_;
    ChannelConfig channel_;
    LinkBudget budget_;
    std::vector<int> params_;
    std::uint64_t seed_;
    bool has_frozen_ = false;
    PathSet frozen_paths_;
    CorrelationSpectrum frozen_spectrum_;
};

OutageResult outage_mc(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame, int param,
                       const LinkBudget &budget, const McOptions &opts);

struct SweepPoint
{
    int param = 0;
    double mean_gamma = 0.0;
    double rsd_gamma = 0.0;
    OutageResult outage;
};

std::vector<SweepPoint> sweep_training(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame,
                                       const std::vector<int> &params, const LinkBudget &budget,
                                       const McOptions &opts);

struct BestTraining
{
    int param = 0;
    OutageResult outage;
};

// argmin of p_outage over the candidates, ties toward the smaller parameter.
BestTraining pick_best(const std::vector<SweepPoint> &points);

BestTraining best_training(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame,
                           const LinkBudget &budget, const McOptions &opts);
BestTraining best_training(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame,
                           const std::vector<int> &candidates, const LinkBudget &budget, const McOptions &opts);

struct LatencyPoint
{
    Scheme scheme = Scheme::tdd_mrt;
    int total_symbols = 0;
    double latency_ms = 0.0;
    int best_param = 0;
    OutageResult outage;
    double reliability() const { return 1.0 - outage.p_outage; }
};

// Reliability after optimizing the training per frame length. One Monte-Carlo
// pass per scheme covers every frame length, so curves share random numbers.
std::vector<LatencyPoint> latency_reliability_curve(const std::vector<Scheme> &schemes, const ChannelConfig &channel,
                                                    const FrameConfig &frame, const std::vector<int> &frame_lengths,
                                                    const LinkBudget &budget, const McOptions &opts);

// Two devices served either together (SDM with ZF on LS estimates, power split
// between streams) or one after the other (TDM with SV-refined MRT).
struct TwoUserConfig
{
    ChannelConfig channel;
    LinkBudget budget;
    FrameConfig frame; // payload, numerology and guard; total_symbols is swept
    std::vector<int> system_latencies;
    double power_split = 0.5;
    double target_outage = 1e-3;
    // Largest training length scanned per device (TDM) or pilot length (SDM).
    int max_training = 16;
};

struct TwoUserRow
{
    std::string scheme; // "sdm" or "tdm"
    int device = 1;
    int latency_symbols = 0;
    int system_latency = 0;
    int best_training = 0;
    OutageResult outage;
};

struct TwoUserSummary
{
    std::vector<TwoUserRow> rows;
    // Smallest system latency at which both devices meet target_outage, -1 if none.
    int sdm_system_latency = -1;
    int tdm_system_latency = -1;
    double sdm_avg_device_latency = 0.0;
    double tdm_avg_device_latency = 0.0;
};

// TDM split of N symbols: device 1 gets ceil(N/2), device 2 the rest and
// finishes at N.
inline int tdm_first_share(int n) { return (n + 1) / 2; }

TwoUserSummary tdm_vs_sdm(const TwoUserConfig &cfg, const McOptions &opts);

} // namespace mmimo
