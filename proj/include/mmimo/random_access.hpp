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

#include "mmimo/channel.hpp"
#include "mmimo/random.hpp"
#include "mmimo/stats.hpp"
#include "mmimo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mmimo {

// Devices uniform on an annulus around the base station. Large-scale fading
// is normalized so that beta = 1 at the cell edge, and the common uplink power
// rho puts the cell-edge receive SNR at edge_snr_db (noise variance 1).
struct RaGeometry
{
    double r_min = 35.0;
    double r_max = 250.0;
    double pathloss_exponent = 3.8;
    double edge_snr_db = 0.0;
    double shadowing_db = 0.0; // log-normal standard deviation, 0 disables
    double noise_var = 1.0;

    void validate() const;
};

struct RaPopulation
{
    int total_devices = 0;        // K_0
    double activation_prob = 0.0; // P_a per access block
    std::vector<double> beta;     // large-scale fading, > 0
    std::vector<double> rho;      // uplink transmit power, > 0
    double noise_var = 1.0;

    void validate() const;
    double rx_power(int k) const { return rho[k] * beta[k]; }
};

RaPopulation draw_population(int total_devices, double activation_prob, const RaGeometry &geometry,
                             Rng &rng);

struct PilotPool
{
    int size = 10; // P_p mutually orthogonal pilots

    void validate() const;
};

enum class RaMode
{
    asymptotic, // devices learn the colliding power exactly
    finite_m,   // devices estimate it from an M-antenna downlink pilot
};

// hard: retransmit iff rho*beta > alpha_hat / 2.
// soft: retransmit with probability min(1, (scale * rho*beta / alpha_hat)^exponent).
struct DecisionRule
{
    enum class Kind
    {
        hard,
        soft,
    };
    Kind kind = Kind::hard;
    double exponent = 3.0;
    double scale = 2.0;

    static DecisionRule hard() { return {}; }
    static DecisionRule soft(double exponent = 3.0, double scale = 2.0) { return {Kind::soft, exponent, scale}; }
    void validate() const;
    double retransmit_probability(double own_power, double alpha_hat) const;
};

enum class DeviceOutcome
{
    granted,        // sole retransmitter on its pilot
    lost,           // silent, or retransmitted alongside another device
    false_negative, // held a strict majority of the true pilot power but stayed silent
};

std::string to_string(DeviceOutcome o);

struct SucreOptions
{
    RaMode mode = RaMode::asymptotic;
    DecisionRule rule;
    int num_antennas = 64; // used in finite_m mode only
    double dl_power = 1.0; // downlink pilot power q, relative to noise_var

    void validate() const;
};

struct SucreBlockResult
{
    std::vector<int> pilot;               // chosen pilot per active device
    std::vector<DeviceOutcome> outcome;   // per active device, same order as input
    std::vector<int> contenders;          // per pilot
    std::vector<int> retransmitters;      // per pilot
    int collided_pilots = 0;              // pilots with >= 2 contenders
    int resolved_collisions = 0;          // collided pilots with exactly one retransmitter
};

// Phase 1 pilot choice followed by the contention of every pilot.
SucreBlockResult sucre_block(const std::vector<int> &active, const RaPopulation &pop, const PilotPool &pool,
                             const SucreOptions &opt, Rng &rng);

// Same contention with a caller-fixed pilot per active device.
SucreBlockResult sucre_block_with_pilots(const std::vector<int> &active, const std::vector<int> &pilots,
                                         const RaPopulation &pop, const PilotPool &pool,
                                         const SucreOptions &opt, Rng &rng);

// Colliding-power estimate of each contender on one pilot.
std::vector<double> estimate_alpha(const std::vector<int> &contenders, const RaPopulation &pop,
                                   const SucreOptions &opt, Rng &rng);

enum class RaProtocol
{
    baseline,
    sucre_hard,
    sucre_soft,
};

std::string to_string(RaProtocol p);
RaProtocol protocol_from_string(const std::string &s);

struct RaSimConfig
{
    int max_attempts = 10;
    double retry_prob = 0.5; // per-block retry probability of a backlogged device
    int blocks = 2000;       // measured blocks per replication
    int warmup_blocks = 200;
    int replications = 8; // independent chains, each with its own substream
    int batches = 10;     // batch-means batches per replication
    SucreOptions sucre;
    DecisionRule soft_rule = DecisionRule::soft();

    void validate() const;
};

struct RaMetrics
{
    // Mean attempts per finished packet. 0 when no packet finished.
    double avg_attempts = 0.0;
    double avg_attempts_stderr = 0.0; // batch means
    // Fraction of access attempts that did not obtain a grant.
    double failure_prob = 0.0;
    // Fraction of finished packets dropped after max_attempts.
    double drop_prob = 0.0;
    // Collided pilots resolved to a single retransmitter.
    double resolved_collision_frac = 0.0;

    std::uint64_t packets = 0;
    std::uint64_t attempts = 0;
    std::uint64_t failed_attempts = 0;
    std::uint64_t collisions = 0;
    std::uint64_t resolved = 0;
};

RaMetrics simulate_ra(const RaPopulation &pop, const PilotPool &pool, RaProtocol protocol,
                      const RaSimConfig &cfg, std::uint64_t seed, int workers = 0);

// Collision statistics of independent single blocks without retransmissions.
struct CollisionStats
{
    std::uint64_t blocks = 0;
    std::uint64_t collisions = 0;
    std::uint64_t resolved = 0;
    std::uint64_t false_negatives = 0;
    std::uint64_t multi_winner = 0; // collided pilots with >= 2 retransmitters

    double resolved_frac() const { return collisions ? static_cast<double>(resolved) / collisions : 0.0; }
    void merge(const CollisionStats &o);
};

CollisionStats sucre_collision_stats(const RaPopulation &pop, const PilotPool &pool, const SucreOptions &opt,
                                     std::uint64_t blocks, std::uint64_t seed, int workers = 0);

// ---------------------------------------------------------------- pilot RA

enum class SinrCap
{
    none,   // interference-free slots give infinite SINR
    finite, // SINR <= rho*beta*M / noise_var
};

struct PilotRaConfig
{
    int num_slots = 8; // L
    SinrCap cap = SinrCap::finite;
    int num_antennas = 64;

    void validate() const;
};

// Per-device rate (1/L) sum_l log2(1 + SINR_{k,l}) with a fresh pilot per slot.
std::vector<double> pilot_ra_rate(const std::vector<double> &beta, const std::vector<double> &rho,
                                  double noise_var, const PilotPool &pool, const PilotRaConfig &cfg, Rng &rng);

// Same with caller-fixed pilots[k][l].
std::vector<double> pilot_ra_rate_with_pilots(const std::vector<double> &beta, const std::vector<double> &rho,
                                              double noise_var, const std::vector<std::vector<int>> &pilots,
                                              const PilotRaConfig &cfg);

// ---------------------------------------------------------------- coded RA

enum class DecodeModel
{
    genie_singleton,
    sinr_threshold,
};

enum class PilotPattern
{
    per_slot,  // fresh pilot for every transmission
    per_frame, // one pilot per device for the whole frame
};

std::string to_string(DecodeModel m);
DecodeModel decode_model_from_string(const std::string &s);

struct CodedRaConfig
{
    int num_slots = 4; // L
    double slot_activation_prob = 0.5;
    DecodeModel decode_model = DecodeModel::genie_singleton;
    PilotPattern pattern = PilotPattern::per_slot;
    double sinr_threshold = 1.0; // gamma_th for sinr_threshold
    int num_antennas = 64;

    void validate() const;
};

// pilot[d][l] is the pilot device d uses in slot l, or -1 when silent.
struct TransmissionPattern
{
    int num_slots = 0;
    int num_pilots = 0;
    std::vector<std::vector<int>> pilot;

    int num_devices() const { return static_cast<int>(pilot.size()); }
    void validate() const;
};

struct DecodeEvent
{
    int device;
    int slot;
    int pilot;
};

struct CodedRaResult
{
    std::vector<bool> decoded;       // per device
    std::vector<DecodeEvent> trace;  // SIC order
    int iterations = 0;              // sweeps until the fixed point

    int num_decoded() const;
};

// Per-device receive strengths for the SINR model. Empty for genie decoding.
struct CodedRaPowers
{
    std::vector<double> beta;
    std::vector<double> rho;
    double noise_var = 1.0;
};

// Deterministic SIC decoding of a fixed transmission pattern.
CodedRaResult coded_ra_decode(const TransmissionPattern &tx, const CodedRaConfig &cfg,
                              const CodedRaPowers &powers = {});

// Random transmission pattern for the active devices, then decoding.
TransmissionPattern draw_transmissions(int num_devices, const PilotPool &pool, const CodedRaConfig &cfg,
                                       Rng &rng);
CodedRaResult coded_ra_frame(const std::vector<int> &active, const RaPopulation &pop, const PilotPool &pool,
                             const CodedRaConfig &cfg, Rng &rng);

// Replays a trace on the pattern. Returns false if any event is not
// decodable at its point in the sequence or the final set differs.
bool replay_trace(const TransmissionPattern &tx, const CodedRaConfig &cfg, const CodedRaResult &result,
                  const CodedRaPowers &powers = {});

} // namespace mmimo
