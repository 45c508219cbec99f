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

namespace mmimo {

struct LinkBudget
{
    double tx_power = 1.0;  // rho
    double noise_var = 1.0; // sigma_n^2

    static LinkBudget from_snr_db(double snr_db) { return {1.0, 1.0 / db_to_linear(snr_db)}; }
    // Pre-processing SNR rho / sigma_n^2 (linear).
    double snr() const { return tx_power / noise_var; }
    void validate() const;
};

enum class TrainingMode
{
    ul_tdd,
    dl_fdd,
};

struct TrainingConfig
{
    int length = 1; // training symbols t
    TrainingMode mode = TrainingMode::ul_tdd;
};

struct ChannelEstimate
{
    CVec h_hat;
    double per_coeff_noise_var = 0.0;
};

// How ls_estimate produces the estimate. Both give the same distribution:
// synthesis builds Y_t = sqrt(rho) h p + N and correlates with the pilot,
// the shortcut adds CN(0, sigma^2 / (t rho)) noise directly.
enum class LsMethod
{
    noise_shortcut,
    pilot_synthesis,
};

// Unit-modulus chirp of length t; p p^H = t.
CVec pilot_sequence(int length);

ChannelEstimate ls_estimate(const ChannelRealization &h, const TrainingConfig &cfg,
                            const LinkBudget &budget, Rng &rng,
                            LsMethod method = LsMethod::noise_shortcut);

// Nested training noise for common-random-number sweeps over t: the estimate
// for length t uses the first t noise columns, so sweeping t perturbs the
// same draws instead of fresh ones.
class NestedTrainingNoise
{
  public:
    NestedTrainingNoise(Eigen::Index num_antennas, int max_length, Rng &rng);

    int max_length() const { return static_cast<int>(prefix_.cols()); }
    ChannelEstimate estimate(const ChannelRealization &h, int length, const LinkBudget &budget) const;

  private:
    CMat prefix_; // column t-1 holds the sum of the first t unit-variance noise columns
};

// Projects the estimate onto span(V), discarding noise outside the channel subspace.
ChannelEstimate sv_refine(const ChannelEstimate &est, const CorrelationSpectrum &spec);

struct FddFeedback
{
    CVec beta_hat; // estimated coefficient per singular vector, strongest first
    int num_svs = 0;
};

// Symbols charged to the frame for FDD CSI: N_s DL pilots plus N_s UL feedback.
inline int fdd_overhead_symbols(int num_svs) { return 2 * num_svs; }

// DL training along the N_s strongest eigen-directions with analog feedback.
// Each coefficient carries DL pilot noise and UL feedback noise, both of
// variance sigma^2 / rho. Noise is drawn per coefficient in order, so for a
// fixed stream a smaller N_s yields a prefix of the larger result.
FddFeedback fdd_train_feedback(const ChannelRealization &h_dl, const CorrelationSpectrum &spec,
                               int num_svs, const LinkBudget &budget, Rng &rng);

} // namespace mmimo
