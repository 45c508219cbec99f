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

#include "mmimo/estimation.hpp"

#include <utility>

namespace mmimo {

enum class PrecoderScheme
{
    mrt,
    sv,
    zf,
    fdd,
};

// Unit-norm DL beamformer. The received sample is h^T w, so a matched filter
// for estimate g is w = conj(g) / ||g||. The global phase is fixed so the first
// non-negligible entry is real and positive.
struct Precoder
{
    CVec w;
    PrecoderScheme scheme = PrecoderScheme::mrt;
};

struct SnrSample
{
    double gamma = 0.0; // linear SNR or SINR
};

// Conjugate matched filter on the raw estimate.
Precoder mrt(const ChannelEstimate &est);

// Matched filter on the estimate projected onto span(V).
Precoder sv_precoder(const ChannelEstimate &est, const CorrelationSpectrum &spec);

// Reconstructs the beam from fed-back eigen-coefficients: w = conj(V_Ns beta) / ||beta||.
Precoder fdd_precoder(const FddFeedback &fb, const CorrelationSpectrum &spec);

// Condition number of [h1 h2] above which zf_pair refuses to invert.
inline constexpr double kZfMaxCondition = 1e8;

// Columns of conj(H) (H^T conj(H))^-1 with H = [h1_hat h2_hat], unit-normalized;
// w1 nulls h2_hat and w2 nulls h1_hat.
std::pair<Precoder, Precoder> zf_pair(const ChannelEstimate &est1, const ChannelEstimate &est2);

// gamma = (rho / sigma^2) |h^T w|^2.
SnrSample snr_dl(const ChannelRealization &h, const Precoder &w, const LinkBudget &budget);

// SINR of device 1 when a fraction `power_split` of rho goes to each stream:
// split rho |h1^T w1|^2 / (sigma^2 + split rho |h1^T w2|^2).
SnrSample sinr_two_user(const ChannelRealization &h1, const Precoder &w1, const Precoder &w2,
                        const LinkBudget &budget, double power_split = 0.5);

} // namespace mmimo
