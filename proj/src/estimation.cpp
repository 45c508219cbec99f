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

#include "mmimo/estimation.hpp"

#include <cmath>
#include <string>

namespace mmimo {

void LinkBudget::validate() const
{
    if (!(tx_power > 0.0) || !std::isfinite(tx_power))
        throw ConfigError("budget.tx_power must be positive");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
        throw ConfigError("budget.noise_var must be positive");
}

CVec pilot_sequence(int length)
{
    if (length < 1)
        throw ConfigError("training length must be >= 1, got " + std::to_string(length));
    CVec p(length);
    for (int n = 0; n < length; ++n)
        p(n) = std::polar(1.0, kPi * n * n / length);
    return p;
}

ChannelEstimate ls_estimate(const ChannelRealization &h, const TrainingConfig &cfg,
                            const LinkBudget &budget, Rng &rng, LsMethod method)
{
    if (cfg.length < 1)
        throw ConfigError("training length must be >= 1, got " + std::to_string(cfg.length));
    if (cfg.mode != TrainingMode::ul_tdd)
        throw ConfigError("ls_estimate requires UL TDD training");

    const double t = cfg.length;
    ChannelEstimate est;
    est.per_coeff_noise_var = budget.noise_var / (t * budget.tx_power);

    if (method == LsMethod::noise_shortcut)
    {
        est.h_hat = h.h + complex_normal_vector(rng, h.h.size(), est.per_coeff_noise_var);
        return est;
    }

    // Y_t = sqrt(rho) h p + N, h_hat = Y_t p^H / (t sqrt(rho)).
    const CVec p = pilot_sequence(cfg.length);
    const double amp = std::sqrt(budget.tx_power);
    CMat Y = amp * h.h * p.transpose();
    for (int n = 0; n < cfg.length; ++n)
        Y.col(n) += complex_normal_vector(rng, h.h.size(), budget.noise_var);
    est.h_hat = Y * p.conjugate() / (t * amp);
    return est;
}

NestedTrainingNoise::NestedTrainingNoise(Eigen::Index num_antennas, int max_length, Rng &rng)
{
    if (max_length < 1)
        throw ConfigError("nested training noise needs max_length >= 1");
    prefix_.resize(num_antennas, max_length);
    CVec running = CVec::Zero(num_antennas);
    for (int n = 0; n < max_length; ++n)
    {
        running += complex_normal_vector(rng, num_antennas, 1.0);
        prefix_.col(n) = running;
    }
}

ChannelEstimate NestedTrainingNoise::estimate(const ChannelRealization &h, int length,
                                              const LinkBudget &budget) const
{
    if (length < 1 || length > max_length())
        throw ConfigError("training length " + std::to_string(length) + " outside nested range");
    ChannelEstimate est;
    est.per_coeff_noise_var = budget.noise_var / (length * budget.tx_power);
    est.h_hat = h.h + std::sqrt(budget.noise_var / budget.tx_power) / length * prefix_.col(length - 1);
    return est;
}

ChannelEstimate sv_refine(const ChannelEstimate &est, const CorrelationSpectrum &spec)
{
    if (spec.rank() == 0)
        throw ConfigError("sv_refine needs a correlation spectrum of rank >= 1");
    ChannelEstimate out;
    out.h_hat = spec.V * (spec.V.adjoint() * est.h_hat);
    out.per_coeff_noise_var = est.per_coeff_noise_var;
    return out;
}

FddFeedback fdd_train_feedback(const ChannelRealization &h_dl, const CorrelationSpectrum &spec,
                               int num_svs, const LinkBudget &budget, Rng &rng)
{
    if (num_svs < 1)
        throw ConfigError("FDD needs at least one singular vector, got " + std::to_string(num_svs));
    if (num_svs > spec.rank())
        throw ConfigError("FDD num_svs " + std::to_string(num_svs) + " exceeds correlation rank " +
                          std::to_string(spec.rank()));

    const double var = budget.noise_var / budget.tx_power;
    FddFeedback fb;
    fb.num_svs = num_svs;
    fb.beta_hat = spec.V.leftCols(num_svs).adjoint() * h_dl.h;
    for (int i = 0; i < num_svs; ++i)
    {
        const cplx dl_noise = complex_normal(rng, var);
        const cplx feedback_noise = complex_normal(rng, var);
        fb.beta_hat(i) += dl_noise + feedback_noise;
    }
    return fb;
}

} // namespace mmimo
