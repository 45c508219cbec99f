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

#include "mmimo/precoding.hpp"

#include <cmath>
#include <string>

namespace mmimo {

namespace {

constexpr double kDegenerateNorm = 1e-300;

void fix_global_phase(CVec &w)
{
    const double tol = 1e-12 * w.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < w.size(); ++i)
    {
        const double mag = std::abs(w(i));
        if (mag > tol)
        {
            w *= std::conj(w(i)) / mag;
            w(i) = mag;
            return;
        }
    }
}

Precoder matched_filter(const CVec &g, PrecoderScheme scheme, const char *what)
{
    const double n = g.norm();
    if (!(n > kDegenerateNorm) || !std::isfinite(n))
        throw DegenerateInput(std::string(what) + ": estimate has zero norm");
    Precoder p{g.conjugate() / n, scheme};
    fix_global_phase(p.w);
    return p;
}

} // namespace

Precoder mrt(const ChannelEstimate &est) { return matched_filter(est.h_hat, PrecoderScheme::mrt, "mrt"); }

Precoder sv_precoder(const ChannelEstimate &est, const CorrelationSpectrum &spec)
{
    if (spec.rank() < 1)
        throw ConfigError("sv_precoder needs a correlation spectrum of rank >= 1");
    const CVec projected = spec.V * (spec.V.adjoint() * est.h_hat);
    if (projected.norm() <= 1e-12 * std::max(est.h_hat.norm(), kDegenerateNorm))
        throw DegenerateInput("sv_precoder: projected estimate vanishes");
    return matched_filter(projected, PrecoderScheme::sv, "sv_precoder");
}

Precoder fdd_precoder(const FddFeedback &fb, const CorrelationSpectrum &spec)
{
    if (fb.num_svs < 1 || fb.num_svs > spec.rank())
        throw ConfigError("fdd_precoder: feedback size does not match the spectrum");
    const CVec g = spec.V.leftCols(fb.num_svs) * fb.beta_hat.head(fb.num_svs);
    return matched_filter(g, PrecoderScheme::fdd, "fdd_precoder");
}

std::pair<Precoder, Precoder> zf_pair(const ChannelEstimate &est1, const ChannelEstimate &est2)
{
    if (est1.h_hat.size() != est2.h_hat.size())
        throw ConfigError("zf_pair: estimates have different dimensions");
    CMat H(est1.h_hat.size(), 2);
    H.col(0) = est1.h_hat;
    H.col(1) = est2.h_hat;

    Eigen::JacobiSVD<CMat> svd(H);
    const RVec s = svd.singularValues();
    const double cond = s(1) > 0.0 ? s(0) / s(1) : INFINITY;
    if (!(cond < kZfMaxCondition))
        throw IllConditioned("zf_pair: channel estimates are (nearly) collinear", cond);

    // H^T conj(H) is the conjugated Gram matrix; solve rather than invert.
    const CMat gram = (H.adjoint() * H).conjugate();
    const CMat W = gram.transpose().partialPivLu().solve(H.conjugate().transpose()).transpose();

    Precoder w1{W.col(0).normalized(), PrecoderScheme::zf};
    Precoder w2{W.col(1).normalized(), PrecoderScheme::zf};
    fix_global_phase(w1.w);
    fix_global_phase(w2.w);
    return {std::move(w1), std::move(w2)};
}

SnrSample snr_dl(const ChannelRealization &h, const Precoder &w, const LinkBudget &budget)
{
    const cplx g = h.h.transpose() * w.w;
    return {budget.snr() * std::norm(g)};
}

SnrSample sinr_two_user(const ChannelRealization &h1, const Precoder &w1, const Precoder &w2,
                        const LinkBudget &budget, double power_split)
{
    if (!(power_split > 0.0 && power_split < 1.0))
        throw ConfigError("power_split must lie in (0, 1)");
    const double p = power_split * budget.tx_power;
    const double signal = p * std::norm(cplx(h1.h.transpose() * w1.w));
    const double interference = p * std::norm(cplx(h1.h.transpose() * w2.w));
    return {signal / (budget.noise_var + interference)};
}

} // namespace mmimo
