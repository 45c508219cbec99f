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

#include "mmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmimo {

void ArrayConfig::validate() const
{
    if (num_antennas < 1)
        throw ConfigError("array.num_antennas must be >= 1, got " + std::to_string(num_antennas));
}

void ClusterModel::validate() const
{
    if (num_paths < 1)
        throw ConfigError("channel.num_paths must be >= 1, got " + std::to_string(num_paths));
    if (!(decay_db >= 0.0) || !std::isfinite(decay_db))
        throw ConfigError("channel.decay_db must be a finite value >= 0");
    if (!(angle_max > angle_min))
        throw ConfigError("channel angle range is empty");
}

CVec steering_vector(const ArrayConfig &array, double angle)
{
    const int M = array.num_antennas;
    const double phase_step = kPi * std::sin(angle);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    CVec s(M);
    // Phase recurrence, re-anchored every 16 entries to bound rounding drift.
    const cplx step = std::polar(1.0, phase_step);
    for (int m = 0; m < M; ++m)
        s(m) = (m % 16 == 0) ? std::polar(scale, phase_step * m) : s(m - 1) * step;
    return s;
}

RVec exponential_power_profile(int num_paths, double decay_db, double total)
{
    if (num_paths < 1)
        throw ConfigError("power profile needs at least one path");
    RVec q(num_paths);
    if (num_paths == 1)
    {
        q(0) = total;
        return q;
    }
    // q_i = q_1 * ratio^(-(i-1)/(N_P-1)), so q_1 / q_NP is the decay ratio exactly.
    const double log_ratio = decay_db / 10.0 * std::log(10.0);
    const double c = log_ratio / (num_paths - 1);
    for (int i = 0; i < num_paths; ++i)
        q(i) = std::exp(-c * i);
    q *= total / q.sum();
    return q;
}

PathSet make_paths(const ArrayConfig &array, const RVec &angles, const RVec &powers)
{
    array.validate();
    if (angles.size() == 0 || angles.size() != powers.size())
        throw ConfigError("path angles and powers must be non-empty and of equal length");
    PathSet p;
    p.angles = angles;
    p.powers = powers;
    p.steering.resize(array.num_antennas, angles.size());
    for (Eigen::Index i = 0; i < angles.size(); ++i)
        p.steering.col(i) = steering_vector(array, angles(i));
    return p;
}

PathSet draw_paths(const ClusterModel &model, const ArrayConfig &array, Rng &rng)
{
    model.validate();
    array.validate();
    RVec angles(model.num_paths);
    for (int i = 0; i < model.num_paths; ++i)
        angles(i) = uniform_real(rng, model.angle_min, model.angle_max);
    const RVec q = exponential_power_profile(model.num_paths, model.decay_db,
                                             static_cast<double>(array.num_antennas));
    return make_paths(array, angles, q);
}

ChannelRealization realize_channel(const PathSet &paths, Rng &rng)
{
    CVec alpha(paths.num_paths());
    for (int i = 0; i < paths.num_paths(); ++i)
        alpha(i) = complex_normal(rng, paths.powers(i));
    return realize_channel(paths, alpha);
}

ChannelRealization realize_channel(const PathSet &paths, const CVec &coefficients)
{
    if (coefficients.size() != paths.num_paths())
        throw ConfigError("one fading coefficient per path is required");
    return {paths.steering * coefficients};
}

ChannelRealization realize_iid(const ArrayConfig &array, Rng &rng)
{
    array.validate();
    return {complex_normal_vector(rng, array.num_antennas, 1.0)};
}

CorrelationSpectrum correlation_spectrum(const PathSet &paths, bool with_covariance)
{
    // R = A A^H with A = S diag(sqrt(q)) = Q B. The eigenvectors of R are Q times
    // those of the small Hermitian matrix B B^H, and Q W is orthonormal by construction.
    const CMat A = paths.steering * paths.powers.cwiseSqrt().cast<cplx>().asDiagonal();
    const Eigen::Index M = A.rows();
    const Eigen::Index k = std::min(A.rows(), A.cols());

    Eigen::HouseholderQR<CMat> qr(A);
    const CMat B = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    CMat Q = CMat::Identity(M, k);
    Q.applyOnTheLeft(qr.householderQ());

    Eigen::SelfAdjointEigenSolver<CMat> es(B * B.adjoint());
    // Ascending order from the solver; flip to non-increasing.
    const RVec lam = es.eigenvalues().reverse().cwiseMax(0.0);
    const double floor = lam.size() > 0 ? kEigenvalueFloor * lam(0) : 0.0;
    Eigen::Index r = 0;
    while (r < lam.size() && lam(r) > 0.0 && lam(r) >= floor)
        ++r;

    CorrelationSpectrum spec;
    spec.V = Q * es.eigenvectors().rowwise().reverse().leftCols(r);
    spec.eigenvalues = lam.head(r);
    if (with_covariance)
        spec.R = A * A.adjoint();
    return spec;
}

} // namespace mmimo
