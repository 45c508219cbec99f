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

#include "mmimo/random.hpp"
#include "mmimo/types.hpp"

#include <vector>

namespace mmimo {

enum class ArrayGeometry
{
    ula_half_wavelength,
};

struct ArrayConfig
{
    int num_antennas = 64;
    ArrayGeometry geometry = ArrayGeometry::ula_half_wavelength;

    void validate() const;
};

// Sparse cluster environment: N_P paths whose mean powers decay exponentially
// so that strongest/weakest = decay_db.
struct ClusterModel
{
    int num_paths = 20;
    double decay_db = 10.0;
    double angle_min = -kPi / 2.0;
    double angle_max = kPi / 2.0;

    void validate() const;
};

struct PathSet
{
    RVec angles;   // radians, one per path
    RVec powers;   // mean path powers q_i, non-increasing, sum = M
    CMat steering; // M x N_P, unit-norm columns

    int num_antennas() const { return static_cast<int>(steering.rows()); }
    int num_paths() const { return static_cast<int>(steering.cols()); }
};

struct ChannelRealization
{
    CVec h;
};

// R = V diag(eigenvalues) V^H, eigenvalues sorted non-increasing.
struct CorrelationSpectrum
{
    CMat R;
    CMat V;
    RVec eigenvalues;

    int rank() const { return static_cast<int>(V.cols()); }
    // Orthogonal projector V V^H onto the channel subspace.
    CMat projector() const { return V * V.adjoint(); }
};

// Relative eigenvalue floor below which directions are discarded.
inline constexpr double kEigenvalueFloor = 1e-10;

// Unit-norm ULA steering vector, entry m = exp(j*pi*m*sin(theta)) / sqrt(M).
CVec steering_vector(const ArrayConfig &array, double angle);

// Mean path powers for the exponential profile, normalized to sum to `total`.
RVec exponential_power_profile(int num_paths, double decay_db, double total);

PathSet make_paths(const ArrayConfig &array, const RVec &angles, const RVec &powers);
PathSet draw_paths(const ClusterModel &model, const ArrayConfig &array, Rng &rng);

// h = sum_i alpha_i s_i with alpha_i ~ CN(0, q_i).
ChannelRealization realize_channel(const PathSet &paths, Rng &rng);
// Same synthesis with caller-supplied fading coefficients.
ChannelRealization realize_channel(const PathSet &paths, const CVec &coefficients);

// Entries i.i.d. CN(0, 1).
ChannelRealization realize_iid(const ArrayConfig &array, Rng &rng);

// Exact second-order statistics of a path set (no sampling). R is left empty
// when with_covariance is false; V and eigenvalues are always filled.
CorrelationSpectrum correlation_spectrum(const PathSet &paths, bool with_covariance = true);

} // namespace mmimo
