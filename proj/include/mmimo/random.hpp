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

#include "mmimo/types.hpp"

#include <cstdint>
#include <random>

namespace mmimo {

using Rng = std::mt19937_64;

// Stream identifiers keep the substreams of different experiment stages apart.
enum class StreamId : std::uint64_t
{
    generic = 0,
    urllc_single = 1,
    urllc_two_user = 2,
    urllc_fdd = 3,
    ra_blocks = 4,
    ra_population = 5,
    coded_ra = 6,
    pilot_ra = 7,
    ra_collisions = 8,
};

std::uint64_t splitmix64(std::uint64_t &state);

// Independent generator for trial `index` of `stream` under a base seed. The
// mapping is a pure function of its arguments, so a trial draws the same
// numbers no matter which worker runs it or in which order.
Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
inline Rng substream(std::uint64_t seed, StreamId stream, std::uint64_t index)
{
    return substream(seed, static_cast<std::uint64_t>(stream), index);
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
cplx complex_normal(Rng &rng, double variance = 1.0);

// M-vector of i.i.d. CN(0, variance) entries.
CVec complex_normal_vector(Rng &rng, Eigen::Index size, double variance = 1.0);

double uniform_real(Rng &rng, double lo, double hi);

// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng &rng, std::uint64_t n);

bool bernoulli(Rng &rng, double p);

} // namespace mmimo
