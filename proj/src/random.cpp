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

#include "mmimo/random.hpp"

#include <cmath>

namespace mmimo {

std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
    std::uint64_t state = seed;
    std::uint64_t key = splitmix64(state);
    state = key ^ (stream * 0xD1B54A32D192ED03ULL);
    key = splitmix64(state);
    state = key ^ (index * 0x8CB92BA72F3D8DD7ULL);
    key = splitmix64(state);
    return Rng(key);
}

namespace {

double unit_open(Rng &rng)
{
    // 53 random mantissa bits mapped into (-1, 1).
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

// Marsaglia polar method; one accepted pair per complex sample.
cplx unit_complex_normal(Rng &rng)
{
    double x, y, s;
    do
    {
        x = unit_open(rng);
        y = unit_open(rng);
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    // Each component has variance 1/2.
    const double f = std::sqrt(-std::log(s) / s);
    return {x * f, y * f};
}

} // namespace

cplx complex_normal(Rng &rng, double variance)
{
    return std::sqrt(variance) * unit_complex_normal(rng);
}

CVec complex_normal_vector(Rng &rng, Eigen::Index size, double variance)
{
    // Unit draws scaled afterwards, so a zero variance still consumes the stream.
    const double scale = std::sqrt(variance);
    CVec v(size);
    for (Eigen::Index i = 0; i < size; ++i)
        v(i) = scale * unit_complex_normal(rng);
    return v;
}

double uniform_real(Rng &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::uint64_t uniform_index(Rng &rng, std::uint64_t n)
{
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

bool bernoulli(Rng &rng, double p)
{
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

} // namespace mmimo
