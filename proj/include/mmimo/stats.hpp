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

#include <cmath>
#include <cstdint>

namespace mmimo {

struct Interval
{
    double lo = 0.0;
    double hi = 1.0;
};

// Wilson score interval for `successes` out of `n` Bernoulli trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.959963984540054);

// Count/sum/sum-of-squares accumulator; merge() is exact for the count and
// deterministic for a fixed merge order.
struct Moments
{
    std::uint64_t n = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x)
    {
        ++n;
        sum += x;
        sumsq += x * x;
    }
    void merge(const Moments &o)
    {
        n += o.n;
        sum += o.sum;
        sumsq += o.sumsq;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    // Unbiased sample variance.
    double variance() const
    {
        if (n < 2)
            return 0.0;
        const double m = mean();
        const double v = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stddev() const { return std::sqrt(variance()); }
    double rsd() const { return mean() != 0.0 ? stddev() / mean() : 0.0; }
    double stderr_mean() const { return n ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

} // namespace mmimo
