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

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mmimo {

// Trials are grouped into fixed-size chunks whose partial results are merged
// in chunk order. Chunk boundaries never depend on the worker count, which
// makes floating-point aggregates bit-identical for any level of parallelism.
inline constexpr std::uint64_t kTrialsPerChunk = 256;

// Environment variable consulted when `requested` is 0 (auto).
inline constexpr const char *kWorkersEnv = "MMIMO_WORKERS";

int resolve_workers(int requested);

// Runs body(trial_index, acc) for every trial in [0, trials). Acc needs a
// merge(const Acc&) member; make() produces an empty accumulator.
template <class Acc, class Make, class Body>
Acc run_trials(std::uint64_t trials, int workers, Make make, Body body)
{
    const std::uint64_t chunks = (trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
    std::vector<Acc> partial;
    partial.reserve(chunks);
    for (std::uint64_t c = 0; c < chunks; ++c)
        partial.push_back(make());

    auto run_chunk = [&](std::uint64_t c) {
        const std::uint64_t begin = c * kTrialsPerChunk;
        const std::uint64_t end = std::min(trials, begin + kTrialsPerChunk);
        for (std::uint64_t i = begin; i < end; ++i)
            body(i, partial[c]);
    };

    const int n_workers = std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(std::max<std::uint64_t>(chunks, 1))));
    if (n_workers == 1)
    {
        for (std::uint64_t c = 0; c < chunks; ++c)
            run_chunk(c);
    }
    else
    {
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w)
        {
            pool.emplace_back([&] {
                try
                {
                    for (std::uint64_t c = next++; c < chunks; c = next++)
                        run_chunk(c);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = chunks;
                }
            });
        }
        for (auto &t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }

    Acc total = make();
    for (const auto &p : partial)
        total.merge(p);
    return total;
}

} // namespace mmimo
