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

#include "mmimo/random_access.hpp"

#include <bit>
#include <cstdint>
#include <vector>

namespace mmimo::testing {

// Graph-peeling oracle for genie-singleton decoding, independent of any SIC
// schedule. A stopping set is a device subset S such that every cell holding
// a member of S holds at least two members of S. Peeling never decodes a
// member of a stopping set, and everything outside their union is decoded.
// Supports up to 31 devices; exponential in the device count.
inline std::vector<bool> peeling_oracle(const TransmissionPattern &tx)
{
    const int n = tx.num_devices();
    std::vector<std::uint32_t> cell(static_cast<std::size_t>(tx.num_slots) * tx.num_pilots, 0u);
    for (int d = 0; d < n; ++d)
        for (int l = 0; l < tx.num_slots; ++l)
            if (tx.pilot[d][l] >= 0)
                cell[static_cast<std::size_t>(l) * tx.num_pilots + tx.pilot[d][l]] |= 1u << d;

    std::uint32_t stuck = 0;
    for (std::uint32_t s = 1; s < (1u << n); ++s)
    {
        bool stopping = true;
        for (std::uint32_t m : cell)
            if (std::popcount(m & s) == 1)
            {
                stopping = false;
                break;
            }
        if (stopping)
            stuck |= s;
    }
    std::vector<bool> decoded(n);
    for (int d = 0; d < n; ++d)
        decoded[d] = !(stuck >> d & 1u);
    return decoded;
}

} // namespace mmimo::testing
