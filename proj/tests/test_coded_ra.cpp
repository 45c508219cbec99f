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

#include "mmimo/random_access.hpp"
#include "peeling_oracle.hpp"

#include <doctest.h>

using namespace mmimo;
using mmimo::testing::peeling_oracle;

namespace {

TransmissionPattern pattern(int slots, int pilots, std::vector<std::vector<int>> rows)
{
    TransmissionPattern tx;
    tx.num_slots = slots;
    tx.num_pilots = pilots;
    tx.pilot = std::move(rows);
    return tx;
}

CodedRaConfig genie(int slots)
{
    CodedRaConfig c;
    c.num_slots = slots;
    return c;
}

// Every pattern of n devices over L slots and P pilots, device-ordered.
template <class F>
void for_each_pattern(int n, int L, int P, F f)
{
    const int per_device = [&] {
        int v = 1;
        for (int l = 0; l < L; ++l)
            v *= P + 1;
        return v;
    }();
    std::vector<int> code(n, 0);
    TransmissionPattern tx = pattern(L, P, std::vector<std::vector<int>>(n, std::vector<int>(L, -1)));
    for (;;)
    {
        for (int d = 0; d < n; ++d)
        {
            int c = code[d];
            for (int l = 0; l < L; ++l)
            {
                tx.pilot[d][l] = c % (P + 1) - 1;
                c /= P + 1;
            }
        }
        f(tx);
        int d = 0;
        while (d < n && ++code[d] == per_device)
            code[d++] = 0;
        if (d == n)
            return;
    }
}

} // namespace

TEST_CASE("one device is decoded iff it transmits at least once")
{
    CHECK(coded_ra_decode(pattern(3, 2, {{-1, 1, -1}}), genie(3)).num_decoded() == 1);
    CHECK(coded_ra_decode(pattern(3, 2, {{-1, -1, -1}}), genie(3)).num_decoded() == 0);
}

TEST_CASE("textbook peeling: a singleton unlocks the shared slot")
{
    const TransmissionPattern tx = pattern(2, 1, {{0, 0}, {-1, 0}});
    const CodedRaResult r = coded_ra_decode(tx, genie(2));
    CHECK(r.num_decoded() == 2);
    REQUIRE(r.trace.size() == 2);
    CHECK(r.trace[0].device == 0);
    CHECK(r.trace[0].slot == 0);
    CHECK(r.trace[1].device == 1);
    CHECK(r.trace[1].slot == 1);
    CHECK(replay_trace(tx, genie(2), r));
}

TEST_CASE("a two-device stopping set is never decoded")
{
    const TransmissionPattern tx = pattern(2, 2, {{0, 1}, {0, 1}, {1, -1}});
    const CodedRaResult r = coded_ra_decode(tx, genie(2));
    CHECK(r.decoded == std::vector<bool>{false, false, true});
}

TEST_CASE("genie decoder equals the peeling oracle on every small pattern")
{
    for (int L = 1; L <= 3; ++L)
        for (int P = 1; P <= 2; ++P)
            for (int n = 1; n <= 4; ++n)
                for_each_pattern(n, L, P, [&](const TransmissionPattern &tx) {
                    const CodedRaResult r = coded_ra_decode(tx, genie(L));
                    REQUIRE(r.decoded == peeling_oracle(tx));
                    REQUIRE(replay_trace(tx, genie(L), r));
                });
}

TEST_CASE("appending a slot never shrinks the decoded set")
{
    for (int P = 1; P <= 2; ++P)
        for (int n = 1; n <= 4; ++n)
            for_each_pattern(n, 2, P, [&](const TransmissionPattern &tx) {
                const std::vector<bool> before = coded_ra_decode(tx, genie(2)).decoded;
                for_each_pattern(n, 1, P, [&](const TransmissionPattern &extra) {
                    TransmissionPattern grown = tx;
                    grown.num_slots = 3;
                    for (int d = 0; d < n; ++d)
                        grown.pilot[d].push_back(extra.pilot[d][0]);
                    const std::vector<bool> after = coded_ra_decode(grown, genie(3)).decoded;
                    for (int d = 0; d < n; ++d)
                        REQUIRE((!before[d] || after[d]));
                });
            });
}

TEST_CASE("replay rejects a tampered trace")
{
    const TransmissionPattern tx = pattern(2, 1, {{0, 0}, {-1, 0}});
    CodedRaResult r = coded_ra_decode(tx, genie(2));
    CodedRaResult swapped = r;
    std::swap(swapped.trace[0], swapped.trace[1]);
    CHECK_FALSE(replay_trace(tx, genie(2), swapped));
    CodedRaResult truncated = r;
    truncated.trace.pop_back();
    CHECK_FALSE(replay_trace(tx, genie(2), truncated));
}

TEST_CASE("SINR-threshold decoding: strongest first, then SIC")
{
    CodedRaConfig cfg;
    cfg.num_slots = 1;
    cfg.decode_model = DecodeModel::sinr_threshold;
    cfg.sinr_threshold = 2.0;
    cfg.num_antennas = 64;
    const TransmissionPattern tx = pattern(1, 1, {{0}, {0}});
    CodedRaPowers pw;
    pw.beta = {2.0, 1.0};
    pw.rho = {1.0, 1.0};
    // rho beta^2: 4 vs 1 -> SINR 4 >= 2 for the strong device, then the weak one is alone
    CodedRaResult r = coded_ra_decode(tx, cfg, pw);
    CHECK(r.num_decoded() == 2);
    CHECK(r.trace[0].device == 0);
    CHECK(replay_trace(tx, cfg, r, pw));

    cfg.sinr_threshold = 5.0;
    CHECK(coded_ra_decode(tx, cfg, pw).num_decoded() == 0);

    // Equal strengths give SINR 1 for both.
    pw.beta = {1.0, 1.0};
    cfg.sinr_threshold = 1.0;
    CHECK(coded_ra_decode(tx, cfg, pw).num_decoded() == 2);
    cfg.sinr_threshold = 1.01;
    CHECK(coded_ra_decode(tx, cfg, pw).num_decoded() == 0);

    CHECK_THROWS_AS(coded_ra_decode(tx, cfg, CodedRaPowers{}), ConfigError);
}

TEST_CASE("SINR decoding with a low threshold decodes every genie-decodable device")
{
    // A singleton has SINR = cap = rho beta M / sigma^2 >= threshold here.
    Rng rng(3);
    CodedRaConfig g = genie(3);
    CodedRaConfig s = g;
    s.decode_model = DecodeModel::sinr_threshold;
    s.sinr_threshold = 1e-3;
    for (int i = 0; i < 500; ++i)
    {
        const TransmissionPattern tx = draw_transmissions(6, PilotPool{2}, g, rng);
        CodedRaPowers pw;
        for (int d = 0; d < 6; ++d)
        {
            pw.beta.push_back(uniform_real(rng, 1.0, 10.0));
            pw.rho.push_back(1.0);
        }
        const auto gd = coded_ra_decode(tx, g).decoded;
        const auto sd = coded_ra_decode(tx, s, pw).decoded;
        for (int d = 0; d < 6; ++d)
            CHECK((!gd[d] || sd[d]));
    }
}

TEST_CASE("draw_transmissions honours the activation probability and pattern")
{
    Rng rng(4);
    CodedRaConfig cfg;
    cfg.num_slots = 4;
    cfg.slot_activation_prob = 0.25;
    int active = 0, total = 0;
    for (int i = 0; i < 2000; ++i)
    {
        const TransmissionPattern tx = draw_transmissions(5, PilotPool{3}, cfg, rng);
        for (const auto &row : tx.pilot)
            for (int p : row)
            {
                active += p >= 0;
                ++total;
            }
    }
    CHECK(static_cast<double>(active) / total == doctest::Approx(0.25).epsilon(0.05));

    cfg.pattern = PilotPattern::per_frame;
    cfg.slot_activation_prob = 1.0;
    for (int i = 0; i < 100; ++i)
        for (const auto &row : draw_transmissions(3, PilotPool{4}, cfg, rng).pilot)
            for (int p : row)
                CHECK(p == row[0]);

    cfg.slot_activation_prob = 0.0;
    const TransmissionPattern silent = draw_transmissions(3, PilotPool{4}, cfg, rng);
    CHECK(coded_ra_decode(silent, cfg).num_decoded() == 0);
}

TEST_CASE("decode model names round-trip")
{
    for (DecodeModel m : {DecodeModel::genie_singleton, DecodeModel::sinr_threshold})
        CHECK(decode_model_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(decode_model_from_string("magic"), ConfigError);
}
