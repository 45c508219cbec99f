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

#include "mmimo/urllc.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>

using namespace mmimo;

namespace {

ChannelConfig iid_channel(int M)
{
    ChannelConfig c;
    c.kind = ChannelKind::iid;
    c.array.num_antennas = M;
    return c;
}

ChannelConfig sparse_channel(int M, int np, double decay)
{
    ChannelConfig c;
    c.array.num_antennas = M;
    c.cluster.num_paths = np;
    c.cluster.decay_db = decay;
    return c;
}

} // namespace

TEST_CASE("rate and threshold: R N_d = b and gamma_th = 2^R - 1")
{
    for (int b : {32, 80, 144})
        for (int nd : {1, 5, 27})
        {
            const RateSpec r = rate_for_bits(b, nd);
            CHECK(r.rate * nd == doctest::Approx(b).epsilon(1e-14));
            CHECK(r.gamma_th == std::exp2(r.rate) - 1.0);
        }
    CHECK(rate_for_bits(144, 24).gamma_th == 63.0);
    CHECK_THROWS_AS(rate_for_bits(10, 0), ConfigError);
    CHECK_THROWS_AS(rate_for_bits(0, 3), ConfigError);
}

TEST_CASE("overhead per scheme")
{
    FrameConfig f;
    f.guard_symbols = 1;
    CHECK(overhead_symbols(Scheme::tdd_mrt, 3, f) == 4);
    CHECK(overhead_symbols(Scheme::tdd_sv, 3, f) == 4);
    CHECK(overhead_symbols(Scheme::fdd, 3, f) == 6);
    CHECK(overhead_symbols(Scheme::perfect_csi, 0, f) == 0);
    CHECK(rate_for(f, 4).rate == doctest::Approx(144.0 / 24.0));
}

TEST_CASE("numerology: 28 symbols at 60 kHz last 0.5 ms")
{
    FrameConfig f;
    f.total_symbols = 28;
    f.scs_khz = 60;
    CHECK(f.latency_ms() == doctest::Approx(0.5));
    f.scs_khz = 15;
    CHECK(f.latency_ms() == doctest::Approx(2.0));
    f.scs_khz = 45;
    CHECK_THROWS_AS(f.latency_ms(), ConfigError);
}

TEST_CASE("feasible parameters leave at least one data symbol")
{
    FrameConfig f;
    f.total_symbols = 10;
    const ChannelConfig ch = sparse_channel(64, 4, 10.0);
    const std::vector<int> tdd = feasible_params(Scheme::tdd_mrt, ch, f);
    CHECK(tdd.front() == 1);
    CHECK(tdd.back() == 8);
    const std::vector<int> fdd = feasible_params(Scheme::fdd, ch, f);
    CHECK(fdd == std::vector<int>{1, 2, 3, 4});
    f.total_symbols = 5;
    CHECK(feasible_params(Scheme::fdd, ch, f) == std::vector<int>{1, 2});
    CHECK(feasible_params(Scheme::perfect_csi, ch, f) == std::vector<int>{0});
}

TEST_CASE("scheme names round-trip")
{
    for (Scheme s : {Scheme::tdd_mrt, Scheme::tdd_sv, Scheme::fdd, Scheme::perfect_csi})
        CHECK(scheme_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(scheme_from_string("tdd"), ConfigError);
}

TEST_CASE("perfect CSI over iid channels matches the Gamma(M) oracle")
{
    FrameConfig f;
    f.total_symbols = 20;
    f.payload_bits = 40; // gamma_th = 3
    McOptions o;
    o.trials = 20000;
    o.seed = 3;
    for (int M : {1, 4})
        for (double snr_db : {0.0, 5.0})
        {
            const LinkBudget b = LinkBudget::from_snr_db(snr_db);
            const OutageResult r = outage_mc(Scheme::perfect_csi, iid_channel(M), f, 0, b, o);
            const double p = boost::math::gamma_p(static_cast<double>(M), 3.0 / b.snr());
            const double sigma = std::sqrt(p * (1 - p) / o.trials);
            CHECK(std::abs(r.p_outage - p) < 4.0 * sigma + 1e-12);
        }
}

TEST_CASE("outage is non-increasing in SNR under common random numbers")
{
    FrameConfig f;
    f.total_symbols = 28;
    f.payload_bits = 144;
    McOptions o;
    o.trials = 2000;
    double prev = 1.0;
    for (double snr : {-5.0, 0.0, 5.0, 10.0})
    {
        const double p = outage_mc(Scheme::tdd_mrt, sparse_channel(64, 20, 10.0), f, 2,
                                   LinkBudget::from_snr_db(snr), o)
                             .p_outage;
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("sweeps are identical for one and many workers")
{
    FrameConfig f;
    McOptions o;
    o.trials = 1500;
    o.seed = 99;
    const std::vector<int> ts{1, 2, 3, 4};
    const ChannelConfig ch = sparse_channel(32, 8, 10.0);
    const LinkBudget b = LinkBudget::from_snr_db(3.0);
    o.workers = 1;
    const auto a = sweep_training(Scheme::tdd_sv, ch, f, ts, b, o);
    o.workers = 4;
    const auto c = sweep_training(Scheme::tdd_sv, ch, f, ts, b, o);
    for (std::size_t i = 0; i < ts.size(); ++i)
    {
        CHECK(a[i].outage.outages == c[i].outage.outages);
        CHECK(a[i].mean_gamma == c[i].mean_gamma);
        CHECK(a[i].rsd_gamma == c[i].rsd_gamma);
    }
}

TEST_CASE("SV refinement never loses to MRT on a rank-deficient channel")
{
    // Same trial, same noise: projecting onto span(V) can only help on average.
    FrameConfig f;
    McOptions o;
    o.trials = 2000;
    const std::vector<int> ts{1, 3};
    const ChannelConfig ch = sparse_channel(64, 4, 10.0);
    const LinkBudget b = LinkBudget::from_snr_db(0.0);
    const auto m = sweep_training(Scheme::tdd_mrt, ch, f, ts, b, o);
    const auto s = sweep_training(Scheme::tdd_sv, ch, f, ts, b, o);
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(s[i].mean_gamma > m[i].mean_gamma);
}

TEST_CASE("pick_best breaks ties toward the smaller parameter")
{
    std::vector<SweepPoint> pts(3);
    pts[0].param = 2;
    pts[0].outage = OutageResult::from_counts(5, 100);
    pts[1].param = 3;
    pts[1].outage = OutageResult::from_counts(1, 100);
    pts[2].param = 4;
    pts[2].outage = OutageResult::from_counts(1, 100);
    CHECK(pick_best(pts).param == 3);
    pts[1].outage = OutageResult::from_counts(0, 100);
    pts[2].outage = OutageResult::from_counts(0, 100);
    CHECK(pick_best(pts).param == 3);
    CHECK_THROWS_AS(pick_best({}), ConfigError);
}

TEST_CASE("invalid Monte-Carlo settings are rejected")
{
    FrameConfig f;
    f.total_symbols = 4;
    McOptions o;
    const ChannelConfig ch = sparse_channel(16, 4, 10.0);
    CHECK_THROWS_AS(sweep_training(Scheme::tdd_mrt, ch, f, {3}, LinkBudget{}, o), ConfigError);
    CHECK_THROWS_AS(sweep_training(Scheme::tdd_mrt, ch, f, {}, LinkBudget{}, o), ConfigError);
    o.trials = 0;
    CHECK_THROWS_AS(sweep_training(Scheme::tdd_mrt, ch, f, {1}, LinkBudget{}, o), ConfigError);
}

TEST_CASE("latency curve: longer frames never hurt the optimized TDD link")
{
    FrameConfig f;
    f.payload_bits = 80;
    McOptions o;
    o.trials = 1500;
    const auto pts = latency_reliability_curve({Scheme::tdd_mrt}, sparse_channel(64, 12, 20.0), f, {16, 24, 32},
                                               LinkBudget::from_snr_db(3.0), o);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].latency_ms < pts[1].latency_ms);
    CHECK(pts[1].outage.p_outage <= pts[0].outage.p_outage);
    CHECK(pts[2].outage.p_outage <= pts[1].outage.p_outage);
    for (const auto &p : pts)
        CHECK(p.reliability() == doctest::Approx(1.0 - p.outage.p_outage));
}

TEST_CASE("TDM splits the frame with device 1 first")
{
    CHECK(tdm_first_share(28) == 14);
    CHECK(tdm_first_share(29) == 15);
}

TEST_CASE("rate examples: b = N_d gives R = 1; 32 bytes over 26 symbols")
{
    const RateSpec one = rate_for_bits(26, 26);
    CHECK(one.rate == 1.0);
    CHECK(one.gamma_th == 1.0);
    const RateSpec r = rate_for_bits(256, 26);
    CHECK(r.rate == doctest::Approx(9.846153846).epsilon(1e-9));
    // 2^(256/26) - 1 = 919.42; the quoted 920.6 is within 0.15%
    CHECK(r.gamma_th == doctest::Approx(std::pow(2.0, 256.0 / 26.0) - 1.0).epsilon(1e-14));
    CHECK(r.gamma_th == doctest::Approx(920.6).epsilon(2e-3));
    FrameConfig f;
    CHECK_THROWS_AS(rate_for(f, f.total_symbols), ConfigError);
}

TEST_CASE("snr-training trends: MRT mean SNR grows with t, SV barely moves")
{
    FrameConfig f;
    McOptions o;
    o.trials = 3000;
    const ChannelConfig ch = sparse_channel(64, 20, 10.0);
    const LinkBudget b = LinkBudget::from_snr_db(4.5);
    const std::vector<int> ts{1, 2, 3, 4, 5, 6, 7, 8};
    const auto m = sweep_training(Scheme::tdd_mrt, ch, f, ts, b, o);
    const auto s = sweep_training(Scheme::tdd_sv, ch, f, ts, b, o);
    for (std::size_t i = 1; i < ts.size(); ++i)
        CHECK(m[i].mean_gamma > m[i - 1].mean_gamma);
    CHECK(linear_to_db(s.back().mean_gamma) - linear_to_db(s.front().mean_gamma) < 1.0);
}

TEST_CASE("best training over a superset of candidates is never worse")
{
    FrameConfig f;
    McOptions o;
    o.trials = 2000;
    const ChannelConfig ch = sparse_channel(64, 20, 10.0);
    const LinkBudget b = LinkBudget::from_snr_db(4.5);
    const BestTraining narrow = best_training(Scheme::tdd_mrt, ch, f, {3, 4}, b, o);
    const BestTraining wide = best_training(Scheme::tdd_mrt, ch, f, {1, 2, 3, 4, 5}, b, o);
    CHECK(wide.outage.p_outage <= narrow.outage.p_outage);
    const BestTraining single = best_training(Scheme::tdd_sv, ch, f, {2}, b, o);
    CHECK(single.param == 2);
}

TEST_CASE("nearly all symbols on training with a large payload gives outage 1")
{
    FrameConfig f;
    f.total_symbols = 10;
    f.payload_bits = 200;
    McOptions o;
    o.trials = 300;
    const OutageResult r = outage_mc(Scheme::tdd_mrt, sparse_channel(64, 20, 10.0), f, 8, LinkBudget{}, o);
    CHECK(r.p_outage == 1.0);
}

TEST_CASE("TDM: half the symbols means twice the rate")
{
    CHECK(rate_for_bits(96, 12).rate == 2.0 * rate_for_bits(96, 24).rate);
}
