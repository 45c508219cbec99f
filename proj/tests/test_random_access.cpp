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

#include <doctest.h>

#include <cmath>

using namespace mmimo;

namespace {

RaPopulation fixed_population(std::vector<double> beta, double rho = 1.0)
{
    RaPopulation pop;
    pop.total_devices = static_cast<int>(beta.size());
    pop.activation_prob = 0.1;
    pop.rho.assign(beta.size(), rho);
    pop.beta = std::move(beta);
    return pop;
}

} // namespace

TEST_CASE("population: beta = 1 at the edge, grows inward, uniform in area")
{
    RaGeometry g;
    Rng rng(1);
    const RaPopulation pop = draw_population(20000, 0.01, g, rng);
    const double beta_min = 1.0, beta_max = std::pow(g.r_max / g.r_min, g.pathloss_exponent);
    int inner = 0;
    const double r_mid = std::sqrt(0.5 * (g.r_min * g.r_min + g.r_max * g.r_max));
    for (int k = 0; k < pop.total_devices; ++k)
    {
        CHECK(pop.beta[k] >= beta_min * (1 - 1e-12));
        CHECK(pop.beta[k] <= beta_max * (1 + 1e-12));
        CHECK(pop.rho[k] == 1.0);
        inner += pop.beta[k] > std::pow(g.r_max / r_mid, g.pathloss_exponent);
    }
    // half the area lies inside r_mid
    CHECK(std::abs(inner / 20000.0 - 0.5) < 0.02);

    // Populations for different sizes share their prefix.
    Rng a(5), b(5);
    const RaPopulation small = draw_population(100, 0.01, g, a);
    const RaPopulation big = draw_population(300, 0.01, g, b);
    for (int k = 0; k < 100; ++k)
        CHECK(small.beta[k] == big.beta[k]);

    RaGeometry bad;
    bad.r_min = 300.0;
    CHECK_THROWS_AS(draw_population(10, 0.1, bad, rng), ConfigError);
    CHECK_THROWS_AS(draw_population(0, 0.1, g, rng), ConfigError);
}

TEST_CASE("single contender is always granted (asymptotic, hard)")
{
    const RaPopulation pop = fixed_population({2.0, 3.0, 5.0});
    Rng rng(1);
    const SucreBlockResult r = sucre_block_with_pilots({0, 1, 2}, {0, 1, 2}, pop, PilotPool{3}, SucreOptions{}, rng);
    for (DeviceOutcome o : r.outcome)
        CHECK(o == DeviceOutcome::granted);
    CHECK(r.collided_pilots == 0);
}

TEST_CASE("equal received powers: both stay silent under the hard rule")
{
    const RaPopulation pop = fixed_population({4.0, 4.0});
    Rng rng(1);
    const SucreBlockResult r = sucre_block_with_pilots({0, 1}, {0, 0}, pop, PilotPool{2}, SucreOptions{}, rng);
    CHECK(r.outcome[0] == DeviceOutcome::lost);
    CHECK(r.outcome[1] == DeviceOutcome::lost);
    CHECK(r.collided_pilots == 1);
    CHECK(r.resolved_collisions == 0);
    CHECK(r.retransmitters[0] == 0);
}

TEST_CASE("two-device collision resolves iff powers differ (asymptotic, hard)")
{
    Rng rng(2);
    for (int i = 0; i < 200; ++i)
    {
        const double a = uniform_real(rng, 0.1, 10.0);
        const double b = i % 10 == 0 ? a : uniform_real(rng, 0.1, 10.0);
        const RaPopulation pop = fixed_population({a, b});
        const SucreBlockResult r = sucre_block_with_pilots({0, 1}, {0, 0}, pop, PilotPool{1}, SucreOptions{}, rng);
        CHECK((r.resolved_collisions == 1) == (a != b));
        if (a > b)
            CHECK(r.outcome[0] == DeviceOutcome::granted);
        if (b > a)
            CHECK(r.outcome[1] == DeviceOutcome::granted);
    }
}

TEST_CASE("hard rule: at most one retransmitter per pilot in asymptotic mode")
{
    RaGeometry g;
    Rng rng(3);
    const RaPopulation pop = draw_population(500, 0.1, g, rng);
    const PilotPool pool{5};
    for (int rep = 0; rep < 200; ++rep)
    {
        std::vector<int> active;
        for (int k = 0; k < pop.total_devices; ++k)
            if (bernoulli(rng, 0.05))
                active.push_back(k);
        const SucreBlockResult r = sucre_block(active, pop, pool, SucreOptions{}, rng);
        for (int s : r.retransmitters)
            CHECK(s <= 1);
        // A strict majority always retransmits, so false negatives are impossible.
        for (DeviceOutcome o : r.outcome)
            CHECK(o != DeviceOutcome::false_negative);
    }
}

TEST_CASE("empty active set gives an empty outcome")
{
    const RaPopulation pop = fixed_population({1.0});
    Rng rng(4);
    const SucreBlockResult r = sucre_block({}, pop, PilotPool{4}, SucreOptions{}, rng);
    CHECK(r.outcome.empty());
    CHECK(r.collided_pilots == 0);
}

TEST_CASE("asymptotic alpha estimate is the exact colliding power")
{
    const RaPopulation pop = fixed_population({1.0, 2.5, 4.0}, 2.0);
    Rng rng(5);
    for (double a : estimate_alpha({0, 1, 2}, pop, SucreOptions{}, rng))
        CHECK(a == doctest::Approx(15.0));
}

TEST_CASE("finite-M alpha estimate concentrates as M grows")
{
    const RaPopulation pop = fixed_population({10.0, 30.0});
    double prev = 1e9;
    for (int M : {16, 128, 1024})
    {
        SucreOptions opt;
        opt.mode = RaMode::finite_m;
        opt.num_antennas = M;
        opt.dl_power = 100.0;
        Rng rng(6);
        double err = 0.0;
        for (int i = 0; i < 400; ++i)
        {
            const auto a = estimate_alpha({0, 1}, pop, opt, rng);
            err += std::abs(a[1] / 40.0 - 1.0);
        }
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev / 400.0 < 0.1);
}

TEST_CASE("finite-M multi-winner rate falls with M")
{
    RaGeometry g;
    Rng rng(7);
    const RaPopulation pop = draw_population(2000, 0.005, g, rng);
    double prev = 2.0;
    for (int M : {8, 64, 512})
    {
        SucreOptions opt;
        opt.mode = RaMode::finite_m;
        opt.num_antennas = M;
        const CollisionStats s = sucre_collision_stats(pop, PilotPool{10}, opt, 3000, 11, 1);
        REQUIRE(s.collisions > 0);
        const double rate = static_cast<double>(s.multi_winner) / s.collisions;
        CHECK(rate < prev);
        prev = rate;
    }
}

TEST_CASE("decision rule probabilities")
{
    const DecisionRule hard = DecisionRule::hard();
    CHECK(hard.retransmit_probability(5.0, 9.0) == 1.0);
    CHECK(hard.retransmit_probability(4.5, 9.0) == 0.0);
    const DecisionRule soft = DecisionRule::soft(3.0, 2.0);
    CHECK(soft.retransmit_probability(1.0, 8.0) == doctest::Approx(1.0 / 64.0));
    CHECK(soft.retransmit_probability(5.0, 8.0) == 1.0);
    CHECK(soft.retransmit_probability(1.0, std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS_AS(DecisionRule::soft(0.0).validate(), ConfigError);
}

TEST_CASE("protocol names round-trip")
{
    for (RaProtocol p : {RaProtocol::baseline, RaProtocol::sucre_hard, RaProtocol::sucre_soft})
        CHECK(protocol_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(protocol_from_string("aloha"), ConfigError);
}

namespace {

RaSimConfig quick_sim()
{
    RaSimConfig c;
    c.blocks = 400;
    c.warmup_blocks = 50;
    c.replications = 2;
    c.batches = 4;
    return c;
}

} // namespace

TEST_CASE("P_a = 0: no attempts and empty-safe metrics")
{
    RaGeometry g;
    Rng rng(8);
    const RaPopulation pop = draw_population(100, 0.0, g, rng);
    const RaMetrics m = simulate_ra(pop, PilotPool{10}, RaProtocol::sucre_hard, quick_sim(), 1, 1);
    CHECK(m.attempts == 0);
    CHECK(m.packets == 0);
    CHECK(m.avg_attempts == 0.0);
    CHECK(m.failure_prob == 0.0);
    CHECK(m.resolved_collision_frac == 0.0);
}

TEST_CASE("uncontended regime: one attempt per packet, no failures")
{
    RaGeometry g;
    Rng rng(9);
    const RaPopulation pop = draw_population(50, 0.01, g, rng);
    for (RaProtocol p : {RaProtocol::baseline, RaProtocol::sucre_hard, RaProtocol::sucre_soft})
    {
        const RaMetrics m = simulate_ra(pop, PilotPool{5000}, p, quick_sim(), 2, 1);
        REQUIRE(m.packets > 50);
        CHECK(m.avg_attempts < 1.01);
        CHECK(m.failure_prob < 0.01);
    }
}

TEST_CASE("failure probability: non-increasing in P_p, non-decreasing in K_0")
{
    RaGeometry g;
    Rng rng(10);
    const RaPopulation big = draw_population(8000, 0.001, g, rng);
    const RaSimConfig cfg = quick_sim();
    double prev = 1.1;
    for (int pp : {5, 10, 20})
    {
        const double f = simulate_ra(big, PilotPool{pp}, RaProtocol::sucre_hard, cfg, 3, 1).failure_prob;
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
        CHECK(f <= prev);
        prev = f;
    }
    prev = -0.1;
    for (int k0 : {2000, 5000, 8000})
    {
        Rng r(10);
        const RaPopulation pop = draw_population(k0, 0.001, g, r);
        const double f = simulate_ra(pop, PilotPool{10}, RaProtocol::baseline, cfg, 3, 1).failure_prob;
        CHECK(f >= prev);
        prev = f;
    }
}

TEST_CASE("simulate_ra is identical for any worker count")
{
    RaGeometry g;
    Rng rng(12);
    const RaPopulation pop = draw_population(3000, 0.002, g, rng);
    RaSimConfig cfg = quick_sim();
    cfg.replications = 3;
    const RaMetrics a = simulate_ra(pop, PilotPool{6}, RaProtocol::sucre_soft, cfg, 77, 1);
    const RaMetrics b = simulate_ra(pop, PilotPool{6}, RaProtocol::sucre_soft, cfg, 77, 3);
    CHECK(a.avg_attempts == b.avg_attempts);
    CHECK(a.avg_attempts_stderr == b.avg_attempts_stderr);
    CHECK(a.attempts == b.attempts);
    CHECK(a.failed_attempts == b.failed_attempts);
}

TEST_CASE("invalid RA settings are rejected")
{
    RaSimConfig c;
    c.max_attempts = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RaSimConfig{};
    c.retry_prob = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(PilotPool{0}.validate(), ConfigError);
}

TEST_CASE("pilot RA: a lone device gets log2(1 + cap) in every slot")
{
    PilotRaConfig cfg;
    cfg.num_slots = 4;
    cfg.num_antennas = 32;
    Rng rng(13);
    const auto r = pilot_ra_rate({2.0}, {0.5}, 1.0, PilotPool{3}, cfg, rng);
    CHECK(r[0] == doctest::Approx(std::log2(1.0 + 0.5 * 2.0 * 32)));
    cfg.cap = SinrCap::none;
    CHECK(std::isinf(pilot_ra_rate({2.0}, {0.5}, 1.0, PilotPool{3}, cfg, rng)[0]));
}

TEST_CASE("pilot RA: two always-colliding equal devices get 1 bit per symbol")
{
    PilotRaConfig cfg;
    cfg.num_slots = 6;
    const std::vector<std::vector<int>> pilots(2, std::vector<int>(6, 0));
    const auto r = pilot_ra_rate_with_pilots({3.0, 3.0}, {1.0, 1.0}, 1.0, pilots, cfg);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(1.0));
}

TEST_CASE("pilot RA: rate variance across hopping patterns scales as 1/L")
{
    const int K = 15;
    std::vector<double> beta(K), rho(K, 1.0);
    for (int k = 0; k < K; ++k)
        beta[k] = 1.0 + 0.5 * k;
    std::vector<double> lx, ly;
    for (int L : {8, 32, 128})
    {
        PilotRaConfig cfg;
        cfg.num_slots = L;
        Rng rng(14);
        Moments m;
        for (int i = 0; i < 3000; ++i)
            m.add(pilot_ra_rate(beta, rho, 1.0, PilotPool{8}, cfg, rng)[3]);
        lx.push_back(std::log(static_cast<double>(L)));
        ly.push_back(std::log(m.variance()));
    }
    // least-squares slope
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0, my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 3; ++i)
    {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(sxy / sxx == doctest::Approx(-1.0).epsilon(0.15));
}
