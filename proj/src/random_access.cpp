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

#include "mmimo/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>

namespace mmimo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string &msg)
{
    if (!ok)
        throw ConfigError(msg);
}

bool is_fraction(double p) { return p >= 0.0 && p <= 1.0; }

// Distinct uniformly chosen members of [0, n) for which eligible(i) holds.
// Rejection sampling; callers keep the eligible share large.
template <class Eligible>
void sample_distinct(int n, int count, Rng &rng, std::vector<int> &out, std::vector<char> &taken,
                     Eligible eligible)
{
    for (int c = 0; c < count; ++c)
    {
        for (;;)
        {
            const int i = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n)));
            if (!taken[i] && eligible(i))
            {
                taken[i] = 1;
                out.push_back(i);
                break;
            }
        }
    }
    for (int i : out)
        taken[i] = 0;
}

} // namespace

void RaGeometry::validate() const
{
    require(r_min > 0.0 && r_max > r_min, "ra.geometry needs 0 < r_min < r_max");
    require(pathloss_exponent > 0.0, "ra.geometry.pathloss_exponent must be > 0");
    require(std::isfinite(edge_snr_db), "ra.geometry.edge_snr_db must be finite");
    require(shadowing_db >= 0.0, "ra.geometry.shadowing_db must be >= 0");
    require(noise_var > 0.0, "ra.geometry.noise_var must be > 0");
}

void RaPopulation::validate() const
{
    require(total_devices >= 1, "ra.total_devices must be >= 1");
    require(is_fraction(activation_prob), "ra.activation_prob must lie in [0, 1]");
    require(static_cast<int>(beta.size()) == total_devices && static_cast<int>(rho.size()) == total_devices,
            "ra population needs one beta and one rho per device");
    for (int k = 0; k < total_devices; ++k)
        require(beta[k] > 0.0 && rho[k] > 0.0, "ra population needs beta > 0 and rho > 0");
    require(noise_var > 0.0, "ra noise_var must be > 0");
}

RaPopulation draw_population(int total_devices, double activation_prob, const RaGeometry &g, Rng &rng)
{
    g.validate();
    require(total_devices >= 1, "ra.total_devices must be >= 1");
    RaPopulation pop;
    pop.total_devices = total_devices;
    pop.activation_prob = activation_prob;
    pop.noise_var = g.noise_var;
    pop.beta.resize(total_devices);
    pop.rho.assign(total_devices, db_to_linear(g.edge_snr_db) * g.noise_var);
    std::normal_distribution<double> shadow(0.0, 1.0);
    for (int k = 0; k < total_devices; ++k)
    {
        // Uniform in area.
        const double u = uniform_real(rng, 0.0, 1.0);
        const double r = std::sqrt(g.r_min * g.r_min + u * (g.r_max * g.r_max - g.r_min * g.r_min));
        double b = std::pow(g.r_max / r, g.pathloss_exponent);
        const double s = shadow(rng);
        if (g.shadowing_db > 0.0)
            b *= db_to_linear(g.shadowing_db * s);
        pop.beta[k] = b;
    }
    pop.validate();
    return pop;
}

void PilotPool::validate() const { require(size >= 1, "ra.num_pilots must be >= 1"); }

void DecisionRule::validate() const
{
    if (kind == Kind::soft)
    {
        require(exponent > 0.0 && std::isfinite(exponent), "ra.soft_exponent must be a finite value > 0");
        require(scale > 0.0 && std::isfinite(scale), "ra.soft_scale must be a finite value > 0");
    }
}

double DecisionRule::retransmit_probability(double own_power, double alpha_hat) const
{
    if (!(alpha_hat < kInf))
        return 0.0;
    const double x = own_power / alpha_hat;
    if (kind == Kind::hard)
        return own_power > 0.5 * alpha_hat ? 1.0 : 0.0;
    return std::min(1.0, std::pow(scale * x, exponent));
}

std::string to_string(DeviceOutcome o)
{
    switch (o)
    {
    case DeviceOutcome::granted:
        return "granted";
    case DeviceOutcome::lost:
        return "lost";
    case DeviceOutcome::false_negative:
        return "false-negative";
    }
    return "?";
}

void SucreOptions::validate() const
{
    rule.validate();
    require(num_antennas >= 1, "ra.num_antennas must be >= 1");
    require(dl_power > 0.0, "ra.dl_power must be > 0");
}

std::vector<double> estimate_alpha(const std::vector<int> &contenders, const RaPopulation &pop,
                                   const SucreOptions &opt, Rng &rng)
{
    const std::size_t n = contenders.size();
    std::vector<double> alpha(n);
    if (opt.mode == RaMode::asymptotic)
    {
        double total = 0.0;
        for (int k : contenders)
            total += pop.rx_power(k);
        std::fill(alpha.begin(), alpha.end(), total);
        return alpha;
    }

    // y = sum_i sqrt(rho_i beta_i) g_i + noise after pilot correlation, and
    // z_k = sqrt(q beta_k) g_k^T conj(y) / |y| + eta_k. Channel hardening gives
    // q rho_k beta_k^2 M / Re(z_k)^2 ~ alpha + noise_var.
    const int M = opt.num_antennas;
    std::vector<CVec> g;
    g.reserve(n);
    CVec y = complex_normal_vector(rng, M, pop.noise_var);
    for (int k : contenders)
    {
        g.push_back(complex_normal_vector(rng, M, 1.0));
        y += std::sqrt(pop.rx_power(k)) * g.back();
    }
    const double ynorm = y.norm();
    for (std::size_t i = 0; i < n; ++i)
    {
        const int k = contenders[i];
        const cplx eta = complex_normal(rng, pop.noise_var);
        const double z = (std::sqrt(opt.dl_power * pop.beta[k]) * (g[i].transpose() * y.conjugate())(0) / ynorm + eta).real();
        if (!(z > 0.0))
        {
            alpha[i] = kInf;
            continue;
        }
        const double own = pop.rx_power(k);
        const double est = opt.dl_power * pop.rho[k] * pop.beta[k] * pop.beta[k] * M / (z * z) - pop.noise_var;
        alpha[i] = std::max(est, own);
    }
    return alpha;
}

SucreBlockResult sucre_block_with_pilots(const std::vector<int> &active, const std::vector<int> &pilots,
                                         const RaPopulation &pop, const PilotPool &pool,
                                         const SucreOptions &opt, Rng &rng)
{
    require(pilots.size() == active.size(), "one pilot per active device is required");
    SucreBlockResult res;
    res.pilot = pilots;
    res.outcome.assign(active.size(), DeviceOutcome::lost);
    res.contenders.assign(pool.size, 0);
    res.retransmitters.assign(pool.size, 0);

    std::vector<std::vector<int>> slot(pool.size); // indices into active
    for (std::size_t i = 0; i < active.size(); ++i)
    {
        require(pilots[i] >= 0 && pilots[i] < pool.size, "pilot index out of range");
        slot[pilots[i]].push_back(static_cast<int>(i));
    }

    std::vector<int> ids;
    std::vector<char> sends;
    for (int t = 0; t < pool.size; ++t)
    {
        const auto &idx = slot[t];
        res.contenders[t] = static_cast<int>(idx.size());
        if (idx.empty())
            continue;
        ids.clear();
        double total = 0.0;
        for (int i : idx)
        {
            ids.push_back(active[i]);
            total += pop.rx_power(active[i]);
        }
        const std::vector<double> alpha = estimate_alpha(ids, pop, opt, rng);
        sends.assign(idx.size(), 0);
        int senders = 0;
        for (std::size_t j = 0; j < idx.size(); ++j)
        {
            const double p = opt.rule.retransmit_probability(pop.rx_power(ids[j]), alpha[j]);
            // Hard decisions consume no randomness.
            const bool s = opt.rule.kind == DecisionRule::Kind::hard ? p >= 1.0 : bernoulli(rng, p);
            sends[j] = s;
            senders += s;
        }
        res.retransmitters[t] = senders;
        if (idx.size() >= 2)
        {
            ++res.collided_pilots;
            if (senders == 1)
                ++res.resolved_collisions;
        }
        for (std::size_t j = 0; j < idx.size(); ++j)
        {
            DeviceOutcome o = DeviceOutcome::lost;
            if (sends[j] && senders == 1)
                o = DeviceOutcome::granted;
            else if (!sends[j] && pop.rx_power(ids[j]) > 0.5 * total)
                o = DeviceOutcome::false_negative;
            res.outcome[idx[j]] = o;
        }
    }
    return res;
}

SucreBlockResult sucre_block(const std::vector<int> &active, const RaPopulation &pop, const PilotPool &pool,
                             const SucreOptions &opt, Rng &rng)
{
    std::vector<int> pilots(active.size());
    for (auto &p : pilots)
        p = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(pool.size)));
    return sucre_block_with_pilots(active, pilots, pop, pool, opt, rng);
}

std::string to_string(RaProtocol p)
{
    switch (p)
    {
    case RaProtocol::baseline:
        return "baseline";
    case RaProtocol::sucre_hard:
        return "sucre-hard";
    case RaProtocol::sucre_soft:
        return "sucre-soft";
    }
    return "?";
}

RaProtocol protocol_from_string(const std::string &s)
{
    if (s == "baseline")
        return RaProtocol::baseline;
    if (s == "sucre-hard")
        return RaProtocol::sucre_hard;
    if (s == "sucre-soft")
        return RaProtocol::sucre_soft;
    throw ConfigError("unknown RA protocol '" + s + "' (expected baseline, sucre-hard or sucre-soft)");
}

void RaSimConfig::validate() const
{
    require(max_attempts >= 1, "ra.max_attempts must be >= 1");
    require(is_fraction(retry_prob) && retry_prob > 0.0, "ra.retry_prob must lie in (0, 1]");
    require(blocks >= 1, "ra.blocks must be >= 1");
    require(warmup_blocks >= 0, "ra.warmup_blocks must be >= 0");
    require(replications >= 1, "ra.replications must be >= 1");
    require(batches >= 1 && batches <= blocks, "ra.batches must lie in [1, blocks]");
    sucre.validate();
    soft_rule.validate();
    require(soft_rule.kind == DecisionRule::Kind::soft, "ra soft rule must be of soft kind");
}

namespace {

struct RaAcc
{
    std::uint64_t packets = 0;
    std::uint64_t packet_attempts = 0;
    std::uint64_t dropped = 0;
    std::uint64_t attempts = 0;
    std::uint64_t failed = 0;
    std::uint64_t collisions = 0;
    std::uint64_t resolved = 0;
    Moments batch_means;

    void merge(const RaAcc &o)
    {
        packets += o.packets;
        packet_attempts += o.packet_attempts;
        dropped += o.dropped;
        attempts += o.attempts;
        failed += o.failed;
        collisions += o.collisions;
        resolved += o.resolved;
        batch_means.merge(o.batch_means);
    }
};

// Outcome of one access block: granted[i] for active[i], and collision counts.
struct BlockOutcome
{
    std::vector<char> granted;
    int collisions = 0;
    int resolved = 0;
};

void contend(const std::vector<int> &active, const RaPopulation &pop, const PilotPool &pool, RaProtocol protocol,
             const SucreOptions &opt, Rng &rng, BlockOutcome &out)
{
    out.granted.assign(active.size(), 0);
    out.collisions = 0;
    out.resolved = 0;
    if (active.empty())
        return;
    if (protocol == RaProtocol::baseline)
    {
        std::vector<int> count(pool.size, 0);
        std::vector<int> pilot(active.size());
        for (auto &p : pilot)
        {
            p = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(pool.size)));
            ++count[p];
        }
        for (std::size_t i = 0; i < active.size(); ++i)
            out.granted[i] = count[pilot[i]] == 1;
        for (int c : count)
            out.collisions += c >= 2;
        return;
    }
    const SucreBlockResult r = sucre_block(active, pop, pool, opt, rng);
    for (std::size_t i = 0; i < active.size(); ++i)
        out.granted[i] = r.outcome[i] == DeviceOutcome::granted;
    out.collisions = r.collided_pilots;
    out.resolved = r.resolved_collisions;
}

} // namespace

RaMetrics simulate_ra(const RaPopulation &pop, const PilotPool &pool, RaProtocol protocol,
                      const RaSimConfig &cfg, std::uint64_t seed, int workers)
{
    pop.validate();
    pool.validate();
    cfg.validate();

    SucreOptions opt = cfg.sucre;
    if (protocol == RaProtocol::sucre_hard)
        opt.rule = DecisionRule::hard();
    else if (protocol == RaProtocol::sucre_soft)
        opt.rule = cfg.soft_rule;

    const int K = pop.total_devices;
    const int total_blocks = cfg.warmup_blocks + cfg.blocks;

    auto body = [&](std::uint64_t rep, RaAcc &acc) {
        Rng rng = substream(seed, StreamId::ra_blocks, rep);
        std::vector<int> attempts(K, 0);
        std::vector<char> backlogged(K, 0);
        std::vector<char> taken(K, 0);
        std::vector<int> backlog;
        std::vector<int> active;
        std::vector<int> fresh;
        BlockOutcome outcome;

        std::uint64_t batch_packets = 0;
        std::uint64_t batch_attempts = 0;
        const int batch_len = cfg.blocks / cfg.batches;

        for (int blk = 0; blk < total_blocks; ++blk)
        {
            const bool measured = blk >= cfg.warmup_blocks;
            active.clear();
            // Backlogged devices retry independently.
            for (int k : backlog)
                if (bernoulli(rng, cfg.retry_prob))
                    active.push_back(k);
            // Idle devices activate independently with P_a.
            const int idle = K - static_cast<int>(backlog.size());
            int n_new = 0;
            if (idle > 0 && pop.activation_prob > 0.0)
                n_new = std::binomial_distribution<int>(idle, pop.activation_prob)(rng);
            fresh.clear();
            sample_distinct(K, n_new, rng, fresh, taken, [&](int i) { return !backlogged[i]; });
            for (int k : fresh)
            {
                backlogged[k] = 1;
                backlog.push_back(k);
                active.push_back(k);
            }

            contend(active, pop, pool, protocol, opt, rng, outcome);

            for (std::size_t i = 0; i < active.size(); ++i)
            {
                const int k = active[i];
                ++attempts[k];
                const bool ok = outcome.granted[i];
                if (measured)
                {
                    ++acc.attempts;
                    acc.failed += !ok;
                }
                if (ok || attempts[k] >= cfg.max_attempts)
                {
                    if (measured)
                    {
                        ++acc.packets;
                        acc.packet_attempts += attempts[k];
                        acc.dropped += !ok;
                        ++batch_packets;
                        batch_attempts += attempts[k];
                    }
                    attempts[k] = 0;
                    backlogged[k] = 0;
                }
            }
            backlog.erase(std::remove_if(backlog.begin(), backlog.end(), [&](int k) { return !backlogged[k]; }),
                          backlog.end());
            if (measured)
            {
                acc.collisions += outcome.collisions;
                acc.resolved += outcome.resolved;
                const int pos = blk - cfg.warmup_blocks + 1;
                if (pos % batch_len == 0 && pos / batch_len <= cfg.batches)
                {
                    if (batch_packets > 0)
                        acc.batch_means.add(static_cast<double>(batch_attempts) / batch_packets);
                    batch_packets = 0;
                    batch_attempts = 0;
                }
            }
        }
    };

    const RaAcc acc = run_trials<RaAcc>(static_cast<std::uint64_t>(cfg.replications), workers,
                                        [] { return RaAcc{}; }, body);

    RaMetrics m;
    m.packets = acc.packets;
    m.attempts = acc.attempts;
    m.failed_attempts = acc.failed;
    m.collisions = acc.collisions;
    m.resolved = acc.resolved;
    if (acc.packets > 0)
    {
        m.avg_attempts = static_cast<double>(acc.packet_attempts) / acc.packets;
        m.drop_prob = static_cast<double>(acc.dropped) / acc.packets;
    }
    if (acc.attempts > 0)
        m.failure_prob = static_cast<double>(acc.failed) / acc.attempts;
    if (acc.collisions > 0)
        m.resolved_collision_frac = static_cast<double>(acc.resolved) / acc.collisions;
    m.avg_attempts_stderr = acc.batch_means.stderr_mean();
    return m;
}

void CollisionStats::merge(const CollisionStats &o)
{
    blocks += o.blocks;
    collisions += o.collisions;
    resolved += o.resolved;
    false_negatives += o.false_negatives;
    multi_winner += o.multi_winner;
}

CollisionStats sucre_collision_stats(const RaPopulation &pop, const PilotPool &pool, const SucreOptions &opt,
                                     std::uint64_t blocks, std::uint64_t seed, int workers)
{
    pop.validate();
    pool.validate();
    opt.validate();
    const int K = pop.total_devices;
    auto body = [&](std::uint64_t b, CollisionStats &acc) {
        Rng rng = substream(seed, StreamId::ra_collisions, b);
        const int n = pop.activation_prob > 0.0 ? std::binomial_distribution<int>(K, pop.activation_prob)(rng) : 0;
        std::vector<int> active;
        std::vector<char> taken(K, 0);
        sample_distinct(K, n, rng, active, taken, [](int) { return true; });
        const SucreBlockResult r = sucre_block(active, pop, pool, opt, rng);
        ++acc.blocks;
        acc.collisions += r.collided_pilots;
        acc.resolved += r.resolved_collisions;
        for (std::size_t t = 0; t < r.contenders.size(); ++t)
            acc.multi_winner += r.contenders[t] >= 2 && r.retransmitters[t] >= 2;
        for (auto o : r.outcome)
            acc.false_negatives += o == DeviceOutcome::false_negative;
    };
    return run_trials<CollisionStats>(blocks, workers, [] { return CollisionStats{}; }, body);
}

// ---------------------------------------------------------------- pilot RA

void PilotRaConfig::validate() const
{
    require(num_slots >= 1, "pilot_ra.num_slots must be >= 1");
    require(num_antennas >= 1, "pilot_ra.num_antennas must be >= 1");
}

std::vector<double> pilot_ra_rate_with_pilots(const std::vector<double> &beta, const std::vector<double> &rho,
                                              double noise_var, const std::vector<std::vector<int>> &pilots,
                                              const PilotRaConfig &cfg)
{
    cfg.validate();
    const std::size_t K = beta.size();
    require(rho.size() == K && pilots.size() == K, "pilot RA needs beta, rho and pilots per device");
    require(noise_var > 0.0, "pilot RA noise_var must be > 0");
    const int L = cfg.num_slots;
    for (const auto &p : pilots)
        require(static_cast<int>(p.size()) == L, "pilot RA needs one pilot per slot per device");

    std::vector<double> coherent(K); // rho * beta^2
    for (std::size_t k = 0; k < K; ++k)
        coherent[k] = rho[k] * beta[k] * beta[k];

    std::vector<double> rate(K, 0.0);
    for (int l = 0; l < L; ++l)
    {
        // Total coherent power per pilot in this slot.
        std::vector<std::pair<int, double>> load; // (pilot, sum), small and sorted by pilot
        for (std::size_t k = 0; k < K; ++k)
        {
            const int p = pilots[k][l];
            auto it = std::lower_bound(load.begin(), load.end(), p,
                                       [](const auto &e, int key) { return e.first < key; });
            if (it == load.end() || it->first != p)
                it = load.insert(it, {p, 0.0});
            it->second += coherent[k];
        }
        for (std::size_t k = 0; k < K; ++k)
        {
            const int p = pilots[k][l];
            const auto it = std::lower_bound(load.begin(), load.end(), p,
                                             [](const auto &e, int key) { return e.first < key; });
            const double interference = it->second - coherent[k];
            double sinr = interference > 0.0 ? coherent[k] / interference : kInf;
            if (cfg.cap == SinrCap::finite)
                sinr = std::min(sinr, rho[k] * beta[k] * cfg.num_antennas / noise_var);
            rate[k] += std::log2(1.0 + sinr);
        }
    }
    for (auto &r : rate)
        r /= L;
    return rate;
}

std::vector<double> pilot_ra_rate(const std::vector<double> &beta, const std::vector<double> &rho,
                                  double noise_var, const PilotPool &pool, const PilotRaConfig &cfg, Rng &rng)
{
    pool.validate();
    cfg.validate();
    std::vector<std::vector<int>> pilots(beta.size(), std::vector<int>(cfg.num_slots));
    for (int l = 0; l < cfg.num_slots; ++l)
        for (auto &p : pilots)
            p[l] = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(pool.size)));
    return pilot_ra_rate_with_pilots(beta, rho, noise_var, pilots, cfg);
}

// ---------------------------------------------------------------- coded RA

std::string to_string(DecodeModel m)
{
    return m == DecodeModel::genie_singleton ? "genie-singleton" : "sinr-threshold";
}

DecodeModel decode_model_from_string(const std::string &s)
{
    if (s == "genie-singleton")
        return DecodeModel::genie_singleton;
    if (s == "sinr-threshold")
        return DecodeModel::sinr_threshold;
    throw ConfigError("unknown decode model '" + s + "' (expected genie-singleton or sinr-threshold)");
}

void CodedRaConfig::validate() const
{
    require(num_slots >= 1, "coded_ra.num_slots must be >= 1");
    require(is_fraction(slot_activation_prob), "coded_ra.slot_activation_prob must lie in [0, 1]");
    require(sinr_threshold > 0.0, "coded_ra.sinr_threshold must be > 0");
    require(num_antennas >= 1, "coded_ra.num_antennas must be >= 1");
}

void TransmissionPattern::validate() const
{
    require(num_slots >= 1 && num_pilots >= 1, "transmission pattern needs >= 1 slot and pilot");
    for (const auto &row : pilot)
    {
        require(static_cast<int>(row.size()) == num_slots, "transmission pattern row has wrong slot count");
        for (int p : row)
            require(p >= -1 && p < num_pilots, "transmission pattern pilot out of range");
    }
}

int CodedRaResult::num_decoded() const
{
    return static_cast<int>(std::count(decoded.begin(), decoded.end(), true));
}

namespace {

// Decodable member of one cell given the undecoded members, or -1.
int decodable_in_cell(std::span<const int> members, const std::vector<bool> &decoded,
                      const CodedRaConfig &cfg, const CodedRaPowers &powers)
{
    int alone = -1;
    int count = 0;
    double total = 0.0;
    for (int d : members)
    {
        if (decoded[d])
            continue;
        ++count;
        alone = d;
        if (cfg.decode_model == DecodeModel::sinr_threshold)
            total += powers.rho[d] * powers.beta[d] * powers.beta[d];
    }
    if (count == 0)
        return -1;
    if (cfg.decode_model == DecodeModel::genie_singleton)
        return count == 1 ? alone : -1;

    // Strongest undecoded member first.
    int best = -1;
    double best_sinr = -1.0;
    for (int d : members)
    {
        if (decoded[d])
            continue;
        const double own = powers.rho[d] * powers.beta[d] * powers.beta[d];
        const double interference = total - own;
        double sinr = interference > 0.0 ? own / interference : kInf;
        sinr = std::min(sinr, powers.rho[d] * powers.beta[d] * cfg.num_antennas / powers.noise_var);
        if (sinr > best_sinr)
        {
            best_sinr = sinr;
            best = d;
        }
    }
    return best_sinr >= cfg.sinr_threshold ? best : -1;
}

void check_powers(const TransmissionPattern &tx, const CodedRaConfig &cfg, const CodedRaPowers &powers)
{
    if (cfg.decode_model != DecodeModel::sinr_threshold)
        return;
    const std::size_t n = static_cast<std::size_t>(tx.num_devices());
    require(powers.beta.size() == n && powers.rho.size() == n, "sinr-threshold decoding needs beta and rho per device");
    require(powers.noise_var > 0.0, "sinr-threshold decoding needs noise_var > 0");
}

// Members of cell c (slot-major) are member[offset[c] .. offset[c+1]), in device order.
struct CellMembers
{
    std::vector<int> offset;
    std::vector<int> member;

    std::size_t size() const { return offset.size() - 1; }
    std::span<const int> operator[](std::size_t c) const
    {
        return {member.data() + offset[c], static_cast<std::size_t>(offset[c + 1] - offset[c])};
    }
};

CellMembers cell_members(const TransmissionPattern &tx)
{
    const std::size_t n_cells = static_cast<std::size_t>(tx.num_slots) * tx.num_pilots;
    CellMembers cells;
    cells.offset.assign(n_cells + 1, 0);
    for (int d = 0; d < tx.num_devices(); ++d)
        for (int l = 0; l < tx.num_slots; ++l)
            if (tx.pilot[d][l] >= 0)
                ++cells.offset[static_cast<std::size_t>(l) * tx.num_pilots + tx.pilot[d][l] + 1];
    for (std::size_t c = 0; c < n_cells; ++c)
        cells.offset[c + 1] += cells.offset[c];
    cells.member.resize(cells.offset.back());
    std::vector<int> fill(cells.offset.begin(), cells.offset.end() - 1);
    for (int d = 0; d < tx.num_devices(); ++d)
        for (int l = 0; l < tx.num_slots; ++l)
            if (tx.pilot[d][l] >= 0)
                cells.member[fill[static_cast<std::size_t>(l) * tx.num_pilots + tx.pilot[d][l]]++] = d;
    return cells;
}

} // namespace

CodedRaResult coded_ra_decode(const TransmissionPattern &tx, const CodedRaConfig &cfg, const CodedRaPowers &powers)
{
    tx.validate();
    cfg.validate();
    check_powers(tx, cfg, powers);
    const auto cells = cell_members(tx);

    CodedRaResult res;
    res.decoded.assign(tx.num_devices(), false);
    res.trace.reserve(tx.num_devices());
    // Sweep cells in slot-major order until a sweep decodes nothing.
    for (bool progress = true; progress;)
    {
        progress = false;
        for (std::size_t c = 0; c < cells.size(); ++c)
        {
            for (;;)
            {
                const int d = decodable_in_cell(cells[c], res.decoded, cfg, powers);
                if (d < 0)
                    break;
                res.decoded[d] = true;
                res.trace.push_back({d, static_cast<int>(c / tx.num_pilots), static_cast<int>(c % tx.num_pilots)});
                progress = true;
            }
        }
        res.iterations += progress;
    }
    return res;
}

bool replay_trace(const TransmissionPattern &tx, const CodedRaConfig &cfg, const CodedRaResult &result,
                  const CodedRaPowers &powers)
{
    tx.validate();
    check_powers(tx, cfg, powers);
    const auto cells = cell_members(tx);
    std::vector<bool> decoded(tx.num_devices(), false);
    for (const auto &e : result.trace)
    {
        if (e.device < 0 || e.device >= tx.num_devices() || e.slot < 0 || e.slot >= tx.num_slots || e.pilot < 0 ||
            e.pilot >= tx.num_pilots || decoded[e.device] || tx.pilot[e.device][e.slot] != e.pilot)
            return false;
        const auto members = cells[static_cast<std::size_t>(e.slot) * tx.num_pilots + e.pilot];
        if (decodable_in_cell(members, decoded, cfg, powers) != e.device)
            return false;
        decoded[e.device] = true;
    }
    return decoded == result.decoded;
}

TransmissionPattern draw_transmissions(int num_devices, const PilotPool &pool, const CodedRaConfig &cfg, Rng &rng)
{
    pool.validate();
    cfg.validate();
    TransmissionPattern tx;
    tx.num_slots = cfg.num_slots;
    tx.num_pilots = pool.size;
    tx.pilot.assign(num_devices, std::vector<int>(cfg.num_slots, -1));
    for (auto &row : tx.pilot)
    {
        const int frame_pilot = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(pool.size)));
        for (int l = 0; l < cfg.num_slots; ++l)
        {
            if (!bernoulli(rng, cfg.slot_activation_prob))
                continue;
            row[l] = cfg.pattern == PilotPattern::per_frame
                         ? frame_pilot
                         : static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(pool.size)));
        }
    }
    return tx;
}

CodedRaResult coded_ra_frame(const std::vector<int> &active, const RaPopulation &pop, const PilotPool &pool,
                             const CodedRaConfig &cfg, Rng &rng)
{
    const TransmissionPattern tx = draw_transmissions(static_cast<int>(active.size()), pool, cfg, rng);
    CodedRaPowers powers;
    if (cfg.decode_model == DecodeModel::sinr_threshold)
    {
        powers.noise_var = pop.noise_var;
        for (int k : active)
        {
            powers.beta.push_back(pop.beta[k]);
            powers.rho.push_back(pop.rho[k]);
        }
    }
    return coded_ra_decode(tx, cfg, powers);
}

} // namespace mmimo
