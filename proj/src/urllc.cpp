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

#include "mmimo/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmimo {

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::quiet_NaN();

// Outage counts for a grid of (frame row, training parameter) thresholds plus
// SNR moments per parameter.
struct GridAcc
{
    std::size_t cols = 0;
    std::vector<Moments> gamma;
    std::vector<std::uint64_t> outages;
    std::uint64_t trials = 0;

    GridAcc(std::size_t rows, std::size_t cols_) : cols(cols_), gamma(cols_), outages(rows * cols_, 0) {}

    void merge(const GridAcc &o)
    {
        trials += o.trials;
        for (std::size_t i = 0; i < gamma.size(); ++i)
            gamma[i].merge(o.gamma[i]);
        for (std::size_t i = 0; i < outages.size(); ++i)
            outages[i] += o.outages[i];
    }
};

// thresholds[row * P + p]; NaN marks an infeasible cell (counted as outage).
GridAcc run_grid(const LinkSampler &sampler, const std::vector<double> &thresholds, std::size_t rows,
                 const McOptions &opts)
{
    const std::size_t P = sampler.params().size();
    return run_trials<GridAcc>(
        opts.trials, opts.workers, [&] { return GridAcc(rows, P); },
        [&](std::uint64_t trial, GridAcc &acc) {
            thread_local std::vector<double> gammas;
            sampler.sample(trial, gammas);
            ++acc.trials;
            for (std::size_t p = 0; p < P; ++p)
            {
                acc.gamma[p].add(gammas[p]);
                for (std::size_t r = 0; r < rows; ++r)
                {
                    const double th = thresholds[r * P + p];
                    if (std::isnan(th) || gammas[p] < th)
                        ++acc.outages[r * P + p];
                }
            }
        });
}

double threshold_or_nan(const FrameConfig &frame, int overhead)
{
    if (frame.total_symbols - overhead < 1)
        return kInfeasible;
    return rate_for(frame, overhead).gamma_th;
}

CorrelationSpectrum identity_spectrum(int M)
{
    CorrelationSpectrum s;
    s.R = CMat::Identity(M, M);
    s.V = CMat::Identity(M, M);
    s.eigenvalues = RVec::Ones(M);
    return s;
}

double safe_gamma(const ChannelRealization &h, const Precoder &w, const LinkBudget &b)
{
    return snr_dl(h, w, b).gamma;
}

} // namespace

void FrameConfig::validate() const
{
    if (total_symbols < 1)
        throw ConfigError("frame.total_symbols must be >= 1");
    if (payload_bits < 1)
        throw ConfigError("frame.payload_bits must be >= 1");
    if (symbols_per_slot < 1)
        throw ConfigError("frame.symbols_per_slot must be >= 1");
    if (guard_symbols < 0)
        throw ConfigError("frame.guard_symbols must be >= 0");
    slots_per_ms(scs_khz);
}

double slots_per_ms(int scs_khz)
{
    switch (scs_khz)
    {
    case 15:
        return 1.0;
    case 30:
        return 2.0;
    case 60:
        return 4.0;
    case 120:
        return 8.0;
    default:
        throw ConfigError("frame.scs_khz must be one of 15, 30, 60, 120; got " + std::to_string(scs_khz));
    }
}

double FrameConfig::latency_ms_for(int symbols) const
{
    return static_cast<double>(symbols) / (symbols_per_slot * slots_per_ms(scs_khz));
}

RateSpec rate_for_bits(int payload_bits, int data_symbols)
{
    if (data_symbols < 1)
        throw ConfigError("no data symbols left (N_d = " + std::to_string(data_symbols) + ")");
    if (payload_bits < 1)
        throw ConfigError("payload_bits must be >= 1");
    RateSpec r;
    r.rate = static_cast<double>(payload_bits) / data_symbols;
    r.gamma_th = std::exp2(r.rate) - 1.0;
    return r;
}

RateSpec rate_for(const FrameConfig &frame, int overhead_symbols)
{
    return rate_for_bits(frame.payload_bits, frame.total_symbols - overhead_symbols);
}

std::string to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::tdd_mrt:
        return "tdd-mrt";
    case Scheme::tdd_sv:
        return "tdd-sv";
    case Scheme::fdd:
        return "fdd";
    case Scheme::perfect_csi:
        return "perfect-csi";
    }
    return "?";
}

Scheme scheme_from_string(std::string_view name)
{
    if (name == "tdd-mrt")
        return Scheme::tdd_mrt;
    if (name == "tdd-sv")
        return Scheme::tdd_sv;
    if (name == "fdd")
        return Scheme::fdd;
    if (name == "perfect-csi")
        return Scheme::perfect_csi;
    throw ConfigError("unknown scheme '" + std::string(name) + "' (expected tdd-mrt, tdd-sv, fdd, perfect-csi)");
}

void ChannelConfig::validate() const
{
    array.validate();
    if (kind == ChannelKind::sparse)
        cluster.validate();
}

OutageResult OutageResult::from_counts(std::uint64_t outages, std::uint64_t trials)
{
    OutageResult r;
    r.trials = trials;
    r.outages = outages;
    r.p_outage = trials ? static_cast<double>(outages) / static_cast<double>(trials) : 0.0;
    r.ci95 = wilson_interval(outages, trials);
    return r;
}

int overhead_symbols(Scheme scheme, int param, const FrameConfig &frame)
{
    switch (scheme)
    {
    case Scheme::tdd_mrt:
    case Scheme::tdd_sv:
        return param + frame.guard_symbols;
    case Scheme::fdd:
        return fdd_overhead_symbols(param);
    case Scheme::perfect_csi:
        return 0;
    }
    return 0;
}

std::vector<int> feasible_params(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame)
{
    std::vector<int> out;
    if (scheme == Scheme::perfect_csi)
    {
        out.push_back(0);
        return out;
    }
    int upper = frame.total_symbols;
    if (scheme == Scheme::fdd)
        upper = channel.kind == ChannelKind::sparse
                    ? std::min(channel.cluster.num_paths, channel.array.num_antennas)
                    : channel.array.num_antennas;
    for (int p = 1; p <= upper; ++p)
        if (frame.total_symbols - overhead_symbols(scheme, p, frame) >= 1)
            out.push_back(p);
    return out;
}

LinkSampler::LinkSampler(Scheme scheme, ChannelConfig channel, LinkBudget budget, std::vector<int> params,
                         std::uint64_t seed)
    : scheme_(scheme), channel_(std::move(channel)), budget_(budget), params_(std::move(params)), seed_(seed)
{
    channel_.validate();
    budget_.validate();
    if (params_.empty())
        throw ConfigError("no training parameters to evaluate");
    for (int p : params_)
        if (p < 1 && scheme_ != Scheme::perfect_csi)
            throw ConfigError("training parameter must be >= 1, got " + std::to_string(p));

    if (channel_.kind == ChannelKind::iid)
    {
        frozen_spectrum_ = identity_spectrum(channel_.array.num_antennas);
    }
    else if (channel_.freeze_paths)
    {
        Rng rng = substream(seed_, StreamId::urllc_single, std::numeric_limits<std::uint64_t>::max());
        frozen_paths_ = draw_paths(channel_.cluster, channel_.array, rng);
        frozen_spectrum_ = correlation_spectrum(frozen_paths_, false);
        has_frozen_ = true;
    }
}

void LinkSampler::sample(std::uint64_t trial, std::vector<double> &gammas) const
{
    gammas.assign(params_.size(), 0.0);
    Rng rng = substream(seed_, StreamId::urllc_single, trial);

    const bool sparse = channel_.kind == ChannelKind::sparse;
    PathSet local_paths;
    const PathSet *paths = nullptr;
    if (sparse)
    {
        if (has_frozen_)
            paths = &frozen_paths_;
        else
        {
            local_paths = draw_paths(channel_.cluster, channel_.array, rng);
            paths = &local_paths;
        }
    }
    const ChannelRealization h = sparse ? realize_channel(*paths, rng) : realize_iid(channel_.array, rng);

    if (scheme_ == Scheme::perfect_csi)
    {
        const double g = budget_.snr() * h.h.squaredNorm();
        std::fill(gammas.begin(), gammas.end(), g);
        return;
    }

    CorrelationSpectrum local_spec;
    const CorrelationSpectrum *spec = &frozen_spectrum_;
    if (scheme_ != Scheme::tdd_mrt && sparse && !has_frozen_)
    {
        local_spec = correlation_spectrum(*paths, false);
        spec = &local_spec;
    }

    const int max_param = *std::max_element(params_.begin(), params_.end());
    try
    {
        if (scheme_ == Scheme::fdd)
        {
            const int ns_max = std::min(max_param, spec->rank());
            const FddFeedback fb = fdd_train_feedback(h, *spec, ns_max, budget_, rng);
            for (std::size_t i = 0; i < params_.size(); ++i)
            {
                const int ns = std::min(params_[i], ns_max);
                const FddFeedback sub{fb.beta_hat.head(ns), ns};
                gammas[i] = safe_gamma(h, fdd_precoder(sub, *spec), budget_);
            }
            return;
        }

        const NestedTrainingNoise noise(h.h.size(), max_param, rng);
        for (std::size_t i = 0; i < params_.size(); ++i)
        {
            const ChannelEstimate est = noise.estimate(h, params_[i], budget_);
            const Precoder w = scheme_ == Scheme::tdd_sv ? sv_precoder(est, *spec) : mrt(est);
            gammas[i] = safe_gamma(h, w, budget_);
        }
    }
    catch (const DegenerateInput &)
    {
        // A vanishing estimate has probability zero; count it as a failed link.
    }
}

std::vector<SweepPoint> sweep_training(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame,
                                       const std::vector<int> &params, const LinkBudget &budget,
                                       const McOptions &opts)
{
    frame.validate();
    if (params.empty())
        throw ConfigError("training sweep range is empty");
    if (opts.trials < 1)
        throw ConfigError("trials must be >= 1");
    for (int p : params)
        if (frame.total_symbols - overhead_symbols(scheme, p, frame) < 1)
            throw ConfigError("training parameter " + std::to_string(p) + " leaves no data symbols");

    const std::vector<int> sampled = scheme == Scheme::perfect_csi ? std::vector<int>(params.size(), 1) : params;
    const LinkSampler sampler(scheme, channel, budget, sampled, opts.seed);
    std::vector<double> thresholds(params.size());
    for (std::size_t p = 0; p < params.size(); ++p)
        thresholds[p] = threshold_or_nan(frame, overhead_symbols(scheme, params[p], frame));

    const GridAcc acc = run_grid(sampler, thresholds, 1, opts);
    std::vector<SweepPoint> out(params.size());
    for (std::size_t p = 0; p < params.size(); ++p)
    {
        out[p].param = params[p];
        out[p].mean_gamma = acc.gamma[p].mean();
        out[p].rsd_gamma = acc.gamma[p].rsd();
        out[p].outage = OutageResult::from_counts(acc.outages[p], acc.trials);
    }
    return out;
}

OutageResult outage_mc(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame, int param,
                       const LinkBudget &budget, const McOptions &opts)
{
    return sweep_training(scheme, channel, frame, {param}, budget, opts).front().outage;
}

BestTraining pick_best(const std::vector<SweepPoint> &points)
{
    if (points.empty())
        throw ConfigError("no candidate training parameters");
    const SweepPoint *best = &points.front();
    for (const auto &p : points)
        if (p.outage.outages < best->outage.outages ||
            (p.outage.outages == best->outage.outages && p.param < best->param))
            best = &p;
    return {best->param, best->outage};
}

BestTraining best_training(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame,
                           const std::vector<int> &candidates, const LinkBudget &budget, const McOptions &opts)
{
    return pick_best(sweep_training(scheme, channel, frame, candidates, budget, opts));
}

BestTraining best_training(Scheme scheme, const ChannelConfig &channel, const FrameConfig &frame,
                           const LinkBudget &budget, const McOptions &opts)
{
    const std::vector<int> candidates = feasible_params(scheme, channel, frame);
    if (candidates.empty())
        throw ConfigError("no feasible training length for a frame of " + std::to_string(frame.total_symbols) +
                          " symbols");
    return best_training(scheme, channel, frame, candidates, budget, opts);
}

std::vector<LatencyPoint> latency_reliability_curve(const std::vector<Scheme> &schemes, const ChannelConfig &channel,
                                                    const FrameConfig &frame, const std::vector<int> &frame_lengths,
                                                    const LinkBudget &budget, const McOptions &opts)
{
    if (frame_lengths.empty())
        throw ConfigError("frame length range is empty");
    if (opts.trials < 1)
        throw ConfigError("trials must be >= 1");
    frame.validate();

    std::vector<LatencyPoint> out;
    for (Scheme scheme : schemes)
    {
        FrameConfig longest = frame;
        longest.total_symbols = *std::max_element(frame_lengths.begin(), frame_lengths.end());
        std::vector<int> params = feasible_params(scheme, channel, longest);
        if (params.empty())
            throw ConfigError("no feasible training for scheme " + to_string(scheme));
        const std::vector<int> sampled = scheme == Scheme::perfect_csi ? std::vector<int>{1} : params;
        const LinkSampler sampler(scheme, channel, budget, sampled, opts.seed);

        const std::size_t P = params.size();
        std::vector<double> thresholds(frame_lengths.size() * P);
        for (std::size_t r = 0; r < frame_lengths.size(); ++r)
        {
            FrameConfig f = frame;
            f.total_symbols = frame_lengths[r];
            f.validate();
            for (std::size_t p = 0; p < P; ++p)
                thresholds[r * P + p] = threshold_or_nan(f, overhead_symbols(scheme, params[p], f));
        }

        const GridAcc acc = run_grid(sampler, thresholds, frame_lengths.size(), opts);
        for (std::size_t r = 0; r < frame_lengths.size(); ++r)
        {
            std::vector<SweepPoint> row;
            for (std::size_t p = 0; p < P; ++p)
            {
                if (std::isnan(thresholds[r * P + p]))
                    continue;
                SweepPoint sp;
                sp.param = params[p];
                sp.outage = OutageResult::from_counts(acc.outages[r * P + p], acc.trials);
                row.push_back(sp);
            }
            if (row.empty())
                throw ConfigError("frame of " + std::to_string(frame_lengths[r]) + " symbols has no feasible training");
            const BestTraining best = pick_best(row);
            LatencyPoint lp;
            lp.scheme = scheme;
            lp.total_symbols = frame_lengths[r];
            lp.latency_ms = frame.latency_ms_for(frame_lengths[r]);
            lp.best_param = scheme == Scheme::perfect_csi ? 0 : best.param;
            lp.outage = best.outage;
            out.push_back(lp);
        }
    }
    return out;
}

namespace {

struct TwoUserAcc
{
    std::size_t cols = 0;
    std::vector<std::uint64_t> sdm1, sdm2, tdm1, tdm2;
    std::uint64_t trials = 0;

    TwoUserAcc(std::size_t rows, std::size_t cols_)
        : cols(cols_), sdm1(rows * cols_), sdm2(rows * cols_), tdm1(rows * cols_), tdm2(rows * cols_)
    {
    }
    void merge(const TwoUserAcc &o)
    {
        trials += o.trials;
        for (std::size_t i = 0; i < sdm1.size(); ++i)
        {
            sdm1[i] += o.sdm1[i];
            sdm2[i] += o.sdm2[i];
            tdm1[i] += o.tdm1[i];
            tdm2[i] += o.tdm2[i];
        }
    }
};

} // namespace

TwoUserSummary tdm_vs_sdm(const TwoUserConfig &cfg, const McOptions &opts)
{
    cfg.channel.validate();
    cfg.budget.validate();
    cfg.frame.validate();
    if (cfg.channel.kind != ChannelKind::sparse)
        throw ConfigError("tdm_vs_sdm requires the sparse channel model");
    if (cfg.system_latencies.empty())
        throw ConfigError("system latency range is empty");
    if (opts.trials < 1)
        throw ConfigError("trials must be >= 1");
    if (!(cfg.power_split > 0.0 && cfg.power_split < 1.0))
        throw ConfigError("power_split must lie in (0, 1)");
    for (int n : cfg.system_latencies)
        if (n < 2)
            throw ConfigError("two-user frames need at least 2 symbols");

    const int guard = cfg.frame.guard_symbols;
    const int b = cfg.frame.payload_bits;
    const int max_n = *std::max_element(cfg.system_latencies.begin(), cfg.system_latencies.end());
    // Training index k in [0, K) means SDM pilot length k + 2 and TDM length k + 1.
    if (cfg.max_training < 2)
        throw ConfigError("max_training must be >= 2 for two-user pilots");
    const int K = std::max(1, std::min(cfg.max_training - 1, max_n - guard - 1));
    const std::size_t rows = cfg.system_latencies.size();

    auto threshold = [&](int symbols, int overhead) {
        return symbols - overhead >= 1 ? rate_for_bits(b, symbols - overhead).gamma_th : kInfeasible;
    };
    std::vector<double> th_sdm(rows * K), th_tdm1(rows * K), th_tdm2(rows * K);
    for (std::size_t r = 0; r < rows; ++r)
    {
        const int n = cfg.system_latencies[r];
        const int n1 = tdm_first_share(n);
        const int n2 = n - n1;
        for (int k = 0; k < K; ++k)
        {
            th_sdm[r * K + k] = threshold(n, k + 2 + guard);
            th_tdm1[r * K + k] = threshold(n1, k + 1 + guard);
            th_tdm2[r * K + k] = threshold(n2, k + 1 + guard);
        }
    }

    const ChannelConfig &ch = cfg.channel;
    const LinkBudget &budget = cfg.budget;
    const TwoUserAcc acc = run_trials<TwoUserAcc>(
        opts.trials, opts.workers, [&] { return TwoUserAcc(rows, K); },
        [&](std::uint64_t trial, TwoUserAcc &a) {
            Rng rng = substream(opts.seed, StreamId::urllc_two_user, trial);
            const PathSet p1 = draw_paths(ch.cluster, ch.array, rng);
            const PathSet p2 = draw_paths(ch.cluster, ch.array, rng);
            const ChannelRealization h1 = realize_channel(p1, rng);
            const ChannelRealization h2 = realize_channel(p2, rng);
            const NestedTrainingNoise n1(h1.h.size(), K + 1, rng);
            const NestedTrainingNoise n2(h2.h.size(), K + 1, rng);
            const CorrelationSpectrum s1 = correlation_spectrum(p1, false);
            const CorrelationSpectrum s2 = correlation_spectrum(p2, false);
            ++a.trials;

            for (int k = 0; k < K; ++k)
            {
                double g_sdm1 = 0.0, g_sdm2 = 0.0, g_tdm1 = 0.0, g_tdm2 = 0.0;
                try
                {
                    const auto [w1, w2] = zf_pair(n1.estimate(h1, k + 2, budget), n2.estimate(h2, k + 2, budget));
                    g_sdm1 = sinr_two_user(h1, w1, w2, budget, cfg.power_split).gamma;
                    g_sdm2 = sinr_two_user(h2, w2, w1, budget, 1.0 - cfg.power_split).gamma;
                }
                catch (const IllConditioned &)
                {
                }
                try
                {
                    g_tdm1 = snr_dl(h1, sv_precoder(n1.estimate(h1, k + 1, budget), s1), budget).gamma;
                    g_tdm2 = snr_dl(h2, sv_precoder(n2.estimate(h2, k + 1, budget), s2), budget).gamma;
                }
                catch (const DegenerateInput &)
                {
                }
                for (std::size_t r = 0; r < rows; ++r)
                {
                    const std::size_t i = r * K + k;
                    auto out = [](double th, double g) { return std::isnan(th) || g < th; };
                    a.sdm1[i] += out(th_sdm[i], g_sdm1);
                    a.sdm2[i] += out(th_sdm[i], g_sdm2);
                    a.tdm1[i] += out(th_tdm1[i], g_tdm1);
                    a.tdm2[i] += out(th_tdm2[i], g_tdm2);
                }
            }
        });

    TwoUserSummary summary;
    const double target = cfg.target_outage;
    for (std::size_t r = 0; r < rows; ++r)
    {
        const int n = cfg.system_latencies[r];
        const int n1 = tdm_first_share(n);

        // SDM: one pilot phase for both devices; minimize the worse device.
        int best_k = -1;
        std::uint64_t best_worst = 0;
        for (int k = 0; k < K; ++k)
        {
            if (std::isnan(th_sdm[r * K + k]))
                continue;
            const std::uint64_t worst = std::max(acc.sdm1[r * K + k], acc.sdm2[r * K + k]);
            if (best_k < 0 || worst < best_worst)
            {
                best_k = k;
                best_worst = worst;
            }
        }
        auto best_single = [&](const std::vector<std::uint64_t> &counts, const std::vector<double> &th) {
            int bk = -1;
            for (int k = 0; k < K; ++k)
                if (!std::isnan(th[r * K + k]) && (bk < 0 || counts[r * K + k] < counts[r * K + bk]))
                    bk = k;
            return bk;
        };
        const int k1 = best_single(acc.tdm1, th_tdm1);
        const int k2 = best_single(acc.tdm2, th_tdm2);

        auto row = [&](const char *scheme, int device, int latency, int k, int offset,
                       const std::vector<std::uint64_t> &counts) {
            TwoUserRow tr;
            tr.scheme = scheme;
            tr.device = device;
            tr.latency_symbols = latency;
            tr.system_latency = n;
            tr.best_training = k >= 0 ? k + offset : 0;
            tr.outage = OutageResult::from_counts(k >= 0 ? counts[r * K + k] : acc.trials, acc.trials);
            return tr;
        };
        summary.rows.push_back(row("sdm", 1, n, best_k, 2, acc.sdm1));
        summary.rows.push_back(row("sdm", 2, n, best_k, 2, acc.sdm2));
        summary.rows.push_back(row("tdm", 1, n1, k1, 1, acc.tdm1));
        summary.rows.push_back(row("tdm", 2, n, k2, 1, acc.tdm2));

        const auto &rs = summary.rows;
        const std::size_t base = rs.size() - 4;
        const bool sdm_ok = rs[base].outage.p_outage <= target && rs[base + 1].outage.p_outage <= target;
        const bool tdm_ok = rs[base + 2].outage.p_outage <= target && rs[base + 3].outage.p_outage <= target;
        if (sdm_ok && (summary.sdm_system_latency < 0 || n < summary.sdm_system_latency))
            summary.sdm_system_latency = n;
        if (tdm_ok && (summary.tdm_system_latency < 0 || n < summary.tdm_system_latency))
            summary.tdm_system_latency = n;
    }
    if (summary.sdm_system_latency > 0)
        summary.sdm_avg_device_latency = summary.sdm_system_latency;
    if (summary.tdm_system_latency > 0)
        summary.tdm_avg_device_latency =
            0.5 * (tdm_first_share(summary.tdm_system_latency) + summary.tdm_system_latency);
    return summary;
}

} // namespace mmimo
