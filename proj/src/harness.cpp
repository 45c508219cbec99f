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

#include "mmimo/harness.hpp"

#include "mmimo/montecarlo.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace mmimo {

namespace {

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

template <class T>
bool parse_number(const std::string &s, T &out)
{
    const char *b = s.data();
    const char *e = b + s.size();
    if (b != e && *b == '+')
        ++b;
    const auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e && b != e;
}

} // namespace

// ------------------------------------------------------------------ schema

const std::vector<KeyInfo> &config_schema()
{
    static const std::vector<KeyInfo> schema = {
        {"experiment", "", "snr-training | outage-training | tdm-vs-sdm | fdd-ns-sweep | latency-reliability | ra-crowded | coded-ra"},
        {"trials", "10000", "Monte-Carlo trials per point (initial count when escalating)"},
        {"seed", "1", "64-bit base seed"},
        {"workers", "auto", "worker threads, or auto"},
        {"escalate", "true", "grow trials 4x until every CI half-width < max(0.1 p, 1e-5)"},
        {"max_trials", "100000", "trial cap for escalation"},

        {"array.num_antennas", "64", "M"},

        {"channel.kind", "sparse", "sparse | iid"},
        {"channel.n_paths", "20", "N_P"},
        {"channel.decay_db", "10", "strongest to weakest path power ratio"},
        {"channel.freeze_paths", "false", "one path set for the whole run"},

        {"link.snr_db", "10", "pre-processing SNR rho / sigma^2"},

        {"frame.total_symbols", "28", "N"},
        {"frame.payload_bits", "144", "b"},
        {"frame.scs_khz", "60", "15 | 30 | 60 | 120"},
        {"frame.guard_symbols", "1", "TDD guard per UL/DL switch"},

        {"training.schemes", "tdd-mrt,tdd-sv", "schemes swept over training length"},
        {"training.lengths", "1:10", "UL training lengths t"},

        {"fdd.n_paths", "4,16", "path counts compared in fdd-ns-sweep"},
        {"fdd.num_svs", "", "N_s values; empty means every feasible value"},

        {"latency.schemes", "tdd-mrt,tdd-sv,fdd", "schemes on the latency-reliability curve"},
        {"latency.frame_lengths", "20:4:40", "frame lengths N"},

        {"two_user.latencies", "12:2:60", "system latencies N"},
        {"two_user.power_split", "0.5", "SDM power share of each stream"},
        {"two_user.target_outage", "0.001", "outage target for the latency summary"},
        {"two_user.max_training", "16", "largest training length scanned"},

        {"ra.total_devices", "10000", "K_0 values"},
        {"ra.activation_prob", "0.001", "P_a"},
        {"ra.num_pilots", "10", "P_p"},
        {"ra.protocols", "baseline,sucre-hard,sucre-soft", "protocols simulated"},
        {"ra.mode", "asymptotic", "asymptotic | finite-m"},
        {"ra.max_attempts", "10", "attempts before a packet is dropped"},
        {"ra.retry_prob", "0.5", "per-block retry probability of a backlogged device"},
        {"ra.blocks", "2000", "measured blocks per replication"},
        {"ra.warmup_blocks", "200", "discarded blocks per replication"},
        {"ra.replications", "4", "independent chains"},
        {"ra.batches", "10", "batch-means batches per replication"},
        {"ra.soft_exponent", "3", "soft rule exponent"},
        {"ra.soft_scale", "2", "soft rule scale"},
        {"ra.dl_power_db", "0", "downlink pilot power relative to noise"},
        {"ra.r_min", "35", "inner radius, m"},
        {"ra.r_max", "250", "cell radius, m"},
        {"ra.pathloss_exponent", "3.8", "pathloss exponent"},
        {"ra.edge_snr_db", "0", "uplink receive SNR at the cell edge"},
        {"ra.shadowing_db", "0", "log-normal shadowing standard deviation"},

        {"coded_ra.active_devices", "2:2:20", "active device counts"},
        {"coded_ra.num_slots", "4", "L"},
        {"coded_ra.num_pilots", "4", "pilots per slot"},
        {"coded_ra.slot_activation_prob", "0.5", "per-slot transmission probability"},
        {"coded_ra.decode_model", "genie-singleton", "genie-singleton | sinr-threshold"},
        {"coded_ra.pattern", "per-slot", "per-slot | per-frame"},
        {"coded_ra.sinr_threshold_db", "0", "gamma_th for sinr-threshold"},
    };
    return schema;
}

namespace {

const KeyInfo *find_key(const std::string &key)
{
    for (const auto &k : config_schema())
        if (k.key == key)
            return &k;
    return nullptr;
}

struct ExperimentName
{
    Experiment e;
    const char *name;
};

constexpr ExperimentName kExperimentNames[] = {
    {Experiment::snr_training, "snr-training"},
    {Experiment::outage_training, "outage-training"},
    {Experiment::tdm_vs_sdm, "tdm-vs-sdm"},
    {Experiment::fdd_ns_sweep, "fdd-ns-sweep"},
    {Experiment::latency_reliability, "latency-reliability"},
    {Experiment::ra_crowded, "ra-crowded"},
    {Experiment::coded_ra, "coded-ra"},
};

} // namespace

std::string to_string(Experiment e)
{
    for (const auto &n : kExperimentNames)
        if (n.e == e)
            return n.name;
    return "?";
}

Experiment experiment_from_string(const std::string &s)
{
    for (const auto &n : kExperimentNames)
        if (s == n.name)
            return n.e;
    throw ValidationError("experiment", s.empty() ? "missing" : "unknown experiment '" + s + "'");
}

const std::vector<Experiment> &all_experiments()
{
    static const std::vector<Experiment> all = [] {
        std::vector<Experiment> v;
        for (const auto &n : kExperimentNames)
            v.push_back(n.e);
        return v;
    }();
    return all;
}

// ------------------------------------------------------------------ config

ExperimentConfig::ExperimentConfig()
{
    for (const auto &k : config_schema())
        values_[k.key] = k.default_value;
}

void ExperimentConfig::set(const std::string &key, const std::string &value)
{
    const std::string k = trim(key);
    if (!find_key(k))
        throw ValidationError(k, "unknown key");
    values_[k] = trim(value);
}

void ExperimentConfig::set_assignment(const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ValidationError(trim(assignment), "expected key=value");
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void ExperimentConfig::merge_ini(std::istream &in, const std::string &source)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try
    {
        pt::ini_parser::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error &e)
    {
        throw ValidationError(source, e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto &[name, node] : tree)
    {
        if (node.empty())
        {
            set(name, node.data());
            continue;
        }
        for (const auto &[key, leaf] : node)
            set(name + "." + key, leaf.data());
    }
}

ExperimentConfig ExperimentConfig::from_ini(std::istream &in, const std::string &source)
{
    ExperimentConfig cfg;
    cfg.merge_ini(in, source);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_ini_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError(path, "cannot open config file");
    return from_ini(in, path);
}

const std::string &ExperimentConfig::get(const std::string &key) const
{
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ValidationError(key, "unknown key");
    return it->second;
}

std::int64_t ExperimentConfig::get_int(const std::string &key) const
{
    std::int64_t v = 0;
    if (!parse_number(get(key), v))
        throw ValidationError(key, "expected an integer, got '" + get(key) + "'");
    return v;
}

std::uint64_t ExperimentConfig::get_uint(const std::string &key) const
{
    std::uint64_t v = 0;
    if (!parse_number(get(key), v))
        throw ValidationError(key, "expected a non-negative integer, got '" + get(key) + "'");
    return v;
}

double ExperimentConfig::get_real(const std::string &key) const
{
    double v = 0.0;
    if (!parse_number(get(key), v) || !std::isfinite(v))
        throw ValidationError(key, "expected a finite number, got '" + get(key) + "'");
    return v;
}

bool ExperimentConfig::get_bool(const std::string &key) const
{
    const std::string &v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ValidationError(key, "expected true or false, got '" + v + "'");
}

std::vector<int> ExperimentConfig::get_int_list(const std::string &key) const
{
    // Items are integers or inclusive ranges a:b and a:step:b.
    std::vector<int> out;
    for (const auto &item : split_list(get(key)))
    {
        std::vector<int> parts;
        std::stringstream ss(item);
        std::string p;
        while (std::getline(ss, p, ':'))
        {
            int v = 0;
            if (!parse_number(trim(p), v))
                throw ValidationError(key, "expected integers or ranges a:b, a:step:b, got '" + item + "'");
            parts.push_back(v);
        }
        if (parts.size() == 1)
            out.push_back(parts[0]);
        else if (parts.size() == 2 || parts.size() == 3)
        {
            const int lo = parts[0];
            const int step = parts.size() == 3 ? parts[1] : 1;
            const int hi = parts.back();
            if (step <= 0 || hi < lo)
                throw ValidationError(key, "range '" + item + "' needs step > 0 and end >= start");
            for (int v = lo; v <= hi; v += step)
                out.push_back(v);
        }
        else
            throw ValidationError(key, "malformed range '" + item + "'");
    }
    return out;
}

std::vector<double> ExperimentConfig::get_real_list(const std::string &key) const
{
    std::vector<double> out;
    for (const auto &item : split_list(get(key)))
    {
        double v = 0.0;
        if (!parse_number(item, v) || !std::isfinite(v))
            throw ValidationError(key, "expected finite numbers, got '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> ExperimentConfig::get_string_list(const std::string &key) const
{
    return split_list(get(key));
}

Experiment ExperimentConfig::experiment() const { return experiment_from_string(get("experiment")); }

int ExperimentConfig::workers() const
{
    if (get("workers") == "auto")
        return 0;
    const std::int64_t w = get_int("workers");
    if (w < 0 || w > 4096)
        throw ValidationError("workers", "must be auto or an integer in [0, 4096]");
    return static_cast<int>(w);
}

std::string ExperimentConfig::canonical() const
{
    std::string out;
    for (const auto &[k, v] : values_)
        if (k != "workers")
            out += k + " = " + v + "\n";
    return out;
}

std::string ExperimentConfig::to_ini() const
{
    std::string out;
    std::string section;
    for (const auto &[k, v] : values_)
        if (k.find('.') == std::string::npos)
            out += k + " = " + v + "\n";
    for (const auto &[k, v] : values_)
    {
        const auto dot = k.find('.');
        if (dot == std::string::npos)
            continue;
        const std::string s = k.substr(0, dot);
        if (s != section)
        {
            out += "\n[" + s + "]\n";
            section = s;
        }
        out += k.substr(dot + 1) + " = " + v + "\n";
    }
    return out;
}

// ------------------------------------------------------------------ typed views

namespace {

void check(bool ok, const std::string &field, const std::string &msg)
{
    if (!ok)
        throw ValidationError(field, msg);
}

int get_int_in(const ExperimentConfig &cfg, const std::string &key, std::int64_t lo, std::int64_t hi)
{
    const std::int64_t v = cfg.get_int(key);
    check(v >= lo && v <= hi, key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                                       std::to_string(v));
    return static_cast<int>(v);
}

double get_fraction(const ExperimentConfig &cfg, const std::string &key)
{
    const double v = cfg.get_real(key);
    check(v >= 0.0 && v <= 1.0, key, "must lie in [0, 1]");
    return v;
}

std::vector<Scheme> get_schemes(const ExperimentConfig &cfg, const std::string &key)
{
    std::vector<Scheme> out;
    for (const auto &s : cfg.get_string_list(key))
    {
        try
        {
            out.push_back(scheme_from_string(s));
        }
        catch (const ConfigError &e)
        {
            throw ValidationError(key, e.what());
        }
    }
    check(!out.empty(), key, "needs at least one scheme");
    return out;
}

std::vector<int> get_positive_list(const ExperimentConfig &cfg, const std::string &key)
{
    const auto v = cfg.get_int_list(key);
    check(!v.empty(), key, "needs at least one value");
    for (int x : v)
        check(x >= 1, key, "values must be >= 1");
    return v;
}

constexpr int kMaxInt = std::numeric_limits<int>::max();

} // namespace

ChannelConfig channel_config(const ExperimentConfig &cfg)
{
    ChannelConfig ch;
    ch.array.num_antennas = get_int_in(cfg, "array.num_antennas", 1, 4096);
    const std::string kind = cfg.get("channel.kind");
    check(kind == "sparse" || kind == "iid", "channel.kind", "expected sparse or iid, got '" + kind + "'");
    ch.kind = kind == "iid" ? ChannelKind::iid : ChannelKind::sparse;
    ch.cluster.num_paths = get_int_in(cfg, "channel.n_paths", 1, 4096);
    ch.cluster.decay_db = cfg.get_real("channel.decay_db");
    check(ch.cluster.decay_db >= 0.0, "channel.decay_db", "must be >= 0");
    ch.freeze_paths = cfg.get_bool("channel.freeze_paths");
    return ch;
}

FrameConfig frame_config(const ExperimentConfig &cfg)
{
    FrameConfig f;
    f.total_symbols = get_int_in(cfg, "frame.total_symbols", 1, 1 << 20);
    f.payload_bits = get_int_in(cfg, "frame.payload_bits", 1, 1 << 20);
    f.scs_khz = static_cast<int>(cfg.get_int("frame.scs_khz"));
    check(f.scs_khz == 15 || f.scs_khz == 30 || f.scs_khz == 60 || f.scs_khz == 120, "frame.scs_khz",
          "must be 15, 30, 60 or 120");
    f.guard_symbols = get_int_in(cfg, "frame.guard_symbols", 0, 1 << 10);
    return f;
}

LinkBudget link_budget(const ExperimentConfig &cfg) { return LinkBudget::from_snr_db(cfg.get_real("link.snr_db")); }

RaGeometry ra_geometry(const ExperimentConfig &cfg)
{
    RaGeometry g;
    g.r_min = cfg.get_real("ra.r_min");
    g.r_max = cfg.get_real("ra.r_max");
    check(g.r_min > 0.0, "ra.r_min", "must be > 0");
    check(g.r_max > g.r_min, "ra.r_max", "must exceed ra.r_min");
    g.pathloss_exponent = cfg.get_real("ra.pathloss_exponent");
    check(g.pathloss_exponent > 0.0, "ra.pathloss_exponent", "must be > 0");
    g.edge_snr_db = cfg.get_real("ra.edge_snr_db");
    g.shadowing_db = cfg.get_real("ra.shadowing_db");
    check(g.shadowing_db >= 0.0, "ra.shadowing_db", "must be >= 0");
    return g;
}

RaSimConfig ra_sim_config(const ExperimentConfig &cfg)
{
    RaSimConfig c;
    c.max_attempts = get_int_in(cfg, "ra.max_attempts", 1, 1 << 20);
    c.retry_prob = get_fraction(cfg, "ra.retry_prob");
    check(c.retry_prob > 0.0, "ra.retry_prob", "must be > 0");
    c.blocks = get_int_in(cfg, "ra.blocks", 1, kMaxInt);
    c.warmup_blocks = get_int_in(cfg, "ra.warmup_blocks", 0, kMaxInt);
    c.replications = get_int_in(cfg, "ra.replications", 1, 1 << 20);
    c.batches = get_int_in(cfg, "ra.batches", 1, c.blocks);
    const std::string mode = cfg.get("ra.mode");
    check(mode == "asymptotic" || mode == "finite-m", "ra.mode", "expected asymptotic or finite-m, got '" + mode + "'");
    c.sucre.mode = mode == "finite-m" ? RaMode::finite_m : RaMode::asymptotic;
    c.sucre.num_antennas = get_int_in(cfg, "array.num_antennas", 1, 4096);
    c.sucre.dl_power = db_to_linear(cfg.get_real("ra.dl_power_db"));
    c.soft_rule.exponent = cfg.get_real("ra.soft_exponent");
    check(c.soft_rule.exponent > 0.0, "ra.soft_exponent", "must be > 0");
    c.soft_rule.scale = cfg.get_real("ra.soft_scale");
    check(c.soft_rule.scale > 0.0, "ra.soft_scale", "must be > 0");
    c.soft_rule.kind = DecisionRule::Kind::soft;
    return c;
}

CodedRaConfig coded_ra_config(const ExperimentConfig &cfg)
{
    CodedRaConfig c;
    c.num_slots = get_int_in(cfg, "coded_ra.num_slots", 1, 1 << 16);
    c.slot_activation_prob = get_fraction(cfg, "coded_ra.slot_activation_prob");
    try
    {
        c.decode_model = decode_model_from_string(cfg.get("coded_ra.decode_model"));
    }
    catch (const ConfigError &e)
    {
        throw ValidationError("coded_ra.decode_model", e.what());
    }
    const std::string pattern = cfg.get("coded_ra.pattern");
    check(pattern == "per-slot" || pattern == "per-frame", "coded_ra.pattern",
          "expected per-slot or per-frame, got '" + pattern + "'");
    c.pattern = pattern == "per-frame" ? PilotPattern::per_frame : PilotPattern::per_slot;
    c.sinr_threshold = db_to_linear(cfg.get_real("coded_ra.sinr_threshold_db"));
    c.num_antennas = get_int_in(cfg, "array.num_antennas", 1, 4096);
    return c;
}

TwoUserConfig two_user_config(const ExperimentConfig &cfg)
{
    TwoUserConfig c;
    c.channel = channel_config(cfg);
    c.budget = link_budget(cfg);
    c.frame = frame_config(cfg);
    c.system_latencies = get_positive_list(cfg, "two_user.latencies");
    c.power_split = cfg.get_real("two_user.power_split");
    check(c.power_split > 0.0 && c.power_split <= 1.0, "two_user.power_split", "must lie in (0, 1]");
    c.target_outage = get_fraction(cfg, "two_user.target_outage");
    c.max_training = get_int_in(cfg, "two_user.max_training", 1, 1 << 16);
    return c;
}

bool precise_enough(const OutageResult &r) { return r.half_width() < std::max(0.1 * r.p_outage, 1e-5); }

// ------------------------------------------------------------------ validation

namespace {

// Module preconditions reported against the section that feeds them.
template <class F>
void module_check(const std::string &section, F f)
{
    try
    {
        f();
    }
    catch (const ValidationError &)
    {
        throw;
    }
    catch (const ConfigError &e)
    {
        throw ValidationError(section, e.what());
    }
}

void validate_urllc_common(const ExperimentConfig &cfg)
{
    const ChannelConfig ch = channel_config(cfg);
    module_check("channel", [&] { ch.validate(); });
    const FrameConfig f = frame_config(cfg);
    module_check("frame", [&] { f.validate(); });
    module_check("link", [&] { link_budget(cfg).validate(); });
}

void validate_lengths(const ExperimentConfig &cfg, const std::vector<Scheme> &schemes, const std::string &key,
                      const std::vector<int> &lengths, const FrameConfig &f)
{
    for (Scheme s : schemes)
        for (int t : lengths)
            check(f.total_symbols - overhead_symbols(s, t, f) >= 1, key,
                  "length " + std::to_string(t) + " leaves no data symbol for " + to_string(s) + " in a " +
                      std::to_string(f.total_symbols) + "-symbol frame");
    (void)cfg;
}

} // namespace

void ExperimentConfig::validate() const
{
    const Experiment e = experiment();
    const std::uint64_t trials = get_uint("trials");
    check(trials >= 1, "trials", "must be >= 1");
    get_uint("seed");
    workers();
    const bool esc = get_bool("escalate");
    if (esc)
        check(get_uint("max_trials") >= trials, "max_trials", "must be >= trials when escalating");

    switch (e)
    {
    case Experiment::snr_training:
    case Experiment::outage_training: {
        validate_urllc_common(*this);
        const auto schemes = get_schemes(*this, "training.schemes");
        for (Scheme s : schemes)
            check(s == Scheme::tdd_mrt || s == Scheme::tdd_sv, "training.schemes",
                  "only tdd-mrt and tdd-sv are swept over training length");
        validate_lengths(*this, schemes, "training.lengths", get_positive_list(*this, "training.lengths"),
                         frame_config(*this));
        break;
    }
    case Experiment::fdd_ns_sweep: {
        validate_urllc_common(*this);
        const auto nps = get_positive_list(*this, "fdd.n_paths");
        if (!get("fdd.num_svs").empty())
        {
            const auto ns = get_positive_list(*this, "fdd.num_svs");
            validate_lengths(*this, {Scheme::fdd}, "fdd.num_svs", ns, frame_config(*this));
        }
        (void)nps;
        break;
    }
    case Experiment::latency_reliability: {
        validate_urllc_common(*this);
        get_schemes(*this, "latency.schemes");
        const auto ns = get_positive_list(*this, "latency.frame_lengths");
        FrameConfig f = frame_config(*this);
        for (int n : ns)
        {
            f.total_symbols = n;
            module_check("latency.frame_lengths", [&] { f.validate(); });
        }
        break;
    }
    case Experiment::tdm_vs_sdm: {
        validate_urllc_common(*this);
        two_user_config(*this);
        break;
    }
    case Experiment::ra_crowded: {
        const auto ks = get_positive_list(*this, "ra.total_devices");
        get_fraction(*this, "ra.activation_prob");
        get_int_in(*this, "ra.num_pilots", 1, 1 << 20);
        for (const auto &p : get_string_list("ra.protocols"))
            module_check("ra.protocols", [&] { protocol_from_string(p); });
        check(!get_string_list("ra.protocols").empty(), "ra.protocols", "needs at least one protocol");
        ra_geometry(*this);
        const RaSimConfig sim = ra_sim_config(*this);
        module_check("ra", [&] { sim.validate(); });
        (void)ks;
        break;
    }
    case Experiment::coded_ra: {
        get_positive_list(*this, "coded_ra.active_devices");
        get_int_in(*this, "coded_ra.num_pilots", 1, 1 << 16);
        ra_geometry(*this);
        const CodedRaConfig c = coded_ra_config(*this);
        module_check("coded_ra", [&] { c.validate(); });
        break;
    }
    }
}

// ------------------------------------------------------------------ recipes

const std::vector<Recipe> &recipes()
{
    static const std::vector<Recipe> list = [] {
        std::vector<Recipe> r;
        auto make = [&](const std::string &name, const std::string &desc,
                        std::initializer_list<std::pair<const char *, const char *>> kv) {
            Recipe rec{name, desc, ExperimentConfig()};
            rec.config.set("experiment", name);
            for (const auto &[k, v] : kv)
                rec.config.set(k, v);
            r.push_back(std::move(rec));
        };
        make("snr-training", "mean DL SNR and its RSD versus UL training length, TDD-MRT and TDD-SV",
             {{"link.snr_db", "4.5"},
              {"channel.n_paths", "20"},
              {"channel.decay_db", "10"},
              {"training.lengths", "1:10"},
              {"trials", "20000"}});
        make("outage-training", "outage versus UL training length in a 28-symbol (0.5 ms) frame",
             {{"link.snr_db", "4.5"},
              {"channel.n_paths", "20"},
              {"channel.decay_db", "10"},
              {"frame.total_symbols", "28"},
              {"frame.payload_bits", "144"},
              {"training.lengths", "1:10"},
              {"trials", "50000"},
              {"max_trials", "200000"}});
        make("tdm-vs-sdm", "two-device latency-outage, TDM with SV-refined MRT versus SDM with ZF",
             {{"link.snr_db", "8"},
              {"channel.n_paths", "10"},
              {"channel.decay_db", "10"},
              {"frame.payload_bits", "96"},
              {"two_user.latencies", "12:2:60"},
              {"trials", "20000"},
              {"max_trials", "80000"}});
        make("fdd-ns-sweep", "FDD outage versus the number of estimated singular vectors",
             {{"link.snr_db", "10"},
              {"channel.decay_db", "20"},
              {"fdd.n_paths", "4,16"},
              {"frame.total_symbols", "48"},
              {"frame.payload_bits", "128"},
              {"trials", "50000"},
              {"max_trials", "200000"}});
        make("latency-reliability", "reliability versus latency with per-latency optimal training",
             {{"link.snr_db", "9"},
              {"channel.n_paths", "12"},
              {"channel.decay_db", "20"},
              {"frame.payload_bits", "80"},
              {"latency.frame_lengths", "20:4:40"},
              {"latency.schemes", "tdd-mrt,tdd-sv,fdd"},
              {"trials", "20000"},
              {"max_trials", "80000"}});
        make("ra-crowded", "RA attempts and failures of baseline, hard and soft SUCRe in a crowded cell",
             {{"ra.total_devices", "4000:1000:16000"},
              {"ra.activation_prob", "0.001"},
              {"ra.num_pilots", "10"},
              {"ra.blocks", "2000"}});
        return r;
    }();
    return list;
}

const Recipe &find_recipe(const std::string &name)
{
    for (const auto &r : recipes())
        if (r.name == name)
            return r;
    std::string known;
    for (const auto &r : recipes())
        known += (known.empty() ? "" : ", ") + r.name;
    throw ValidationError("recipe", "unknown recipe '" + name + "' (known: " + known + ")");
}

// ------------------------------------------------------------------ run

namespace {

std::string fmt(double v) { return format_double(v); }

int effective_workers(const ExperimentConfig &cfg)
{
    // The environment variable overrides the configured value.
    if (std::getenv(kWorkersEnv))
        return 0;
    return cfg.workers();
}

McOptions mc_options(const ExperimentConfig &cfg, std::uint64_t trials)
{
    McOptions o;
    o.trials = trials;
    o.seed = cfg.get_uint("seed");
    o.workers = effective_workers(cfg);
    return o;
}

// Runs f(trials) and grows the trial count 4x while any outage estimate is
// imprecise and the cap allows. Substreams are indexed by trial, so each
// rerun extends the previous sample instead of replacing it.
template <class Run, class Outcomes>
auto escalate(const ExperimentConfig &cfg, Run run, Outcomes outcomes, std::uint64_t &used)
{
    std::uint64_t trials = cfg.get_uint("trials");
    const bool esc = cfg.get_bool("escalate");
    const std::uint64_t cap = cfg.get_uint("max_trials");
    for (;;)
    {
        auto res = run(trials);
        bool ok = true;
        for (const OutageResult &o : outcomes(res))
            ok = ok && precise_enough(o);
        if (!esc || ok || trials >= cap)
        {
            used = trials;
            return res;
        }
        trials = std::min(cap, trials * 4);
    }
}

void run_training(const ExperimentConfig &cfg, ResultTable &table, bool outage, std::uint64_t &used)
{
    const ChannelConfig ch = channel_config(cfg);
    const FrameConfig f = frame_config(cfg);
    const LinkBudget b = link_budget(cfg);
    const auto schemes = get_schemes(cfg, "training.schemes");
    const auto lengths = cfg.get_int_list("training.lengths");

    using Curves = std::vector<std::vector<SweepPoint>>;
    auto run = [&](std::uint64_t trials) {
        Curves c;
        for (Scheme s : schemes)
            c.push_back(sweep_training(s, ch, f, lengths, b, mc_options(cfg, trials)));
        return c;
    };
    auto outcomes = [&](const Curves &c) {
        std::vector<OutageResult> o;
        if (outage)
            for (const auto &curve : c)
                for (const auto &p : curve)
                    o.push_back(p.outage);
        return o;
    };
    const Curves curves = escalate(cfg, run, outcomes, used);

    for (std::size_t i = 0; i < schemes.size(); ++i)
        for (const auto &p : curves[i])
        {
            if (outage)
                table.add_row({std::int64_t{p.param}, to_string(schemes[i]), p.outage.p_outage, p.outage.ci95.lo,
                               p.outage.ci95.hi});
            else
                table.add_row({std::int64_t{p.param}, to_string(schemes[i]), linear_to_db(p.mean_gamma), p.rsd_gamma});
        }
}

void run_fdd(const ExperimentConfig &cfg, ResultTable &table, std::uint64_t &used)
{
    ChannelConfig ch = channel_config(cfg);
    const FrameConfig f = frame_config(cfg);
    const LinkBudget b = link_budget(cfg);
    const auto nps = cfg.get_int_list("fdd.n_paths");
    const bool explicit_ns = !cfg.get("fdd.num_svs").empty();

    struct Curve
    {
        int np;
        std::vector<SweepPoint> points;
    };
    auto run = [&](std::uint64_t trials) {
        std::vector<Curve> out;
        for (int np : nps)
        {
            ch.cluster.num_paths = np;
            std::vector<int> ns = feasible_params(Scheme::fdd, ch, f);
            if (explicit_ns)
            {
                const auto want = cfg.get_int_list("fdd.num_svs");
                std::vector<int> keep;
                for (int n : want)
                    if (std::find(ns.begin(), ns.end(), n) != ns.end())
                        keep.push_back(n);
                ns = keep;
            }
            out.push_back({np, ns.empty() ? std::vector<SweepPoint>{}
                                          : sweep_training(Scheme::fdd, ch, f, ns, b, mc_options(cfg, trials))});
        }
        return out;
    };
    auto outcomes = [](const std::vector<Curve> &c) {
        std::vector<OutageResult> o;
        for (const auto &curve : c)
            for (const auto &p : curve.points)
                o.push_back(p.outage);
        return o;
    };
    const auto curves = escalate(cfg, run, outcomes, used);
    for (const auto &c : curves)
    {
        for (const auto &p : c.points)
            table.add_row({std::int64_t{c.np}, std::int64_t{p.param}, p.outage.p_outage, p.outage.ci95.lo,
                           p.outage.ci95.hi});
        if (!c.points.empty())
            table.set_meta("optimal_ns.np" + std::to_string(c.np), std::to_string(pick_best(c.points).param));
    }
}

void run_latency(const ExperimentConfig &cfg, ResultTable &table, std::uint64_t &used)
{
    const ChannelConfig ch = channel_config(cfg);
    const FrameConfig f = frame_config(cfg);
    const LinkBudget b = link_budget(cfg);
    const auto schemes = get_schemes(cfg, "latency.schemes");
    const auto ns = cfg.get_int_list("latency.frame_lengths");
    auto run = [&](std::uint64_t trials) {
        return latency_reliability_curve(schemes, ch, f, ns, b, mc_options(cfg, trials));
    };
    auto outcomes = [](const std::vector<LatencyPoint> &pts) {
        std::vector<OutageResult> o;
        for (const auto &p : pts)
            o.push_back(p.outage);
        return o;
    };
    for (const auto &p : escalate(cfg, run, outcomes, used))
        table.add_row({to_string(p.scheme), std::int64_t{p.total_symbols}, p.latency_ms, std::int64_t{p.best_param},
                       p.reliability(), p.outage.p_outage, p.outage.ci95.lo, p.outage.ci95.hi});
}

void run_two_user(const ExperimentConfig &cfg, ResultTable &table, std::uint64_t &used)
{
    const TwoUserConfig tu = two_user_config(cfg);
    auto run = [&](std::uint64_t trials) { return tdm_vs_sdm(tu, mc_options(cfg, trials)); };
    auto outcomes = [](const TwoUserSummary &s) {
        std::vector<OutageResult> o;
        for (const auto &r : s.rows)
            o.push_back(r.outage);
        return o;
    };
    const TwoUserSummary s = escalate(cfg, run, outcomes, used);
    for (const auto &r : s.rows)
        table.add_row({r.scheme, std::int64_t{r.device}, std::int64_t{r.system_latency},
                       std::int64_t{r.latency_symbols}, std::int64_t{r.best_training}, r.outage.p_outage,
                       r.outage.ci95.lo, r.outage.ci95.hi});
    table.set_meta("sdm_system_latency", std::to_string(s.sdm_system_latency));
    table.set_meta("tdm_system_latency", std::to_string(s.tdm_system_latency));
    table.set_meta("sdm_avg_device_latency", fmt(s.sdm_avg_device_latency));
    table.set_meta("tdm_avg_device_latency", fmt(s.tdm_avg_device_latency));
}

void run_ra(const ExperimentConfig &cfg, ResultTable &table)
{
    const auto ks = cfg.get_int_list("ra.total_devices");
    const double pa = cfg.get_real("ra.activation_prob");
    PilotPool pool;
    pool.size = static_cast<int>(cfg.get_int("ra.num_pilots"));
    const RaGeometry g = ra_geometry(cfg);
    const RaSimConfig sim = ra_sim_config(cfg);
    const std::uint64_t seed = cfg.get_uint("seed");
    const int M = static_cast<int>(cfg.get_int("array.num_antennas"));
    for (int k0 : ks)
    {
        // Device k sits at the same position for every K_0.
        Rng rng = substream(seed, StreamId::ra_population, 0);
        const RaPopulation pop = draw_population(k0, pa, g, rng);
        for (const auto &name : cfg.get_string_list("ra.protocols"))
        {
            const RaProtocol p = protocol_from_string(name);
            const RaMetrics m = simulate_ra(pop, pool, p, sim, seed, effective_workers(cfg));
            table.add_row({to_string(p), std::int64_t{k0}, pa, std::int64_t{pool.size}, std::int64_t{M},
                           m.avg_attempts, m.failure_prob, m.resolved_collision_frac,
                           static_cast<std::int64_t>(seed)});
        }
    }
}

void run_coded(const ExperimentConfig &cfg, ResultTable &table)
{
    const auto counts = cfg.get_int_list("coded_ra.active_devices");
    const CodedRaConfig c = coded_ra_config(cfg);
    PilotPool pool;
    pool.size = static_cast<int>(cfg.get_int("coded_ra.num_pilots"));
    const RaGeometry g = ra_geometry(cfg);
    const std::uint64_t seed = cfg.get_uint("seed");
    const std::uint64_t frames = cfg.get_uint("trials");

    struct Acc
    {
        Moments decoded_frac;
        Moments iterations;
        void merge(const Acc &o)
        {
            decoded_frac.merge(o.decoded_frac);
            iterations.merge(o.iterations);
        }
    };
    for (int n : counts)
    {
        auto body = [&](std::uint64_t i, Acc &acc) {
            Rng rng = substream(seed, StreamId::coded_ra, (static_cast<std::uint64_t>(n) << 40) | i);
            const RaPopulation pop = draw_population(n, 1.0, g, rng);
            std::vector<int> active(n);
            for (int k = 0; k < n; ++k)
                active[k] = k;
            const CodedRaResult r = coded_ra_frame(active, pop, pool, c, rng);
            acc.decoded_frac.add(static_cast<double>(r.num_decoded()) / n);
            acc.iterations.add(r.iterations);
        };
        const Acc acc = run_trials<Acc>(frames, effective_workers(cfg), [] { return Acc{}; }, body);
        const double frac = acc.decoded_frac.mean();
        table.add_row({std::int64_t{n}, std::int64_t{c.num_slots}, std::int64_t{pool.size}, to_string(c.decode_model),
                       frac, acc.decoded_frac.stderr_mean(), frac * n / c.num_slots, acc.iterations.mean()});
    }
}

std::vector<Column> columns_for(Experiment e)
{
    switch (e)
    {
    case Experiment::snr_training:
        return {{"t", "symbols"}, {"scheme", ""}, {"mean_snr_db", "dB"}, {"rsd", ""}};
    case Experiment::outage_training:
        return {{"t", "symbols"}, {"scheme", ""}, {"p_outage", ""}, {"ci_lo", ""}, {"ci_hi", ""}};
    case Experiment::tdm_vs_sdm:
        return {{"scheme", ""},          {"device", ""},   {"system_latency", "symbols"},
                {"device_latency", "symbols"}, {"best_training", "symbols"}, {"p_outage", ""},
                {"ci_lo", ""},           {"ci_hi", ""}};
    case Experiment::fdd_ns_sweep:
        return {{"n_paths", ""}, {"ns", ""}, {"p_outage", ""}, {"ci_lo", ""}, {"ci_hi", ""}};
    case Experiment::latency_reliability:
        return {{"scheme", ""},      {"N", "symbols"},  {"latency_ms", "ms"}, {"best_training", "symbols"},
                {"reliability", ""}, {"p_outage", ""},  {"ci_lo", ""},        {"ci_hi", ""}};
    case Experiment::ra_crowded:
        return {{"protocol", ""},     {"K0", "devices"},      {"Pa", ""},
                {"Pp", "pilots"},     {"M", "antennas"},      {"avg_attempts", "attempts"},
                {"failure_prob", ""}, {"resolved_frac", ""},  {"seed", ""}};
    case Experiment::coded_ra:
        return {{"active_devices", "devices"}, {"num_slots", "slots"}, {"num_pilots", "pilots"},
                {"decode_model", ""},          {"decoded_frac", ""},   {"decoded_frac_se", ""},
                {"throughput", "devices/slot"}, {"avg_iterations", ""}};
    }
    return {};
}

} // namespace

ResultTable run(const ExperimentConfig &cfg)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment e = cfg.experiment();

    ResultTable table(columns_for(e));
    table.set_meta("tool", std::string(kToolName) + " " + kToolVersion);
    table.set_meta("experiment", to_string(e));
    table.set_meta("seed", cfg.get("seed"));
    table.set_meta("config_hash", hex64(cfg.hash()));
    table.set_meta("trials", cfg.get("trials"));
    table.set_meta("wall_time_s", "0");

    std::uint64_t used = cfg.get_uint("trials");
    switch (e)
    {
    case Experiment::snr_training:
        run_training(cfg, table, false, used);
        break;
    case Experiment::outage_training:
        run_training(cfg, table, true, used);
        break;
    case Experiment::fdd_ns_sweep:
        run_fdd(cfg, table, used);
        break;
    case Experiment::latency_reliability:
        run_latency(cfg, table, used);
        break;
    case Experiment::tdm_vs_sdm:
        run_two_user(cfg, table, used);
        break;
    case Experiment::ra_crowded:
        run_ra(cfg, table);
        break;
    case Experiment::coded_ra:
        run_coded(cfg, table);
        break;
    }
    table.set_meta("trials", std::to_string(used));
    for (const auto &[k, v] : cfg.values())
        if (k != "workers")
            table.set_meta("config." + k, v);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", secs);
    table.set_meta("wall_time_s", buf);
    return table;
}

std::uint64_t rehash_metadata(const ResultTable &table)
{
    std::string canon;
    for (const auto &[k, v] : table.metadata())
        if (k.starts_with("config."))
            canon += k.substr(7) + " = " + v + "\n";
    return fnv1a64(canon);
}

} // namespace mmimo
