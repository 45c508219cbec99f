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

// Command-line front end. Exit codes: 0 success, 2 validation error,
// 3 runtime error.

#include "mmimo/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Overrides
{
    std::vector<std::string> sets;
    std::string seed;
    std::string trials;
    std::string workers;
    std::string out;
    std::string json;
};

void add_override_options(CLI::App *cmd, Overrides &o, bool outputs)
{
    cmd->add_option("--set", o.sets, "override a key, e.g. --set frame.payload_bits=120")->take_all();
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--trials", o.trials, "Monte-Carlo trials per point");
    cmd->add_option("--workers", o.workers, "worker threads or auto");
    if (outputs)
    {
        cmd->add_option("--out", o.out, "CSV output file (default: stdout)");
        cmd->add_option("--json", o.json, "JSON mirror output file");
    }
}

void apply(mmimo::ExperimentConfig &cfg, const Overrides &o)
{
    for (const auto &s : o.sets)
        cfg.set_assignment(s);
    if (!o.seed.empty())
        cfg.set("seed", o.seed);
    if (!o.trials.empty())
        cfg.set("trials", o.trials);
    if (!o.workers.empty())
        cfg.set("workers", o.workers);
}

void write_file(const std::string &path, const std::string &text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f)
        throw std::runtime_error("write failed for " + path);
}

void execute(const mmimo::ExperimentConfig &cfg, const Overrides &o)
{
    const mmimo::ResultTable t = mmimo::run(cfg);
    if (o.out.empty())
        std::cout << t.to_csv();
    else
        write_file(o.out, t.to_csv());
    if (!o.json.empty())
        write_file(o.json, t.to_json());
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Monte-Carlo simulation of massive MIMO links for URLLC and mMTC"};
    app.set_version_flag("--version", std::string(mmimo::kToolVersion));
    app.require_subcommand(1);

    Overrides run_o;
    std::string run_file;
    auto *run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
    run_cmd->add_option("config", run_file, "INI config file")->required();
    add_override_options(run_cmd, run_o, true);

    Overrides rec_o;
    std::string rec_name;
    auto *rec_cmd = app.add_subcommand("recipe", "run a packaged figure recipe");
    rec_cmd->add_option("name", rec_name, "recipe name (see list-recipes)")->required();
    add_override_options(rec_cmd, rec_o, true);
    bool rec_print = false;
    rec_cmd->add_flag("--print-config", rec_print, "print the effective config instead of running");

    auto *list_cmd = app.add_subcommand("list-recipes", "list packaged recipes");

    Overrides val_o;
    std::string val_file;
    auto *val_cmd = app.add_subcommand("validate", "check a config file without running it");
    val_cmd->add_option("config", val_file, "INI config file")->required();
    add_override_options(val_cmd, val_o, false);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try
    {
        if (*list_cmd)
        {
            for (const auto &r : mmimo::recipes())
                std::cout << r.name << "\t" << r.description << "\n";
            return 0;
        }
        if (*val_cmd)
        {
            mmimo::ExperimentConfig cfg = mmimo::ExperimentConfig::from_ini_file(val_file);
            apply(cfg, val_o);
            cfg.validate();
            std::cout << "ok " << mmimo::to_string(cfg.experiment()) << " config_hash=" << mmimo::hex64(cfg.hash())
                      << "\n";
            return 0;
        }
        if (*run_cmd)
        {
            mmimo::ExperimentConfig cfg = mmimo::ExperimentConfig::from_ini_file(run_file);
            apply(cfg, run_o);
            execute(cfg, run_o);
            return 0;
        }
        if (*rec_cmd)
        {
            mmimo::ExperimentConfig cfg = mmimo::find_recipe(rec_name).config;
            apply(cfg, rec_o);
            if (rec_print)
            {
                cfg.validate();
                std::cout << cfg.to_ini();
                return 0;
            }
            execute(cfg, rec_o);
            return 0;
        }
    }
    catch (const mmimo::ConfigError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    catch (const std::exception &e)
    {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
