// SPDX-License-Identifier: Apache-2.0
//
// dcsit - error-rate, PEP and DMT toolkit for the two-user MISO broadcast channel with delayed CSIT
// Copyright (C) 2026 The dcsit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// dcsit command-line driver

#include "experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace ex = dcsit::experiment;

namespace
{
    struct Options
    {
        std::string config_file;
        std::vector<std::string> sets;
        std::map<std::string, std::string> flags; // key -> value from dedicated flags
        std::string preset;
        std::string manifest;
    };

    std::string slurp(const std::string &path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw std::invalid_argument("cannot open '" + path + "'");
        std::ostringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    // file < --set < dedicated flags
    ex::ConfigMap gather(const Options &o, const std::string &experiment)
    {
        ex::ConfigMap c;
        if (!o.config_file.empty())
            c = ex::parse_config(slurp(o.config_file));
        for (auto &s : o.sets)
        {
            auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0)
                throw std::invalid_argument("--set expects key=value, got '" + s + "'");
            c[s.substr(0, eq)] = s.substr(eq + 1);
        }
        for (auto &[k, v] : o.flags)
            if (!v.empty())
                c[k] = v;
        if (!experiment.empty())
            c["experiment"] = experiment;
        return c;
    }

    int execute(const ex::ConfigMap &c)
    {
        auto files = ex::run(c);
        files.push_back(ex::manifest(c, files));
        std::string dir = c.count("out") ? c.at("out") : ".";
        ex::write_artifacts(dir, files);
        for (auto &f : files)
            std::cout << dir << "/" << f.file << "\n";
        return 0;
    }

    void common(CLI::App *sub, Options &o)
    {
        sub->add_option("-c,--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--set", o.sets, "override a config key (key=value)");
        sub->add_option("--seed", o.flags["seed"], "master seed");
        sub->add_option("--out", o.flags["out"], "output directory");
        sub->add_option("--threads", o.flags["threads"], "worker threads");
        sub->add_option("--name", o.flags["name"], "artifact base name");
    }

    void link_params(CLI::App *sub, Options &o)
    {
        sub->add_option("--scheme", o.flags["scheme"], "mat, altmat or tdma");
        sub->add_option("--code", o.flags["code"], "sm, alamouti, dayal or nonlinear");
        sub->add_option("--constellation", o.flags["constellation"], "e.g. qpsk, 8psk, 16qam");
        sub->add_option("--snr", o.flags["snr_db"], "SNR grid in dB, start:stop:step or list");
        sub->add_option("--rate", o.flags["rate"], "per-user rate in bit/s/Hz");
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"dcsit: error rates, PEP bounds and DMT for the two-user MISO broadcast channel with delayed CSIT"};
    app.require_subcommand(1);
    Options o;

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"pep", "PEP bound curve for a code pair, a codebook union bound or given eigenvalues"},
        {"simulate", "Monte Carlo BER/SER of user 1"},
        {"outage", "Monte Carlo outage probability"},
        {"dmt", "DMT breakpoints of every scheme and code"},
        {"pairing", "BER under user pairings with correlated channels"},
        {"optimize-constellation", "gradient search for a nonlinear constellation"},
    };
    std::map<std::string, CLI::App *> by_name;
    for (auto &[n, d] : subs)
    {
        auto *s = app.add_subcommand(n, d);
        common(s, o);
        link_params(s, o);
        by_name[n] = s;
    }

    auto *val = app.add_subcommand("validate", "dry-run checks of a configuration");
    common(val, o);
    link_params(val, o);
    val->add_option("--experiment", o.flags["experiment"], "experiment to check");

    auto *run = app.add_subcommand("run", "run a figure preset, a config file or a manifest");
    common(run, o);
    auto *pre = run->add_option("--preset", o.preset, "fig1 .. fig5")->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5"}));
    run->add_option("--manifest", o.manifest, "reproduce the run recorded in a manifest")
        ->check(CLI::ExistingFile)
        ->excludes(pre);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (val->parsed())
        {
            auto rep = ex::validate(gather(o, ""));
            std::cout << rep.str();
            return 0;
        }
        if (run->parsed())
        {
            ex::ConfigMap c;
            if (!o.manifest.empty())
            {
                c = ex::config_from_manifest(slurp(o.manifest));
                for (const char *k : {"threads", "out"})
                    if (!o.flags[k].empty())
                        c[k] = o.flags[k];
            }
            else
                c = gather(o, o.preset);
            return execute(c);
        }
        for (auto &[n, s] : by_name)
            if (s->parsed())
                return execute(gather(o, n));
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "dcsit: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "dcsit: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
