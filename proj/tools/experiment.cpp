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

#include "experiment.hpp"

#include <dcsit/constopt.hpp>
#include <dcsit/dmt.hpp>
#include <dcsit/montecarlo.hpp>
#include <dcsit/pep.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dcsit::experiment
{
    namespace
    {
        std::string trim(const std::string &s)
        {
            auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::string cur;
            std::istringstream is(s);
            while (std::getline(is, cur, sep))
                out.push_back(trim(cur));
            return out;
        }

        std::string lower(std::string s)
        {
            for (auto &c : s)
                c = char(std::tolower(static_cast<unsigned char>(c)));
            return s;
        }

        std::string fmt(const char *f, double v)
        {
            char buf[256];
            std::snprintf(buf, sizeof buf, f, v);
            return buf;
        }

        const ConfigMap &base_defaults()
        {
            static const ConfigMap m = {
                {"experiment", "simulate"},
                {"name", ""},
                {"scheme", "mat"},
                {"code", "sm"},
                {"constellation", "qpsk"},
                {"constellation_file", ""},
                {"t1_mag", "0"},
                {"t1_phase", "0"},
                {"t2_mag", "0"},
                {"t2_phase", "0"},
                {"phase_mode", "fixed"},
                {"snr_db", "0:30:2"},
                {"rate", ""},
                {"seed", "1"},
                {"out", "."},
                {"threads", "1"},
                {"target_errors", "400"},
                {"max_trials", "10000000"},
                {"batch", "4096"},
                {"floor", "0"},
                {"rate_mode", "fixed"},
                {"outage_rate", "4/3"},
                {"trials", "1000000"},
                {"lambda", ""},
                {"bound", "union"},
                {"pair", "0,1"},
                {"rho4_db", "20"},
                {"restarts", "32"},
                {"max_iters", "1000"},
                {"alphas", "1,5,25"},
                {"pair_mag", "0.99"},
            };
            return m;
        }

        const std::map<std::string, ConfigMap> &presets()
        {
            static const std::map<std::string, ConfigMap> m = {
                {"fig1", {}},
                {"fig2", {{"snr_db", "0:40:2"}, {"floor", "1e-5"}}},
                {"fig3", {{"snr_db", "0:40:2"}, {"floor", "1e-5"}, {"max_trials", "2000000"}}},
                {"fig4", {{"snr_db", "0:30:2"}, {"floor", "1e-5"}, {"pair_mag", "0.99"}, {"phase_mode", "joint"}}},
                {"fig5",
                 {{"snr_db", "0:30:2"}, {"floor", "1e-5"}, {"t1_mag", "0.95"}, {"t2_mag", "0.95"}, {"rho4_db", "20"}}},
                {"pairing", {{"phase_mode", "joint"}}},
            };
            return m;
        }

        std::uint64_t parse_u64(const ConfigMap &c, const std::string &key)
        {
            const std::string &v = c.at(key);
            try
            {
                std::size_t pos = 0;
                double d = std::stod(v, &pos);
                if (pos != v.size() || d < 0 || d != std::floor(d) || d > 1.8e19)
                    throw std::invalid_argument("");
                return std::uint64_t(d);
            }
            catch (const std::exception &)
            {
                throw std::invalid_argument("key '" + key + "' needs a non-negative integer, got '" + v + "'");
            }
        }

        double real(const ConfigMap &c, const std::string &key)
        {
            try
            {
                return parse_real(c.at(key));
            }
            catch (const std::exception &)
            {
                throw std::invalid_argument("key '" + key + "' needs a number, got '" + c.at(key) + "'");
            }
        }

        std::vector<double> real_list(const std::string &s)
        {
            std::vector<double> out;
            for (auto &p : split(s, ','))
                if (!p.empty())
                    out.push_back(parse_real(p));
            return out;
        }

        CodeKind code_by_name(const std::string &s)
        {
            std::string n = lower(s);
            if (n == "sm")
                return CodeKind::SM;
            if (n == "alamouti" || n == "ostbc" || n == "o-stbc")
                return CodeKind::Alamouti;
            if (n == "dayal")
                return CodeKind::Dayal;
            if (n == "nonlinear")
                return CodeKind::Nonlinear;
            throw std::invalid_argument("unknown code '" + s + "'");
        }

        PhaseMode phase_by_name(const std::string &s)
        {
            std::string n = lower(s);
            if (n == "fixed")
                return PhaseMode::Fixed;
            if (n == "joint")
                return PhaseMode::Joint;
            if (n == "independent")
                return PhaseMode::Independent;
            throw std::invalid_argument("unknown phase_mode '" + s + "'");
        }

        std::string read_file(const std::string &path)
        {
            std::ifstream is(path, std::ios::binary);
            if (!is)
                throw std::invalid_argument("cannot open '" + path + "'");
            std::ostringstream ss;
            ss << is.rdbuf();
            return ss.str();
        }

        CodeBook build_book(const ConfigMap &c)
        {
            CodeKind kind = code_by_name(c.at("code"));
            if (kind == CodeKind::Nonlinear)
            {
                if (c.at("constellation_file").empty())
                    throw std::invalid_argument("code 'nonlinear' needs constellation_file");
                std::istringstream is(read_file(c.at("constellation_file")));
                return nonlinear_codebook(read_constellation(is));
            }
            return make_codebook(kind, constellation_by_name(c.at("constellation")));
        }

        std::string code_label(const CodeBook &b)
        {
            if (b.kind == CodeKind::Nonlinear)
                return "nonlinear";
            return to_string(b.kind) + "-" + lower(b.constellation);
        }

        StopRule stop_rule(const ConfigMap &c)
        {
            StopRule r;
            r.target_errors = parse_u64(c, "target_errors");
            r.max_trials = parse_u64(c, "max_trials");
            r.batch = parse_u64(c, "batch");
            r.floor = real(c, "floor");
            r.threads = unsigned(std::max<std::uint64_t>(1, parse_u64(c, "threads")));
            if (r.batch == 0 || r.max_trials == 0)
                throw std::invalid_argument("batch and max_trials must be positive");
            return r;
        }

        CorrelationSpec spec(const ConfigMap &c, int user)
        {
            std::string k = "t" + std::to_string(user);
            return CorrelationSpec(real(c, k + "_mag"), real(c, k + "_phase"));
        }

        PairingScenario scenario(const ConfigMap &c)
        {
            PairingScenario sc;
            sc.spec1 = spec(c, 1);
            sc.spec2 = spec(c, 2);
            sc.phase = phase_by_name(c.at("phase_mode"));
            if (sc.spec1.magnitude() == 0.0 && sc.spec2.magnitude() == 0.0)
                sc.name = "iid";
            else
                sc.name = fmt("%g", sc.spec1.magnitude()) + "@" + fmt("%.6g", sc.spec1.phase()) + "|" +
                          fmt("%g", sc.spec2.magnitude()) + "@" + fmt("%.6g", sc.spec2.phase());
            if (sc.phase != PhaseMode::Fixed && sc.name != "iid")
                sc.name += sc.phase == PhaseMode::Joint ? "/joint" : "/independent";
            return sc;
        }

        struct Curve
        {
            std::string scheme, code, scenario, title;
        };

        std::string gp_script(const std::string &csv, const std::string &ylabel, int column,
                              const std::vector<Curve> &curves)
        {
            std::ostringstream os;
            os << "set datafile separator ','\n"
               << "set logscale y\n"
               << "set format y '10^{%L}'\n"
               << "set grid\n"
               << "set xlabel 'rho (dB)'\n"
               << "set ylabel '" << ylabel << "'\n"
               << "set key bottom left\n"
               << "sel(s, c, n) = strcol(1) eq s && strcol(2) eq c && strcol(3) eq n\n"
               << "plot";
            for (std::size_t i = 0; i < curves.size(); ++i)
            {
                auto &c = curves[i];
                os << (i ? ", \\\n     " : " ") << "'" << csv << "' using (sel('" << c.scheme << "', '" << c.code
                   << "', '" << c.scenario << "') ? $4 : 1/0):" << column << " with linespoints title '" << c.title
                   << "'";
            }
            os << "\n";
            return os.str();
        }

        std::string error_csv(const std::vector<CurveRow> &rows)
        {
            std::ostringstream os;
            write_error_csv(os, rows);
            return os.str();
        }

        void append(std::vector<CurveRow> &rows, const std::string &scheme, const std::string &code,
                    const std::string &scen, const std::vector<CurvePoint> &pts)
        {
            for (auto &p : pts)
                rows.push_back({scheme, code, scen, p});
        }

        // ---- experiments ----

        std::vector<Artifact> run_dmt(const ConfigMap &c)
        {
            std::ostringstream os;
            write_dmt_csv(os, all_dmt_curves());
            std::string csv = c.at("name") + ".csv";
            std::ostringstream gp;
            gp << "set datafile separator ','\n"
               << "set xlabel 'multiplexing gain r'\n"
               << "set ylabel 'diversity gain d(r)'\n"
               << "set grid\n"
               << "sel(s, c) = strcol(1) eq s && strcol(2) eq c\n"
               << "plot";
            bool first = true;
            for (auto &n : all_dmt_curves())
            {
                std::string s = to_string(n.scheme), k = to_string(n.code);
                gp << (first ? " " : ", \\\n     ") << "'" << csv << "' using (sel('" << s << "', '" << k
                   << "') ? $3 : 1/0):4 with linespoints title '" << s << " " << k << "'";
                first = false;
            }
            gp << "\n";
            return {{csv, os.str()}, {c.at("name") + ".gp", gp.str()}};
        }

        std::vector<Artifact> run_pep(const ConfigMap &c)
        {
            Scheme s = scheme_by_name(c.at("scheme"));
            auto grid = parse_grid(c.at("snr_db"));
            Herm2 R1 = corr_matrix(spec(c, 1)), R2 = corr_matrix(spec(c, 2));
            std::ostringstream os;
            os << "rho_db,bound,regime\n";
            auto row = [&](double db, double v, Regime r)
            { os << fmt("%.10g", db) << ',' << fmt("%.17g", v) << ',' << to_string(r) << '\n'; };

            auto lam = real_list(c.at("lambda"));
            if (!lam.empty())
            {
                if (lam.size() != 2 || lam[0] < 0 || lam[1] < 0)
                    throw std::invalid_argument("lambda needs two non-negative eigenvalues");
                double l1 = std::max(lam[0], lam[1]), l2 = std::min(lam[0], lam[1]);
                Herm2 E{l1, l2, cplx(0.0)};
                CodeKind k = code_by_name(c.at("code"));
                CodeClass cls = k == CodeKind::Alamouti ? CodeClass::OSTBC : l2 > 0 ? CodeClass::FullRank : CodeClass::SM;
                for (double db : grid)
                {
                    double rho = db_to_linear(db);
                    row(db, pep_pair(s, E, R1, R2, rho).value, Regime::ExactBound);
                    if (s != Scheme::TDMA && spec(c, 1).magnitude() == 0.0 && spec(c, 2).magnitude() == 0.0)
                    {
                        auto h = highsnr_pep_iid(s, cls, l1, l2, rho);
                        row(db, h.value, h.regime);
                    }
                }
            }
            else
            {
                CodeBook book = build_book(c);
                std::string mode = lower(c.at("bound"));
                auto pr = real_list(c.at("pair"));
                for (double db : grid)
                {
                    double rho = db_to_linear(db);
                    double v;
                    if (mode == "union")
                        v = union_bound_error(book, s, R1, R2, rho);
                    else if (mode == "worst")
                        v = worst_pair_error(book, s, R1, R2, rho);
                    else if (mode == "pair")
                    {
                        if (pr.size() != 2 || pr[0] < 0 || pr[1] < 0 || pr[0] >= double(book.size()) ||
                            pr[1] >= double(book.size()) || pr[0] == pr[1])
                            throw std::invalid_argument("pair needs two distinct codeword indices");
                        v = pep_pair(s, book.error_matrix(std::size_t(pr[0]), std::size_t(pr[1])), R1, R2, rho).value;
                    }
                    else
                        throw std::invalid_argument("bound must be union, worst or pair");
                    row(db, v, Regime::ExactBound);
                }
            }
            std::string csv = c.at("name") + ".csv";
            std::ostringstream gp;
            gp << "set datafile separator ','\n"
               << "set logscale y\n"
               << "set grid\n"
               << "set xlabel 'rho (dB)'\n"
               << "set ylabel 'PEP bound'\n"
               << "plot '" << csv << "' using (strcol(3) eq 'exact' ? $1 : 1/0):2 with lines title 'bound', \\\n"
               << "     '" << csv << "' using (strcol(3) eq 'high-snr' ? $1 : 1/0):2 with lines title 'high SNR'\n";
            return {{csv, os.str()}, {c.at("name") + ".gp", gp.str()}};
        }

        std::vector<Artifact> run_simulate(const ConfigMap &c)
        {
            Scheme s = scheme_by_name(c.at("scheme"));
            CodeBook book = build_book(c);
            auto sc = scenario(c);
            auto pts = error_curve(s, book, sc, parse_grid(c.at("snr_db")), stop_rule(c), parse_u64(c, "seed"));
            std::vector<CurveRow> rows;
            append(rows, to_string(s), code_label(book), sc.name, pts);
            std::string csv = c.at("name") + ".csv";
            std::string title = to_string(s) + " " + code_label(book);
            return {{csv, error_csv(rows)},
                    {c.at("name") + ".gp", gp_script(csv, "BER", 5, {{to_string(s), code_label(book), sc.name, title}})}};
        }

        std::vector<Artifact> run_outage(const ConfigMap &c)
        {
            Scheme s = scheme_by_name(c.at("scheme"));
            std::string mode = lower(c.at("rate_mode"));
            if (mode != "fixed" && mode != "gain")
                throw std::invalid_argument("rate_mode must be fixed or gain");
            OutageRate r{mode == "fixed", real(c, "outage_rate")};
            auto pts = outage_curve(s, r, parse_grid(c.at("snr_db")), parse_u64(c, "trials"), parse_u64(c, "seed"),
                                    unsigned(std::max<std::uint64_t>(1, parse_u64(c, "threads"))));
            std::ostringstream os;
            write_outage_csv(os, to_string(s), r, pts);
            std::string csv = c.at("name") + ".csv";
            std::ostringstream gp;
            gp << "set datafile separator ','\n"
               << "set logscale y\n"
               << "set grid\n"
               << "set xlabel 'rho (dB)'\n"
               << "set ylabel 'outage probability'\n"
               << "plot '" << csv << "' using (strcol(1) eq '" << to_string(s) << "' ? $4 : 1/0):5 with linespoints title '"
               << to_string(s) << " " << mode << " " << c.at("outage_rate") << "'\n";
            return {{csv, os.str()}, {c.at("name") + ".gp", gp.str()}};
        }

        std::vector<PairingScenario> pairing_scenarios(const ConfigMap &c)
        {
            double m = real(c, "pair_mag");
            PhaseMode pm = phase_by_name(c.at("phase_mode"));
            std::vector<PairingScenario> out;
            const std::pair<const char *, double> phis[] = {{"phi=0", 0.0}, {"phi=pi/2", pi / 2}, {"phi=pi", pi}};
            for (auto &[n, phi] : phis)
            {
                CorrelationSpec a(m, 0.0);
                out.push_back({n, a, a.rotated(phi), pm});
            }
            out.push_back({"0|t", CorrelationSpec::iid(), CorrelationSpec(m, 0.0), pm});
            out.push_back({"t|0", CorrelationSpec(m, 0.0), CorrelationSpec::iid(), pm});
            return out;
        }

        std::vector<Artifact> run_pairing(const ConfigMap &c, bool with_tdma)
        {
            Scheme s = scheme_by_name(c.at("scheme"));
            CodeBook book = build_book(c);
            auto grid = parse_grid(c.at("snr_db"));
            auto rule = stop_rule(c);
            auto seed = parse_u64(c, "seed");
            auto curves = pairing_study(pairing_scenarios(c), s, book, grid, rule, seed);
            std::vector<CurveRow> rows;
            std::vector<Curve> plot;
            std::string code = code_label(book);
            for (auto &cv : curves)
            {
                append(rows, to_string(s), code, cv.name, cv.points);
                plot.push_back({to_string(s), code, cv.name, to_string(s) + " " + cv.name});
            }
            if (with_tdma)
            {
                CodeBook tb = alamouti_codebook(constellation_by_name("8psk"));
                std::string tc = code_label(tb);
                double m = real(c, "pair_mag");
                PairingScenario corr{fmt("%g", m), CorrelationSpec(m, 0.0), CorrelationSpec::iid(),
                                     phase_by_name(c.at("phase_mode"))};
                for (auto &sc : {PairingScenario{}, corr})
                {
                    append(rows, "tdma", tc, sc.name, error_curve(Scheme::TDMA, tb, sc, grid, rule, seed));
                    plot.push_back({"tdma", tc, sc.name, "tdma " + sc.name});
                }
            }
            std::string csv = c.at("name") + ".csv";
            return {{csv, error_csv(rows)}, {c.at("name") + ".gp", gp_script(csv, "BER", 5, plot)}};
        }

        OptimizerConfig optimizer_config(const ConfigMap &c)
        {
            OptimizerConfig o;
            o.t1 = spec(c, 1);
            o.t2 = spec(c, 2);
            o.rho_over_4_db = real(c, "rho4_db");
            o.alphas = real_list(c.at("alphas"));
            o.restarts = int(parse_u64(c, "restarts"));
            o.max_iters = int(parse_u64(c, "max_iters"));
            o.seed = parse_u64(c, "seed");
            o.threads = unsigned(std::max<std::uint64_t>(1, parse_u64(c, "threads")));
            return o;
        }

        std::string constellation_text(const NonlinearConstellation &F)
        {
            std::ostringstream os;
            write_constellation(os, F);
            return os.str();
        }

        std::string optimizer_header() { return "t1_mag,t1_phase,t2_mag,t2_phase,start,alpha,iterations,diverged,pbar\n"; }

        void optimizer_rows(std::ostream &os, const OptimizerConfig &o, const OptimizeResult &r)
        {
            std::string pre = fmt("%.10g", o.t1.magnitude()) + "," + fmt("%.10g", o.t1.phase()) + "," +
                              fmt("%.10g", o.t2.magnitude()) + "," + fmt("%.10g", o.t2.phase()) + ",";
            os << pre << "qpsk-baseline,0,0,0," << fmt("%.17g", r.baseline) << '\n';
            for (auto &run : r.runs)
                os << pre << (run.start < 0 ? std::string("qpsk") : std::to_string(run.start)) << ','
                   << fmt("%.10g", run.alpha) << ',' << run.iterations << ',' << int(run.diverged) << ','
                   << fmt("%.17g", run.pbar) << '\n';
            os << pre << "best," << fmt("%.10g", r.winner.alpha) << ',' << r.winner.iterations << ",0,"
               << fmt("%.17g", r.pbar) << '\n';
        }

        std::vector<Artifact> run_optimize(const ConfigMap &c)
        {
            auto o = optimizer_config(c);
            auto r = optimize(o);
            std::ostringstream os;
            os << optimizer_header();
            optimizer_rows(os, o, r);
            return {{c.at("name") + ".csv", os.str()}, {c.at("name") + ".constellation", constellation_text(r.best)}};
        }

        std::vector<Artifact> run_fig2(const ConfigMap &c)
        {
            auto grid = parse_grid(c.at("snr_db"));
            auto rule = stop_rule(c);
            auto seed = parse_u64(c, "seed");
            struct Item
            {
                Scheme s;
                CodeKind k;
                const char *m;
            };
            const Item items[] = {{Scheme::MAT, CodeKind::SM, "qpsk"},
                                  {Scheme::AltMAT, CodeKind::SM, "qpsk"},
                                  {Scheme::MAT, CodeKind::Dayal, "qpsk"},
                                  {Scheme::AltMAT, CodeKind::Dayal, "qpsk"},
                                  {Scheme::TDMA, CodeKind::Alamouti, "8psk"}};
            std::vector<CurveRow> rows;
            std::vector<Curve> plot;
            for (auto &it : items)
            {
                auto book = make_codebook(it.k, constellation_by_name(it.m));
                std::string code = code_label(book);
                append(rows, to_string(it.s), code, "iid", error_curve(it.s, book, PairingScenario{}, grid, rule, seed));
                plot.push_back({to_string(it.s), code, "iid", to_string(it.s) + " " + code});
            }
            std::string csv = c.at("name") + ".csv";
            return {{csv, error_csv(rows)}, {c.at("name") + ".gp", gp_script(csv, "BER", 5, plot)}};
        }

        std::vector<Artifact> run_fig3(const ConfigMap &c)
        {
            auto grid = parse_grid(c.at("snr_db"));
            auto rule = stop_rule(c);
            auto seed = parse_u64(c, "seed");
            struct Item
            {
                Scheme s;
                CodeKind k;
                const char *m;
            };
            const Item items[] = {{Scheme::MAT, CodeKind::SM, "8psk"},        {Scheme::AltMAT, CodeKind::SM, "8psk"},
                                  {Scheme::MAT, CodeKind::SM, "16qam"},       {Scheme::AltMAT, CodeKind::SM, "16qam"},
                                  {Scheme::TDMA, CodeKind::Alamouti, "16qam"}, {Scheme::TDMA, CodeKind::Alamouti, "64qam"}};
            std::vector<CurveRow> rows;
            std::vector<Curve> plot;
            for (auto &it : items)
            {
                auto book = make_codebook(it.k, constellation_by_name(it.m));
                std::string code = code_label(book);
                append(rows, to_string(it.s), code, "iid", error_curve(it.s, book, PairingScenario{}, grid, rule, seed));
                plot.push_back({to_string(it.s), code, "iid", to_string(it.s) + " " + code});
            }
            std::string csv = c.at("name") + ".csv";
            return {{csv, error_csv(rows)}, {c.at("name") + ".gp", gp_script(csv, "SER", 6, plot)}};
        }

        std::vector<Artifact> run_fig5(const ConfigMap &c)
        {
            auto grid = parse_grid(c.at("snr_db"));
            auto rule = stop_rule(c);
            auto seed = parse_u64(c, "seed");
            auto qpsk = sm_codebook(constellation_by_name("qpsk"));
            std::vector<CurveRow> rows;
            std::vector<Curve> plot;
            std::vector<Artifact> files;
            std::ostringstream opt;
            opt << optimizer_header();
            const std::pair<const char *, double> phis[] = {{"0", 0.0}, {"pi/2", pi / 2}, {"pi", pi}};
            const char *tags[] = {"phi0", "phi_pi2", "phi_pi"};
            for (int i = 0; i < 3; ++i)
            {
                auto o = optimizer_config(c);
                o.t2 = o.t1.rotated(phis[i].second);
                auto r = optimize(o);
                optimizer_rows(opt, o, r);
                files.push_back({c.at("name") + "_" + tags[i] + ".constellation", constellation_text(r.best)});
                PairingScenario sc{std::string("phi=") + phis[i].first, o.t1, o.t2, PhaseMode::Fixed};
                append(rows, "mat", code_label(qpsk), sc.name, error_curve(Scheme::MAT, qpsk, sc, grid, rule, seed));
                plot.push_back({"mat", code_label(qpsk), sc.name, "QPSK " + sc.name});
                auto nl = nonlinear_codebook(r.best);
                append(rows, "mat", "nonlinear", sc.name, error_curve(Scheme::MAT, nl, sc, grid, rule, seed));
                plot.push_back({"mat", "nonlinear", sc.name, "optimized " + sc.name});
            }
            std::string csv = c.at("name") + ".csv";
            files.insert(files.begin(), {{csv, error_csv(rows)},
                                         {c.at("name") + ".gp", gp_script(csv, "SER", 6, plot)},
                                         {c.at("name") + "_optimizer.csv", opt.str()}});
            return files;
        }

        std::string sha1_hex(const std::string &data)
        {
            unsigned char md[EVP_MAX_MD_SIZE];
            unsigned int len = 0;
            if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1)
                throw std::runtime_error("SHA-1 digest failed");
            static const char hex[] = "0123456789abcdef";
            std::string out;
            for (unsigned i = 0; i < len; ++i)
            {
                out += hex[md[i] >> 4];
                out += hex[md[i] & 15];
            }
            return out;
        }
    } // namespace

    ConfigMap parse_config(const std::string &text)
    {
        ConfigMap out;
        std::istringstream is(text);
        std::string line;
        int n = 0;
        while (std::getline(is, line))
        {
            ++n;
            auto h = line.find('#');
            if (h != std::string::npos)
                line.erase(h);
            line = trim(line);
            if (line.empty())
                continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
            std::string k = trim(line.substr(0, eq));
            if (k.empty())
                throw std::invalid_argument("config line " + std::to_string(n) + ": empty key");
            out[k] = trim(line.substr(eq + 1));
        }
        return out;
    }

    std::string canonical_text(const ConfigMap &cfg)
    {
        std::string out;
        for (auto &[k, v] : cfg)
            if (k != "threads" && k != "out")
                out += k + " = " + v + "\n";
        return out;
    }

    double parse_real(const std::string &s)
    {
        std::string t = lower(trim(s));
        if (t.empty())
            throw std::invalid_argument("empty number");
        auto slash = t.find('/');
        if (slash != std::string::npos)
            return parse_real(t.substr(0, slash)) / parse_real(t.substr(slash + 1));
        double factor = 1.0;
        auto p = t.find("pi");
        if (p != std::string::npos)
        {
            if (p + 2 != t.size())
                throw std::invalid_argument("bad number '" + s + "'");
            factor = pi;
            t = trim(t.substr(0, p));
            if (t.empty() || t == "+")
                return factor;
            if (t == "-")
                return -factor;
            if (t.back() == '*')
                t.pop_back();
        }
        std::size_t pos = 0;
        double v = std::stod(t, &pos);
        if (pos != t.size())
            throw std::invalid_argument("bad number '" + s + "'");
        return v * factor;
    }

    std::vector<double> parse_grid(const std::string &s)
    {
        std::vector<double> out;
        auto parts = split(s, ':');
        if (parts.size() == 3)
        {
            double a = parse_real(parts[0]), b = parse_real(parts[1]), d = parse_real(parts[2]);
            if (!(d > 0.0) || b < a)
                throw std::invalid_argument("grid '" + s + "' needs start <= stop and a positive step");
            auto n = std::size_t(std::floor((b - a) / d + 1e-9));
            for (std::size_t i = 0; i <= n; ++i)
                out.push_back(a + double(i) * d);
        }
        else if (parts.size() == 1)
            out = real_list(s);
        else
            throw std::invalid_argument("grid '" + s + "' is neither start:stop:step nor a list");
        if (out.empty())
            throw std::invalid_argument("empty SNR grid");
        return out;
    }

    const std::vector<std::string> &experiment_names()
    {
        static const std::vector<std::string> n = {"pep",  "simulate", "outage", "dmt",  "pairing",
                                                   "optimize-constellation", "fig1", "fig2", "fig3", "fig4", "fig5"};
        return n;
    }

    ConfigMap resolve(const ConfigMap &user)
    {
        for (auto &[k, v] : user)
            if (!base_defaults().count(k))
                throw std::invalid_argument("unknown key '" + k + "'");
        ConfigMap out = base_defaults();
        std::string exp = user.count("experiment") ? user.at("experiment") : out.at("experiment");
        auto &names = experiment_names();
        if (std::find(names.begin(), names.end(), exp) == names.end())
            throw std::invalid_argument("unknown experiment '" + exp + "'");
        if (auto it = presets().find(exp); it != presets().end())
            for (auto &[k, v] : it->second)
                out[k] = v;
        for (auto &[k, v] : user)
            out[k] = v;
        out["experiment"] = exp;
        if (out["name"].empty())
            out["name"] = exp;
        return out;
    }

    std::string Report::str() const
    {
        std::string s;
        for (auto &n : notes)
            s += "note: " + n + "\n";
        for (auto &v : violations)
            s += "violation: " + v + "\n";
        s += ok() ? "ok\n" : std::to_string(violations.size()) + " violation(s)\n";
        return s;
    }

    Report validate(const ConfigMap &user)
    {
        Report rep;
        ConfigMap c;
        try
        {
            c = resolve(user);
        }
        catch (const std::exception &e)
        {
            rep.violations.push_back(e.what());
            return rep;
        }
        const std::string &exp = c.at("experiment");
        rep.notes.push_back("experiment " + exp);

        auto check = [&](auto &&f)
        {
            try
            {
                f();
            }
            catch (const std::exception &e)
            {
                rep.violations.push_back(e.what());
            }
        };
        check([&] { parse_grid(c.at("snr_db")); });
        check([&] { spec(c, 1); });
        check([&] { spec(c, 2); });
        check([&] { phase_by_name(c.at("phase_mode")); });
        for (const char *k : {"seed", "threads", "target_errors", "max_trials", "batch", "trials", "restarts",
                              "max_iters"})
            check([&] { parse_u64(c, k); });
        check([&] { real(c, "floor"); });

        bool uses_code = exp == "pep" || exp == "simulate" || exp == "pairing";
        if (!uses_code)
            return rep;

        Scheme s{};
        CodeKind k{};
        try
        {
            s = scheme_by_name(c.at("scheme"));
            k = code_by_name(c.at("code"));
        }
        catch (const std::exception &e)
        {
            rep.violations.push_back(e.what());
            return rep;
        }
        if (s == Scheme::TDMA && k != CodeKind::Alamouti)
            rep.violations.push_back("TDMA transmits the Alamouti code; code '" + c.at("code") + "' is not supported");
        if (s != Scheme::TDMA && k == CodeKind::Alamouti)
            rep.notes.push_back("Alamouti under " + to_string(s) + " uses the O-STBC error matrices");

        // Codebook size and shape without building it
        std::size_t M = 0;
        int Q = 0, T = 0, bits = 0;
        if (k == CodeKind::Nonlinear)
        {
            try
            {
                std::istringstream is(read_file(c.at("constellation_file")));
                auto F = read_constellation(is);
                M = std::size_t(F.M0) * std::size_t(F.M1);
                Q = 2;
                T = 1;
                bits = F.M0 > 1 ? std::bit_width(unsigned(std::max(F.M0, F.M1) - 1)) : 0;
                rep.notes.push_back(fmt("constellation file power %.6g (unit joint power expected)", F.power()));
                if (std::abs(F.power() - 1.0) > 1e-9)
                    rep.violations.push_back("nonlinear constellation is not at unit joint power");
            }
            catch (const std::exception &e)
            {
                rep.violations.push_back(std::string("constellation_file: ") + e.what());
                return rep;
            }
        }
        else
        {
            Constellation con;
            try
            {
                con = constellation_by_name(c.at("constellation"));
            }
            catch (const std::exception &e)
            {
                rep.violations.push_back(e.what());
                return rep;
            }
            if (k == CodeKind::Dayal && con.kind != Modulation::QAM)
                rep.violations.push_back("Dayal code needs a QAM constellation, got '" + c.at("constellation") + "'");
            M = con.size();
            bits = con.bits_per_symbol;
            Q = k == CodeKind::Dayal ? 4 : 2;
            T = k == CodeKind::SM ? 1 : 2;
            rep.notes.push_back(fmt("constellation average energy %.12g", con.average_energy()));
        }
        double words = std::pow(double(M), double(Q));
        double bytes = words * (sizeof(Codeword) + Q * sizeof(std::uint16_t));
        rep.notes.push_back(fmt("ML codebook %.0f codewords", words) + fmt(", about %.3g MiB", bytes / 1048576.0));
        if (words >= 65536.0)
            rep.notes.push_back(fmt("warning: %.0f-codeword ML codebook makes exhaustive decoding and union bounds "
                                    "expensive",
                                    words));
        if (rep.ok() && words <= double(1 << 20))
        {
            try
            {
                auto book = build_book(c);
                double e = book.average_energy() / double(book.T);
                rep.notes.push_back(fmt("power: average codeword energy per slot %.12g", e));
                if (std::abs(e - 1.0) > 1e-9)
                    rep.violations.push_back(fmt("codebook energy per slot is %.12g, expected 1", e));
            }
            catch (const std::exception &e)
            {
                rep.violations.push_back(e.what());
            }
        }

        double k_slots = s == Scheme::TDMA ? 2.0 : 3.0;
        double R = double(Q * bits) / (k_slots * double(T));
        rep.notes.push_back(fmt("per-user rate %.6g bit/s/Hz", R));
        if (!c.at("rate").empty())
        {
            double want = 0.0;
            try
            {
                want = parse_real(c.at("rate"));
            }
            catch (const std::exception &)
            {
                rep.violations.push_back("rate '" + c.at("rate") + "' is not a number");
                return rep;
            }
            if (std::abs(want - R) > 1e-9)
            {
                double b = want * k_slots * double(T) / double(Q);
                std::string need = std::abs(b - std::round(b)) < 1e-9 ? fmt("%.0f", std::exp2(std::round(b)))
                                                                       : fmt("2^%.6g", b);
                rep.violations.push_back(to_string(s) + " " + to_string(k) + " at rate " + c.at("rate") + " requires " + need +
                                         " constellation points, got " + std::to_string(M));
            }
        }
        return rep;
    }

    std::vector<Artifact> run(const ConfigMap &user)
    {
        ConfigMap c = resolve(user);
        const std::string &exp = c.at("experiment");
        if (exp == "dmt" || exp == "fig1")
            return run_dmt(c);
        if (exp == "pep")
            return run_pep(c);
        if (exp == "simulate")
            return run_simulate(c);
        if (exp == "outage")
            return run_outage(c);
        if (exp == "pairing")
            return run_pairing(c, false);
        if (exp == "fig4")
            return run_pairing(c, true);
        if (exp == "optimize-constellation")
            return run_optimize(c);
        if (exp == "fig2")
            return run_fig2(c);
        if (exp == "fig3")
            return run_fig3(c);
        return run_fig5(c);
    }

    std::string git_blob_sha1(const std::string &content)
    {
        std::string blob = "blob " + std::to_string(content.size());
        blob.push_back('\0');
        return sha1_hex(blob + content);
    }

    Artifact manifest(const ConfigMap &user, const std::vector<Artifact> &outputs)
    {
        ConfigMap c = resolve(user);
        std::string canon = canonical_text(c);
        nlohmann::ordered_json j;
        j["tool"] = "dcsit";
        j["experiment"] = c.at("experiment");
        j["seed"] = c.at("seed");
        j["threads"] = c.at("threads");
        nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
        for (auto &[k, v] : c)
            if (k != "threads" && k != "out")
                cfg[k] = v;
        j["config"] = cfg;
        j["config_sha1"] = git_blob_sha1(canon);
        nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
        if (!c.at("constellation_file").empty())
        {
            std::string path = c.at("constellation_file");
            inputs.push_back({{"file", path}, {"sha1", git_blob_sha1(read_file(path))}});
        }
        j["inputs"] = inputs;
        nlohmann::ordered_json outs = nlohmann::ordered_json::array();
        for (auto &a : outputs)
            outs.push_back({{"file", a.file}, {"bytes", a.content.size()}, {"sha1", git_blob_sha1(a.content)}});
        j["outputs"] = outs;
        return {c.at("name") + ".manifest.json", j.dump(2) + "\n"};
    }

    ConfigMap config_from_manifest(const std::string &json_text)
    {
        auto j = nlohmann::json::parse(json_text);
        ConfigMap c;
        for (auto &[k, v] : j.at("config").items())
            c[k] = v.get<std::string>();
        if (git_blob_sha1(canonical_text(c)) != j.at("config_sha1").get<std::string>())
            throw std::runtime_error("manifest config does not match its recorded hash");
        for (auto &in : j.at("inputs"))
        {
            std::string path = in.at("file").get<std::string>();
            std::string got;
            try
            {
                got = git_blob_sha1(read_file(path));
            }
            catch (const std::exception &)
            {
                throw std::runtime_error("manifest input '" + path + "' is missing");
            }
            if (got != in.at("sha1").get<std::string>())
                throw std::runtime_error("manifest input '" + path + "' changed since the run");
        }
        return c;
    }

    void write_artifacts(const std::string &dir, const std::vector<Artifact> &files)
    {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        std::vector<std::pair<fs::path, fs::path>> staged;
        try
        {
            for (auto &a : files)
            {
                fs::path dst = fs::path(dir) / a.file;
                fs::path tmp = dst;
                tmp += ".tmp";
                std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
                os << a.content;
                os.close();
                if (!os)
                    throw std::runtime_error("cannot write '" + tmp.string() + "'");
                staged.emplace_back(tmp, dst);
            }
        }
        catch (...)
        {
            for (auto &[tmp, dst] : staged)
                fs::remove(tmp);
            throw;
        }
        for (auto &[tmp, dst] : staged)
            fs::rename(tmp, dst);
    }

} // namespace dcsit::experiment
