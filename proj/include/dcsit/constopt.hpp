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

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "codes.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace dcsit
{
    // Codeword [S_m, Q_mn]^T: S has M0 points, each Q_m has M1 points. Q stored row-major, Q[m*M1 + n].
    struct NonlinearConstellation
    {
        int M0 = 0;
        int M1 = 0;
        std::vector<cplx> S;
        std::vector<cplx> Q;

        cplx q(int m, int n) const { return Q[std::size_t(m * M1 + n)]; }

        // (1/(M0 M1)) sum_m sum_n |S_m|^2 + |Q_mn|^2
        double power() const
        {
            double ps = 0.0, pq = 0.0;
            for (auto &z : S)
                ps += std::norm(z);
            for (auto &z : Q)
                pq += std::norm(z);
            return ps / M0 + pq / (double(M0) * M1);
        }

        void normalize()
        {
            double p = power();
            if (!(p > 0.0))
                throw std::domain_error("NonlinearConstellation: zero power");
            double k = 1.0 / std::sqrt(p);
            for (auto &z : S)
                z *= k;
            for (auto &z : Q)
                z *= k;
        }

        // Stacked F = [S_1..S_M0, Q_11..Q_1M1, ..., Q_M0M1]
        std::vector<cplx> flatten() const
        {
            std::vector<cplx> F(S);
            F.insert(F.end(), Q.begin(), Q.end());
            return F;
        }

        static NonlinearConstellation unflatten(int M0, int M1, const std::vector<cplx> &F)
        {
            if (F.size() != std::size_t(M0 + M0 * M1))
                throw std::invalid_argument("NonlinearConstellation: stacked vector has wrong length");
            NonlinearConstellation c;
            c.M0 = M0, c.M1 = M1;
            c.S.assign(F.begin(), F.begin() + M0);
            c.Q.assign(F.begin() + M0, F.end());
            return c;
        }
    };

    // QPSK for S and for every Q_m, jointly normalized (each point scaled by 1/sqrt(2))
    inline NonlinearConstellation qpsk_product()
    {
        auto qpsk = make_constellation(Modulation::QAM, 4);
        NonlinearConstellation c;
        c.M0 = c.M1 = 4;
        for (auto &p : qpsk.points)
            c.S.push_back(p);
        for (int m = 0; m < 4; ++m)
            for (auto &p : qpsk.points)
                c.Q.push_back(p);
        c.normalize();
        return c;
    }

    inline NonlinearConstellation random_constellation(int M0, int M1, RandomStream &rng)
    {
        NonlinearConstellation c;
        c.M0 = M0, c.M1 = M1;
        for (int m = 0; m < M0; ++m)
            c.S.push_back(rng.complex_normal());
        for (int k = 0; k < M0 * M1; ++k)
            c.Q.push_back(rng.complex_normal());
        c.normalize();
        return c;
    }

    // Number of positions whose difference is nonzero (|d| > 1e-12)
    inline int weight_s(cplx d0, cplx d1)
    {
        return int(std::abs(d0) > 1e-12) + int(std::abs(d1) > 1e-12);
    }

    struct OptimizerConfig
    {
        CorrelationSpec t1;
        CorrelationSpec t2;
        double rho_over_4_db = 20.0;
        std::vector<double> alphas{1.0, 5.0, 25.0};
        int max_iters = 1000;
        int restarts = 32;
        bool qpsk_start = true;
        std::uint64_t seed = 1;
        unsigned threads = 1;
        int M0 = 4;
        int M1 = 4;
        int divergence_window = 50;
        double rel_tol = 1e-12;
    };

    namespace detail
    {
        // Tr{R_t E} for the pair difference (dS, dQ)
        inline double trace_re(cplx t, cplx dS, cplx dQ)
        {
            return std::norm(dS) + std::norm(dQ) + 2.0 * std::real(t * dS * std::conj(dQ));
        }
    } // namespace detail

    inline double objective_pbar(const NonlinearConstellation &F, const OptimizerConfig &cfg)
    {
        const double c = db_to_linear(cfg.rho_over_4_db);
        const cplx t1 = cfg.t1.coefficient(), t2 = cfg.t2.coefficient();
        double sum = 0.0;
        for (int m = 0; m < F.M0; ++m)
            for (int u = 0; u < F.M0; ++u)
            {
                cplx dS = F.S[std::size_t(m)] - F.S[std::size_t(u)];
                for (int n = 0; n < F.M1; ++n)
                    for (int v = 0; v < F.M1; ++v)
                    {
                        cplx dQ = F.q(m, n) - F.q(u, v);
                        int w = weight_s(dS, dQ);
                        if (w == 0)
                            continue;
                        sum += w / ((1.0 + c * detail::trace_re(t1, dS, dQ)) * (1.0 + c * detail::trace_re(t2, dS, dQ)));
                    }
            }
        return sum / (double(F.M0) * F.M1);
    }

    // Stacked complex gradient, entry = dP/dRe + j dP/dIm, in the order of flatten()
    inline std::vector<cplx> gradients(const NonlinearConstellation &F, const OptimizerConfig &cfg)
    {
        const double c = db_to_linear(cfg.rho_over_4_db);
        const cplx t1 = cfg.t1.coefficient(), t2 = cfg.t2.coefficient();
        const double pre = -2.0 / (double(F.M0) * F.M1);
        std::vector<cplx> g(std::size_t(F.M0 + F.M0 * F.M1));

        for (int k = 0; k < F.M0; ++k)
        {
            cplx acc = 0.0;
            for (int u = 0; u < F.M0; ++u)
            {
                if (u == k)
                    continue;
                cplx dS = F.S[std::size_t(k)] - F.S[std::size_t(u)];
                for (int n = 0; n < F.M1; ++n)
                    for (int v = 0; v < F.M1; ++v)
                    {
                        cplx dQ = F.q(k, n) - F.q(u, v);
                        double w = weight_s(dS, dQ);
                        double A = 1.0 + c * detail::trace_re(t1, dS, dQ);
                        double B = 1.0 + c * detail::trace_re(t2, dS, dQ);
                        acc += c * (2.0 * dS + 2.0 * std::conj(t1) * dQ) * w / (A * A * B) +
                               c * (2.0 * dS + 2.0 * std::conj(t2) * dQ) * w / (A * B * B);
                    }
            }
            g[std::size_t(k)] = pre * acc;
        }

        for (int x = 0; x < F.M0; ++x)
            for (int k = 0; k < F.M1; ++k)
            {
                cplx acc = 0.0;
                for (int u = 0; u < F.M0; ++u)
                {
                    cplx dS = F.S[std::size_t(x)] - F.S[std::size_t(u)];
                    for (int v = 0; v < F.M1; ++v)
                    {
                        cplx dQ = F.q(x, k) - F.q(u, v);
                        double w = weight_s(dS, dQ);
                        if (w == 0.0)
                            continue;
                        double C = 1.0 + c * detail::trace_re(t1, dS, dQ);
                        double D = 1.0 + c * detail::trace_re(t2, dS, dQ);
                        acc += c * (2.0 * dQ + 2.0 * t1 * dS) * w / (C * C * D) +
                               c * (2.0 * dQ + 2.0 * t2 * dS) * w / (C * D * D);
                    }
                }
                g[std::size_t(F.M0 + x * F.M1 + k)] = pre * acc;
            }
        return g;
    }

    struct DescentRun
    {
        NonlinearConstellation best;
        double pbar = 0.0;
        std::vector<double> trace; // P after each iteration, starting with the initial point
        int iterations = 0;
        bool diverged = false;
        double alpha = 0.0;
        int start = 0; // -1 for the QPSK start
    };

    // F <- F - alpha g, then rescale to unit power. Keeps the lowest P seen along the path.
    inline DescentRun descend(NonlinearConstellation F, double alpha, const OptimizerConfig &cfg)
    {
        if (!(alpha > 0.0))
            throw std::invalid_argument("descend: step size must be positive");
        F.normalize();
        DescentRun run;
        run.alpha = alpha;
        double p = objective_pbar(F, cfg);
        run.best = F, run.pbar = p;
        run.trace.push_back(p);
        int rising = 0;
        for (int it = 0; it < cfg.max_iters; ++it)
        {
            auto g = gradients(F, cfg);
            auto x = F.flatten();
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] -= alpha * g[i];
            auto next = NonlinearConstellation::unflatten(F.M0, F.M1, x);
            next.normalize();
            double pn = objective_pbar(next, cfg);
            run.trace.push_back(pn);
            run.iterations = it + 1;
            rising = pn > p ? rising + 1 : 0;
            if (pn < run.pbar)
                run.best = next, run.pbar = pn;
            if (rising >= cfg.divergence_window)
            {
                run.diverged = true;
                break;
            }
            bool settled = std::abs(pn - p) <= cfg.rel_tol * p;
            F = std::move(next), p = pn;
            if (settled)
                break;
        }
        return run;
    }

    struct OptimizeResult
    {
        NonlinearConstellation best;
        double pbar = 0.0;
        double baseline = 0.0; // P of the QPSK product
        DescentRun winner;
        std::vector<DescentRun> runs; // constellations dropped, summaries only
    };

    // Multi-start search: optional QPSK start plus `restarts` seeded random starts, each tried
    // with every step size. Ties resolve to the earliest (start, alpha) job.
    inline OptimizeResult optimize(const OptimizerConfig &cfg)
    {
        if (cfg.restarts < 0 || cfg.alphas.empty())
            throw std::invalid_argument("optimize: need at least one start and one step size");
        std::vector<std::pair<int, double>> jobs;
        if (cfg.qpsk_start)
            for (double a : cfg.alphas)
                jobs.emplace_back(-1, a);
        for (int r = 0; r < cfg.restarts; ++r)
            for (double a : cfg.alphas)
                jobs.emplace_back(r, a);
        if (jobs.empty())
            throw std::invalid_argument("optimize: no starting point");
        if (cfg.qpsk_start && (cfg.M0 != 4 || cfg.M1 != 4))
            throw std::invalid_argument("optimize: QPSK start needs M0 = M1 = 4");

        auto start_point = [&](int r)
        {
            if (r < 0)
                return qpsk_product();
            RandomStream rng = RandomStream::derive(cfg.seed, {std::uint64_t(r)});
            return random_constellation(cfg.M0, cfg.M1, rng);
        };

        std::vector<DescentRun> runs(jobs.size());
        auto work = [&](std::size_t j)
        {
            runs[j] = descend(start_point(jobs[j].first), jobs[j].second, cfg);
            runs[j].start = jobs[j].first;
        };
        unsigned T = std::max(1u, std::min<unsigned>(cfg.threads, unsigned(jobs.size())));
        if (T == 1)
            for (std::size_t j = 0; j < jobs.size(); ++j)
                work(j);
        else
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < T; ++w)
                pool.emplace_back([&, w]
                                  {
                                      for (std::size_t j = w; j < jobs.size(); j += T)
                                          work(j);
                                  });
        }

        std::size_t best = 0;
        for (std::size_t j = 1; j < runs.size(); ++j)
            if (runs[j].pbar < runs[best].pbar)
                best = j;
        OptimizeResult res;
        res.best = runs[best].best;
        res.pbar = runs[best].pbar;
        res.winner = runs[best];
        if (cfg.M0 == 4 && cfg.M1 == 4)
            res.baseline = objective_pbar(qpsk_product(), cfg);
        for (auto &r : runs)
        {
            r.best = {};
            r.trace.clear();
        }
        res.runs = std::move(runs);
        return res;
    }

    // Largest distance from any point to the nearest point of QPSK/sqrt(2), minimized over a
    // common rotation of all points (the objective is blind to it)
    inline double qpsk_displacement(const NonlinearConstellation &F)
    {
        auto qpsk = make_constellation(Modulation::QAM, 4);
        auto worst_at = [&](double th)
        {
            cplx r = std::polar(1.0, th);
            double worst = 0.0;
            auto visit = [&](cplx z)
            {
                double best = std::numeric_limits<double>::infinity();
                for (auto &p : qpsk.points)
                    best = std::min(best, std::abs(z * r - p / std::sqrt(2.0)));
                worst = std::max(worst, best);
            };
            for (auto &z : F.S)
                visit(z);
            for (auto &z : F.Q)
                visit(z);
            return worst;
        };
        double best = std::numeric_limits<double>::infinity(), arg = 0.0;
        for (int i = 0; i < 720; ++i)
        {
            double th = 0.5 * pi * i / 720.0;
            double w = worst_at(th);
            if (w < best)
                best = w, arg = th;
        }
        double step = 0.5 * pi / 720.0;
        for (int i = -100; i <= 100; ++i)
            best = std::min(best, worst_at(arg + step * i / 100.0));
        return best;
    }

    // One line per point: "S idx re im" or "Q_m idx re im"
    inline void write_constellation(std::ostream &os, const NonlinearConstellation &F)
    {
        char buf[128];
        for (int m = 0; m < F.M0; ++m)
        {
            std::snprintf(buf, sizeof buf, "S %d %.17g %.17g\n", m, F.S[std::size_t(m)].real(),
                          F.S[std::size_t(m)].imag());
            os << buf;
        }
        for (int m = 0; m < F.M0; ++m)
            for (int n = 0; n < F.M1; ++n)
            {
                std::snprintf(buf, sizeof buf, "Q_%d %d %.17g %.17g\n", m, n, F.q(m, n).real(), F.q(m, n).imag());
                os << buf;
            }
    }

    inline NonlinearConstellation read_constellation(std::istream &is)
    {
        std::map<int, cplx> S;
        std::map<std::pair<int, int>, cplx> Q;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line))
        {
            ++lineno;
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            std::string id;
            int idx = -1;
            double re = 0.0, im = 0.0;
            if (!(ls >> id >> idx >> re >> im) || idx < 0)
                throw std::runtime_error("constellation file: malformed line " + std::to_string(lineno));
            if (id == "S")
                S[idx] = {re, im};
            else if (id.rfind("Q_", 0) == 0)
                Q[{std::stoi(id.substr(2)), idx}] = {re, im};
            else
                throw std::runtime_error("constellation file: unknown set '" + id + "'");
        }
        NonlinearConstellation F;
        F.M0 = int(S.size());
        if (F.M0 == 0 || Q.size() % S.size() != 0)
            throw std::runtime_error("constellation file: inconsistent set sizes");
        F.M1 = int(Q.size() / S.size());
        for (int m = 0; m < F.M0; ++m)
        {
            auto it = S.find(m);
            if (it == S.end())
                throw std::runtime_error("constellation file: missing S index " + std::to_string(m));
            F.S.push_back(it->second);
        }
        for (int m = 0; m < F.M0; ++m)
            for (int n = 0; n < F.M1; ++n)
            {
                auto it = Q.find({m, n});
                if (it == Q.end())
                    throw std::runtime_error("constellation file: missing Q_" + std::to_string(m) + " index " +
                                             std::to_string(n));
                F.Q.push_back(it->second);
            }
        return F;
    }

    // T = 1 book with codewords [S_m, Q_mn]; symbol labels are (m, n) in natural binary
    inline CodeBook nonlinear_codebook(const NonlinearConstellation &F)
    {
        CodeBook book;
        book.kind = CodeKind::Nonlinear;
        book.T = 1;
        book.Q = 2;
        book.constellation = "nonlinear";
        book.bits_per_symbol = std::bit_width(unsigned(std::max(F.M0, F.M1) - 1));
        for (int m = 0; m < F.M0; ++m)
            for (int n = 0; n < F.M1; ++n)
            {
                Codeword c;
                c.col[0] = {F.S[std::size_t(m)], F.q(m, n)};
                book.codewords.push_back(c);
                book.symbols.push_back(std::uint16_t(m));
                book.symbols.push_back(std::uint16_t(n));
            }
        return book;
    }

} // namespace dcsit
