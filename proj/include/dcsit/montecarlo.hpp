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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "codes.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "schemes.hpp"

namespace dcsit
{
    // One point of a simulated curve. For error curves estimate is the BER and
    // std_error refers to the bit counter; for outage or PEP runs it is the indicator mean.
    struct CurvePoint
    {
        double rho_db = 0.0;
        double estimate = 0.0;
        double ser = 0.0;
        std::uint64_t trials = 0;
        std::uint64_t errors = 0;
        std::uint64_t symbol_errors = 0;
        double std_error = 0.0;
        bool resolved = true;
    };

    inline double bernoulli_stderr(double p, double n) { return n > 0.0 ? std::sqrt(p * (1.0 - p) / n) : 0.0; }

    // How the correlation phases move from frame to frame
    enum class PhaseMode
    {
        Fixed,
        Joint,      // one psi per frame added to both users' phases
        Independent // separate uniform phase per user
    };

    struct PairingScenario
    {
        std::string name = "iid";
        CorrelationSpec spec1;
        CorrelationSpec spec2;
        PhaseMode phase = PhaseMode::Fixed;
    };

    // Draw order per frame: two uniforms (always), then the channel rows
    class ScenarioSampler
    {
    public:
        explicit ScenarioSampler(const PairingScenario &sc) : sc_(sc), fixed_(sc.spec1, sc.spec2) {}

        BlockFadingFrame operator()(RandomStream &rng) const
        {
            double u1 = rng.uniform(), u2 = rng.uniform();
            switch (sc_.phase)
            {
            case PhaseMode::Joint:
                return ChannelSampler(sc_.spec1.rotated(2.0 * pi * u1), sc_.spec2.rotated(2.0 * pi * u1))(rng);
            case PhaseMode::Independent:
                return ChannelSampler(sc_.spec1.rotated(2.0 * pi * u1), sc_.spec2.rotated(2.0 * pi * u2))(rng);
            default:
                return fixed_(rng);
            }
        }

    private:
        PairingScenario sc_;
        ChannelSampler fixed_;
    };

    struct StopRule
    {
        std::uint64_t target_errors = 400; // symbol errors
        std::uint64_t max_trials = 10'000'000;
        std::uint64_t batch = 4096;
        double floor = 0.0; // grid stops after the first point whose BER falls below this
        unsigned threads = 1;
        double noise_scale = 1.0;
    };

    namespace detail
    {
        struct Counts
        {
            std::uint64_t trials = 0, errors = 0, symbol_errors = 0;
            Counts &operator+=(const Counts &o)
            {
                trials += o.trials, errors += o.errors, symbol_errors += o.symbol_errors;
                return *this;
            }
        };

        // Runs batches 0, 1, 2, ... in waves of `threads` and keeps the shortest prefix
        // for which done() holds. Batch b depends only on b, so the prefix is the same for any thread count.
        template <class BatchFn, class Done>
        Counts run_batches(BatchFn fn, Done done, std::uint64_t max_batches, unsigned threads)
        {
            threads = std::max(1u, threads);
            Counts total;
            std::uint64_t next = 0;
            while (next < max_batches && !done(total))
            {
                std::uint64_t n = std::min<std::uint64_t>(threads, max_batches - next);
                std::vector<Counts> res(n);
                if (n == 1)
                    res[0] = fn(next);
                else
                {
                    std::vector<std::jthread> pool;
                    for (std::uint64_t i = 0; i < n; ++i)
                        pool.emplace_back([&, i] { res[i] = fn(next + i); });
                }
                for (auto &r : res)
                {
                    if (done(total))
                        break;
                    total += r;
                }
                next += n;
            }
            return total;
        }

        inline std::uint64_t batches_for(std::uint64_t trials, std::uint64_t batch)
        {
            return (trials + batch - 1) / batch;
        }
    } // namespace detail

    // BER/SER of user 1 per SNR point. Point p, batch b uses stream derive(seed, {p, b}), so
    // scenarios sharing a seed see the same codewords, noise and white channel draws.
    inline std::vector<CurvePoint> error_curve(Scheme scheme, const CodeBook &book, const PairingScenario &scenario,
                                               const std::vector<double> &rho_grid_db, const StopRule &rule,
                                               std::uint64_t seed)
    {
        if (!std::is_sorted(rho_grid_db.begin(), rho_grid_db.end()))
            throw std::invalid_argument("error_curve: SNR grid must be ascending");
        if (rule.batch == 0)
            throw std::invalid_argument("error_curve: batch size must be positive");
        ScenarioSampler sampler(scenario);
        const double bits = double(book.bits_per_codeword());
        std::vector<CurvePoint> out;
        for (std::size_t p = 0; p < rho_grid_db.size(); ++p)
        {
            const double rho = db_to_linear(rho_grid_db[p]);
            auto batch = [&](std::uint64_t b)
            {
                RandomStream rng = RandomStream::derive(seed, {std::uint64_t(p), b});
                detail::Counts c;
                for (std::uint64_t k = 0; k < rule.batch; ++k)
                {
                    auto frame = sampler(rng);
                    auto r = simulate_frame(scheme, book, rho, frame, rng, rule.noise_scale);
                    c.trials += 1;
                    c.errors += std::uint64_t(r.bit_errors);
                    c.symbol_errors += std::uint64_t(r.symbol_errors);
                }
                return c;
            };
            auto done = [&](const detail::Counts &c) { return c.symbol_errors >= rule.target_errors; };
            auto tot = detail::run_batches(batch, done, detail::batches_for(rule.max_trials, rule.batch), rule.threads);

            CurvePoint pt;
            pt.rho_db = rho_grid_db[p];
            pt.trials = tot.trials;
            pt.errors = tot.errors;
            pt.symbol_errors = tot.symbol_errors;
            pt.estimate = double(tot.errors) / (double(tot.trials) * bits);
            pt.ser = double(tot.symbol_errors) / (double(tot.trials) * book.Q);
            pt.std_error = bernoulli_stderr(pt.estimate, double(tot.trials) * bits);
            pt.resolved = tot.symbol_errors >= rule.target_errors;
            out.push_back(pt);
            if (rule.floor > 0.0 && pt.estimate < rule.floor)
                break;
        }
        return out;
    }

    // Outage threshold: either R = r log2(rho) or a fixed R (bits/s/Hz per user)
    struct OutageRate
    {
        bool fixed = false;
        double value = 0.0;
        double rate_at(double rho) const { return fixed ? value : value * std::log2(rho); }
    };

    // log2 det(I + c H H^H) for a 2x2 H
    inline double log2det_capacity(const Mat2 &H, double c)
    {
        double fro = H.frobenius_sq();
        double d = std::norm(H.det());
        return std::log2(1.0 + c * fro + c * c * d);
    }

    // P(log2 det(I + (rho/2) H H^H) < 3R) with the unwhitened equivalent channel, i.i.d. fading
    inline std::vector<CurvePoint> outage_curve(Scheme scheme, OutageRate rate, const std::vector<double> &rho_grid_db,
                                                std::uint64_t trials, std::uint64_t seed, unsigned threads = 1,
                                                std::uint64_t batch_size = 65536)
    {
        if (scheme == Scheme::TDMA)
            throw std::invalid_argument("outage_curve: defined for MAT and Alt MAT");
        if (!rate.fixed && (rate.value < 0.0 || rate.value > 2.0 / 3.0))
            throw std::invalid_argument("outage_curve: multiplexing gain must lie in [0, 2/3]");
        ChannelSampler sampler(CorrelationSpec::iid(), CorrelationSpec::iid());
        std::vector<CurvePoint> out;
        for (std::size_t p = 0; p < rho_grid_db.size(); ++p)
        {
            const double rho = db_to_linear(rho_grid_db[p]);
            const double thr = 3.0 * rate.rate_at(rho);
            auto batch = [&](std::uint64_t b)
            {
                RandomStream rng = RandomStream::derive(seed, {std::uint64_t(p), b});
                detail::Counts c;
                std::uint64_t n = std::min(batch_size, trials - b * batch_size);
                for (std::uint64_t k = 0; k < n; ++k)
                {
                    auto eq = equivalent_channel(scheme, sampler(rng));
                    c.trials += 1;
                    c.errors += log2det_capacity(eq.H, 0.5 * rho) < thr;
                }
                return c;
            };
            auto tot = detail::run_batches(batch, [](const detail::Counts &) { return false; },
                                           detail::batches_for(trials, batch_size), threads);
            CurvePoint pt;
            pt.rho_db = rho_grid_db[p];
            pt.trials = tot.trials;
            pt.errors = tot.errors;
            pt.estimate = double(tot.errors) / double(tot.trials);
            pt.std_error = bernoulli_stderr(pt.estimate, double(tot.trials));
            pt.resolved = tot.errors > 0;
            out.push_back(pt);
        }
        return out;
    }

    // P[XY <= eps] for independent unit exponentials X, Y
    inline double xy_tail_probability(double eps)
    {
        if (!(eps > 0.0))
            return 0.0;
        double z = 2.0 * std::sqrt(eps);
        return 1.0 - z * std::cyl_bessel_k(1.0, z);
    }

    inline CurvePoint xy_tail_monte_carlo(double eps, std::uint64_t samples, std::uint64_t seed, unsigned threads = 1,
                                          std::uint64_t batch_size = 1 << 20)
    {
        auto batch = [&](std::uint64_t b)
        {
            RandomStream rng = RandomStream::derive(seed, {b});
            detail::Counts c;
            std::uint64_t n = std::min(batch_size, samples - b * batch_size);
            for (std::uint64_t k = 0; k < n; ++k)
            {
                double x = rng.exponential(), y = rng.exponential();
                c.trials += 1;
                c.errors += x * y <= eps;
            }
            return c;
        };
        auto tot = detail::run_batches(batch, [](const detail::Counts &) { return false; },
                                       detail::batches_for(samples, batch_size), threads);
        CurvePoint pt;
        pt.trials = tot.trials;
        pt.errors = tot.errors;
        pt.estimate = double(tot.errors) / double(tot.trials);
        pt.std_error = bernoulli_stderr(pt.estimate, double(tot.trials));
        return pt;
    }

    // Least-squares slope of -ln P against ln rho over points with rho_db in [lo_db, hi_db]
    inline double diversity_slope(const std::vector<CurvePoint> &curve, double lo_db, double hi_db)
    {
        std::vector<double> xs, ys;
        for (auto &p : curve)
        {
            if (p.rho_db < lo_db || p.rho_db > hi_db)
                continue;
            if (!(p.estimate > 0.0) || !(p.std_error / p.estimate < 0.1))
                throw std::domain_error("diversity_slope: under-resolved point at " + std::to_string(p.rho_db) + " dB");
            xs.push_back(p.rho_db * std::log(10.0) / 10.0);
            ys.push_back(-std::log(p.estimate));
        }
        if (xs.size() < 3)
            throw std::domain_error("diversity_slope: fewer than three points in window");
        const double n = double(xs.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            mx += xs[i], my += ys[i];
        mx /= n, my /= n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
        return sxy / sxx;
    }

    struct ScenarioCurve
    {
        std::string name;
        std::vector<CurvePoint> points;
    };

    // One curve per scenario, i.i.d. reference first, all on the same seed
    inline std::vector<ScenarioCurve> pairing_study(const std::vector<PairingScenario> &scenarios, Scheme scheme,
                                                    const CodeBook &book, const std::vector<double> &rho_grid_db,
                                                    const StopRule &rule, std::uint64_t seed, bool include_iid = true)
    {
        std::vector<ScenarioCurve> out;
        if (include_iid)
            out.push_back({"iid", error_curve(scheme, book, PairingScenario{}, rho_grid_db, rule, seed)});
        for (auto &sc : scenarios)
            out.push_back({sc.name, error_curve(scheme, book, sc, rho_grid_db, rule, seed)});
        return out;
    }

    // Monte Carlo PEP of the pair (i -> j) through the full transmit, receive, eliminate path.
    // Counts frames where the metric of j is strictly below the metric of i.
    inline CurvePoint pep_monte_carlo(Scheme scheme, const CodeBook &book, std::size_t i, std::size_t j,
                                      const PairingScenario &scenario, double rho_db, std::uint64_t trials,
                                      std::uint64_t seed, unsigned threads = 1, std::uint64_t batch_size = 65536)
    {
        if (i >= book.size() || j >= book.size() || i == j)
            throw std::invalid_argument("pep_monte_carlo: invalid codeword pair");
        ScenarioSampler sampler(scenario);
        const double rho = db_to_linear(rho_db);
        const std::size_t T = std::size_t(book.T);
        auto batch = [&](std::uint64_t b)
        {
            RandomStream rng = RandomStream::derive(seed, {b});
            detail::Counts c;
            std::uint64_t n = std::min(batch_size, trials - b * batch_size);
            for (std::uint64_t k = 0; k < n; ++k)
            {
                auto f = sampler(rng);
                std::size_t other = rng.index(book.size());
                SlotReceptions noise{};
                for (auto &slot : noise)
                    for (auto &z : slot)
                        z = rng.complex_normal();
                std::array<Vec2, 2> rx{};
                EquivalentChannel eq;
                double rho_dec = rho;
                if (scheme == Scheme::TDMA)
                {
                    rho_dec = tdma_power_factor * rho;
                    for (std::size_t t = 0; t < T; ++t)
                        rx[t] = {std::sqrt(rho_dec) * dot_row(f.h[0], book.codewords[i].col[t]) + noise[0][t], 0.0};
                    eq = tdma_equivalent(f);
                }
                else
                {
                    auto x = transmit(scheme, book.codewords[i], book.codewords[other], book.T, f, rho);
                    rx = eliminate_interference(scheme, receive_user1(x, book.T, f, noise), book.T, f);
                    eq = equivalent_channel(scheme, f);
                }
                std::span<const Vec2> view(rx.data(), T);
                c.trials += 1;
                c.errors += ml_metric(view, eq, book.codewords[j], rho_dec) < ml_metric(view, eq, book.codewords[i], rho_dec);
            }
            return c;
        };
        auto tot = detail::run_batches(batch, [](const detail::Counts &) { return false; },
                                       detail::batches_for(trials, batch_size), threads);
        CurvePoint pt;
        pt.rho_db = rho_db;
        pt.trials = tot.trials;
        pt.errors = tot.errors;
        pt.estimate = double(tot.errors) / double(tot.trials);
        pt.std_error = bernoulli_stderr(pt.estimate, double(tot.trials));
        return pt;
    }

    struct CurveRow
    {
        std::string scheme, code, scenario;
        CurvePoint point;
    };

    inline void write_error_csv(std::ostream &os, const std::vector<CurveRow> &rows)
    {
        os << "scheme,code,scenario,rho_db,ber,ser,trials,stderr\n";
        char buf[160];
        for (auto &r : rows)
        {
            std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%llu,%.17g", r.point.rho_db, r.point.estimate,
                          r.point.ser, static_cast<unsigned long long>(r.point.trials), r.point.std_error);
            os << r.scheme << ',' << r.code << ',' << r.scenario << ',' << buf << '\n';
        }
    }

    inline void write_outage_csv(std::ostream &os, const std::string &scheme, OutageRate rate,
                                 const std::vector<CurvePoint> &pts)
    {
        os << "scheme,rate_mode,rate,rho_db,outage,trials,stderr\n";
        char buf[160];
        for (auto &p : pts)
        {
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.17g,%llu,%.17g", rate.value, p.rho_db, p.estimate,
                          static_cast<unsigned long long>(p.trials), p.std_error);
            os << scheme << ',' << (rate.fixed ? "fixed" : "gain") << ',' << buf << '\n';
        }
    }

} // namespace dcsit
