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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include "dcsit/constopt.hpp"
#include "dcsit/dmt.hpp"
#include "dcsit/montecarlo.hpp"
#include "dcsit/pep.hpp"
#include "experiment.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

using namespace dcsit;

namespace
{
    unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

    double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

    Herm2 random_psd(std::mt19937_64 &g, bool rank1)
    {
        std::normal_distribution<double> n;
        Vec2 v{cplx(n(g), n(g)), cplx(n(g), n(g))};
        Herm2 E = Herm2::outer(v);
        if (!rank1)
            E += Herm2::outer({cplx(n(g), n(g)), cplx(n(g), n(g))});
        return E;
    }

    CorrelationSpec random_spec(std::mt19937_64 &g)
    {
        std::uniform_real_distribution<double> u;
        return CorrelationSpec(0.99 * u(g), 2.0 * pi * u(g));
    }

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    int failures = 0;

    void criterion(int id, const char *what, const std::function<Outcome()> &f)
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = f();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", what, o.detail.c_str(), sec);
        std::fflush(stdout);
    }

    std::string num(const char *f, double v)
    {
        char buf[128];
        std::snprintf(buf, sizeof buf, f, v);
        return buf;
    }

    // Difference a - b measured in combined standard errors
    double sigmas(const CurvePoint &a, const CurvePoint &b)
    {
        double s = std::hypot(a.std_error, b.std_error);
        return s > 0.0 ? (a.estimate - b.estimate) / s : (a.estimate - b.estimate) * 1e300;
    }

    const CurvePoint *at(const std::vector<CurvePoint> &c, double db)
    {
        for (auto &p : c)
            if (std::abs(p.rho_db - db) < 1e-9)
                return &p;
        return nullptr;
    }

    std::vector<CurvePoint> analytic_curve(const std::function<double(double)> &P, double lo, double hi)
    {
        std::vector<CurvePoint> out;
        for (double db = lo; db <= hi + 1e-9; db += 0.5)
        {
            CurvePoint p;
            p.rho_db = db;
            p.estimate = P(db_to_linear(db));
            out.push_back(p);
        }
        return out;
    }

    Outcome closed_forms()
    {
        std::mt19937_64 g(20260101);
        std::uniform_real_distribution<double> u;
        const Herm2 I = Herm2::identity();
        double worst = 0.0;
        std::string where;
        auto track = [&](double v, double ref, const char *name)
        {
            double r = rel(v, ref);
            if (!(r <= worst))
            {
                worst = std::isnan(r) ? 1e300 : r;
                where = name;
            }
        };
        // Tuples rotate through rank-1, scaled-identity and full-rank error matrices so every
        // literal form is exercised; each tuple costs two i.i.d. and two correlated oracle runs.
        for (int k = 0; k < 200; ++k)
        {
            Herm2 E = random_psd(g, k % 4 == 0);
            if (k % 4 == 1)
                E = (0.5 * E.trace()) * I;
            Herm2 R1 = corr_matrix(random_spec(g)), R2 = corr_matrix(random_spec(g));
            double rho = db_to_linear(60.0 * u(g));
            double c = 0.25 * rho;
            auto [l1, l2] = eig_herm2(E);
            double om = pep_numeric_oracle(Scheme::MAT, E, I, I, rho);
            double oa = pep_numeric_oracle(Scheme::AltMAT, E, I, I, rho);
            double cm = pep_numeric_oracle(Scheme::MAT, E, R1, R2, rho);
            double ca = pep_numeric_oracle(Scheme::AltMAT, E, R1, R2, rho);

            track(pep_mat_iid(l1, l2, rho).value, om, "mat iid");
            track(pep_altmat_iid(l1, l2, rho).value, oa, "altmat iid");
            track(pep_mat_correlated(E, R1, R2, rho).value, cm, "mat correlated");
            track(pep_altmat_correlated(E, R1, R2, rho).value, ca, "altmat correlated");
            if (k % 4 == 0)
            {
                double a11 = c * trace_product(R1, E), a12 = c * trace_product(R2, E);
                track(pep_mat_sm(c * E.trace()), om, "mat sm");
                track(pep_altmat_sm(c * E.trace()), oa, "altmat sm");
                track(pep_mat_sm_correlated(a11, a12), cm, "mat sm correlated");
                track(pep_altmat_sm_correlated(a11, a12), ca, "altmat sm correlated");
            }
            if (k % 4 == 1)
            {
                track(pep_mat_ostbc(c * l1), om, "mat ostbc");
                track(pep_altmat_ostbc(c * l1), oa, "altmat ostbc");
            }
        }
        return {worst < 1e-7, "200 tuples, 10 forms, worst relative error " + num("%.3g", worst) + " in " + where};
    }

    Outcome bound_dominance()
    {
        auto book = sm_codebook(constellation_by_name("qpsk"));
        std::size_t j = 1;
        double best = 1e300;
        for (std::size_t k = 1; k < book.size(); ++k)
            if (double t = book.error_matrix(0, k).trace(); t < best)
                best = t, j = k;
        Herm2 E = book.error_matrix(0, j);
        std::string d;
        bool ok = true;
        for (double db : {10.0, 20.0, 30.0})
        {
            auto mc = pep_monte_carlo(Scheme::MAT, book, 0, j, PairingScenario{}, db, 1'000'000, 7, threads());
            double bound = pep_mat_correlated(E, Herm2::identity(), Herm2::identity(), db_to_linear(db)).value;
            double z = (mc.estimate - bound) / std::max(mc.std_error, 1e-300);
            ok &= mc.estimate <= bound + 3.0 * mc.std_error;
            d += (d.empty() ? "" : "; ") + num("%g dB: ", db) + num("mc %.4g", mc.estimate) + num(" bound %.4g", bound) +
                 num(" (%+.1f sigma)", z);
        }
        return {ok, "pair (0, " + std::to_string(j) + "): " + d};
    }

    Outcome slopes()
    {
        double s1 = diversity_slope(analytic_curve([](double r) { return pep_mat_ostbc(0.25 * r * 2.0); }, 35, 45), 35, 45);
        double s2 = diversity_slope(analytic_curve([](double r) { return pep_altmat_ostbc(0.25 * r * 2.0); }, 35, 45), 35, 45);
        double s3 = diversity_slope(analytic_curve([](double r) { return pep_mat_sm(0.25 * r * 2.0); }, 35, 45), 35, 45);
        double a_mid = 0.25 * db_to_linear(40.0) * 2.0;
        double want3 = 2.0 - 1.0 / std::log(a_mid);
        bool ok = std::abs(s1 - 3.0) <= 0.05 && std::abs(s2 - 2.0) <= 0.05 && std::abs(s3 - want3) <= 0.05;
        return {ok, num("MAT O-STBC %.4f", s1) + num(", Alt MAT O-STBC %.4f", s2) + num(", MAT SM %.4f", s3) +
                        num(" vs 2 - 1/ln(a) = %.4f", want3)};
    }

    Outcome dmt_exact()
    {
        using BP = std::vector<std::pair<Rational, Rational>>;
        const Rational third(1, 3), two_thirds(2, 3), half(1, 2);
        auto pts = [](Scheme s, DmtCode c)
        {
            BP out;
            for (auto &p : dmt_curve(s, c).breakpoints)
                out.emplace_back(p.r, p.d);
            return out;
        };
        int bad = 0;
        bad += pts(Scheme::MAT, DmtCode::Optimal) != BP{{0, 3}, {third, 1}, {two_thirds, 0}};
        bad += pts(Scheme::MAT, DmtCode::SM) != BP{{0, 2}, {two_thirds, 0}};
        bad += pts(Scheme::MAT, DmtCode::OSTBC) != BP{{0, 3}, {third, 0}};
        bad += pts(Scheme::AltMAT, DmtCode::Optimal) != BP{{0, 2}, {two_thirds, 0}};
        bad += pts(Scheme::AltMAT, DmtCode::SM) != BP{{0, 2}, {two_thirds, 0}};
        bad += pts(Scheme::AltMAT, DmtCode::OSTBC) != BP{{0, 2}, {third, 0}};
        bad += pts(Scheme::TDMA, DmtCode::OSTBC) != BP{{0, 2}, {half, 0}};
        bad += dmt_eval_exact(dmt_curve(Scheme::AltMAT, DmtCode::Optimal), third) != Rational(1);
        auto dom = dominance(dmt_curve(Scheme::MAT, DmtCode::Optimal), dmt_curve(Scheme::TDMA, DmtCode::OSTBC));
        bool ok = bad == 0 && dom.relation == Relation::AGeqB;
        return {ok, std::to_string(7 - std::min(bad, 7)) + "/7 curves exact, MAT optimal " +
                        (dom.relation == Relation::AGeqB ? "dominates" : "does not dominate") + " TDMA"};
    }

    Outcome outage()
    {
        std::string d;
        bool ok = true;
        for (double eps : {0.01, 0.1})
        {
            auto mc = xy_tail_monte_carlo(eps, 10'000'000, 5, threads());
            double exact = xy_tail_probability(eps);
            double z = (mc.estimate - exact) / mc.std_error;
            ok &= std::abs(z) <= 3.0;
            d += num("eps %g: ", eps) + num("mc %.6f", mc.estimate) + num(" exact %.6f", exact) + num(" (%+.2f sigma); ", z);
        }
        OutageRate R{true, 1.0};
        std::vector<double> grid;
        for (double db = 10.0; db <= 40.0; db += 2.5)
            grid.push_back(db);
        auto curve = outage_curve(Scheme::MAT, R, grid, 4'000'000, 9, threads());
        double lo = 1e300, hi = -1e300;
        for (auto &p : curve)
            if (p.estimate >= 1e-5 && p.estimate <= 1e-2)
                lo = std::min(lo, p.rho_db), hi = std::max(hi, p.rho_db);
        double s = diversity_slope(curve, lo, hi);
        ok &= s >= 2.3 && s <= 3.5;
        d += "MAT outage slope at R = 1 over " + num("%g", lo) + num("-%g dB: ", hi) + num("%.3f", s);
        return {ok, d};
    }

    struct Fig2
    {
        std::vector<CurvePoint> mat_sm, alt_sm, mat_dayal, alt_dayal, tdma;
    };

    const Fig2 &fig2()
    {
        static const Fig2 f = []
        {
            std::vector<double> grid;
            for (double db = 0.0; db <= 40.0; db += 2.0)
                grid.push_back(db);
            StopRule rule;
            rule.target_errors = 400;
            rule.max_trials = 10'000'000;
            rule.floor = 1e-5;
            rule.threads = threads();
            auto qpsk = constellation_by_name("qpsk");
            auto sm = sm_codebook(qpsk), dayal = dayal_codebook(qpsk);
            auto ala = alamouti_codebook(constellation_by_name("8psk"));
            PairingScenario iid;
            Fig2 out;
            out.mat_sm = error_curve(Scheme::MAT, sm, iid, grid, rule, 21);
            out.alt_sm = error_curve(Scheme::AltMAT, sm, iid, grid, rule, 21);
            out.mat_dayal = error_curve(Scheme::MAT, dayal, iid, grid, rule, 21);
            out.alt_dayal = error_curve(Scheme::AltMAT, dayal, iid, grid, rule, 21);
            out.tdma = error_curve(Scheme::TDMA, ala, iid, grid, rule, 21);
            return out;
        }();
        return f;
    }

    Outcome fig2_orderings()
    {
        const Fig2 &f = fig2();
        // (a) highest SNR resolved on both curves
        double top = -1.0;
        for (auto &p : f.mat_dayal)
            if (auto q = at(f.tdma, p.rho_db); q && p.resolved && q->resolved && p.errors > 0 && q->errors > 0)
                top = std::max(top, p.rho_db);
        bool a = false;
        std::string d;
        if (top >= 0.0)
        {
            double z = sigmas(*at(f.tdma, top), *at(f.mat_dayal, top));
            a = z > 3.0;
            d += num("(a) at %g dB", top) + num(" MAT-Dayal %.3g", at(f.mat_dayal, top)->estimate) +
                 num(" vs TDMA %.3g", at(f.tdma, top)->estimate) + num(" (%.1f sigma)", z);
        }
        else
            d += "(a) no common resolved point";

        // (b) Alt MAT SM not below TDMA beyond 3 sigma
        bool b = true;
        double zb = 1e300, wb = 0.0;
        for (auto &p : f.alt_sm)
            if (auto q = at(f.tdma, p.rho_db))
                if (double z = sigmas(p, *q); z < zb)
                    zb = z, wb = p.rho_db;
        b = zb >= -3.0;
        d += num("; (b) worst Alt-MAT-SM minus TDMA %+.1f sigma", zb) + num(" at %g dB", wb);

        // (c) Alt MAT not below MAT at any point, SM and Dayal
        double zc = 1e300, wc = 0.0;
        for (auto *pair : {&f.alt_sm, &f.alt_dayal})
        {
            auto &mat = pair == &f.alt_sm ? f.mat_sm : f.mat_dayal;
            for (auto &p : *pair)
                if (auto q = at(mat, p.rho_db))
                    if (double z = sigmas(p, *q); z < zc)
                        zc = z, wc = p.rho_db;
        }
        bool c = zc >= -3.0;
        d += num("; (c) worst Alt-MAT minus MAT %+.1f sigma", zc) + num(" at %g dB", wc);
        return {a && b && c, d};
    }

    Outcome pairing()
    {
        std::vector<double> grid{0, 5, 10, 15, 20};
        StopRule rule;
        rule.target_errors = 20000;
        rule.max_trials = 20'000'000;
        rule.threads = threads();
        auto book = sm_codebook(constellation_by_name("qpsk"));
        CorrelationSpec a(0.99, 0.0);
        std::vector<PairingScenario> sc = {{"phi=0", a, a, PhaseMode::Joint},
                                           {"phi=pi/2", a, a.rotated(pi / 2), PhaseMode::Joint},
                                           {"phi=pi", a, a.rotated(pi), PhaseMode::Joint}};
        auto curves = pairing_study(sc, Scheme::MAT, book, grid, rule, 33);
        auto &iid = curves[0].points;
        auto p0 = *at(curves[1].points, 20), p2 = *at(curves[2].points, 20), p3 = *at(curves[3].points, 20);
        bool order = p0.estimate > p2.estimate && p2.estimate > p3.estimate;
        double worst = 0.0, worst_db = 0.0, worst_rel = 0.0;
        for (double db : {0.0, 5.0, 10.0, 15.0})
        {
            auto &p = *at(curves[3].points, db), &q = *at(iid, db);
            if (double z = std::abs(sigmas(p, q)); z > worst)
                worst = z, worst_db = db, worst_rel = p.estimate / q.estimate - 1.0;
        }
        Herm2 s = corr_matrix(a) + corr_matrix(a.rotated(pi));
        bool ident = s.d0() == 2.0 && s.d1() == 2.0 && s.off() == cplx(0.0);
        for (double psi = 0.1; psi < 6.3; psi += 0.7)
        {
            CorrelationSpec b(0.99, psi);
            Herm2 t = corr_matrix(b) + corr_matrix(b.rotated(pi));
            ident &= t.d0() == 2.0 && t.d1() == 2.0 && t.off() == cplx(0.0);
        }
        return {order && worst <= 3.0 && ident,
                num("20 dB BER phi=0 %.4g", p0.estimate) + num(" > pi/2 %.4g", p2.estimate) +
                    num(" > pi %.4g", p3.estimate) + (order ? "" : " VIOLATED") +
                    num("; phi=pi vs iid up to 15 dB max %.1f sigma", worst) + num(" at %g dB", worst_db) +
                    num(" (%+.1f%%)", 100.0 * worst_rel) +
                    "; R sum = 2I " + (ident ? "exact" : "not exact")};
    }

    Outcome snr_gap()
    {
        double d2T = 2.0 - std::sqrt(2.0), d2M = 2.0, rho = 100.0;
        double f = snr_gap_db(rho, d2T, d2M), n = snr_gap_db_numeric(rho, d2T, d2M);
        return {std::abs(f - n) <= 0.05, num("formula %.4f dB", f) + num(", numeric %.4f dB", n)};
    }

    Outcome optimizer()
    {
        OptimizerConfig cfg;
        cfg.t1 = CorrelationSpec(0.95, 0.0);
        cfg.t2 = CorrelationSpec(0.95, 0.0);
        cfg.threads = threads();

        // gradients against central differences at a random point
        RandomStream rng = RandomStream::derive(3, {0});
        auto F = random_constellation(4, 4, rng);
        auto g = gradients(F, cfg);
        auto x = F.flatten();
        double worst = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
        {
            double parts[2];
            for (int im = 0; im < 2; ++im)
            {
                const double h = 1e-6;
                auto xp = x, xm = x;
                xp[k] += im ? cplx(0, h) : cplx(h, 0);
                xm[k] -= im ? cplx(0, h) : cplx(h, 0);
                auto Fp = NonlinearConstellation::unflatten(F.M0, F.M1, xp);
                auto Fm = NonlinearConstellation::unflatten(F.M0, F.M1, xm);
                parts[im] = (objective_pbar(Fp, cfg) - objective_pbar(Fm, cfg)) / (2 * h);
            }
            worst = std::max(worst, std::abs(cplx(parts[0], parts[1]) - g[k]) / std::max(std::abs(g[k]), 1e-12));
        }
        bool grad_ok = worst <= 1e-5;

        auto same = optimize(cfg);
        double r1 = same.pbar / same.baseline;
        cfg.t2 = cfg.t1.rotated(pi);
        auto opp = optimize(cfg);
        double r2 = opp.pbar / opp.baseline;
        bool ok = grad_ok && r1 <= 0.95 && std::abs(r2 - 1.0) <= 0.02;
        return {ok, num("gradient worst relative error %.2g", worst) + num("; (0.95, 0.95) P/P_qpsk = %.4f", r1) +
                        num("; (0.95, -0.95) P/P_qpsk = %.4f", r2) + (std::abs(r2 - 1.0) <= 0.02 ? "" : " (not within 2%)")};
    }

    Outcome determinism()
    {
        namespace ex = dcsit::experiment;
        std::vector<ex::ConfigMap> cfgs = {
            {{"experiment", "simulate"}, {"snr_db", "0:20:5"}, {"max_trials", "200000"}, {"batch", "1024"}},
            {{"experiment", "simulate"}, {"scheme", "tdma"}, {"code", "alamouti"}, {"constellation", "8psk"},
             {"snr_db", "0:20:10"}, {"max_trials", "100000"}, {"batch", "1024"}},
            {{"experiment", "pairing"}, {"snr_db", "10"}, {"max_trials", "50000"}, {"batch", "1024"}},
            {{"experiment", "outage"}, {"snr_db", "10,20,30"}, {"trials", "100000"}, {"rate_mode", "gain"},
             {"outage_rate", "0.3"}},
            {{"experiment", "pep"}, {"snr_db", "0:40:10"}, {"bound", "union"}},
            {{"experiment", "optimize-constellation"}, {"t1_mag", "0.9"}, {"t2_mag", "0.9"}, {"restarts", "2"},
             {"max_iters", "100"}},
            {{"experiment", "fig1"}},
        };
        int files = 0, mismatched = 0;
        for (auto c : cfgs)
        {
            c["threads"] = "1";
            auto ref = ex::run(c);
            for (const char *t : {"1", "2", "5"})
            {
                c["threads"] = t;
                auto again = ex::run(c);
                for (std::size_t i = 0; i < ref.size(); ++i)
                    mismatched += i >= again.size() || again[i].content != ref[i].content;
            }
            files += int(ref.size());
        }
        return {mismatched == 0, std::to_string(files) + " artifacts from " + std::to_string(cfgs.size()) +
                                     " experiments compared at 1, 2 and 5 threads, " + std::to_string(mismatched) +
                                     " mismatches"};
    }
} // namespace

int main()
{
    std::printf("acceptance run, %u thread(s)\n", threads());
    criterion(1, "closed forms match the quadrature oracle", closed_forms);
    criterion(2, "Monte Carlo PEP stays under the bound", bound_dominance);
    criterion(3, "diversity slopes of the bounds", slopes);
    criterion(4, "DMT breakpoints and dominance", dmt_exact);
    criterion(5, "XY tail law and MAT outage slope", outage);
    criterion(6, "BER orderings at R = 4/3", fig2_orderings);
    criterion(7, "user pairing orderings", pairing);
    criterion(8, "SNR gap formula", snr_gap);
    criterion(9, "constellation optimizer", optimizer);
    criterion(10, "CSV determinism across runs and threads", determinism);
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
