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
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "codes.hpp"
#include "numerics.hpp"
#include "schemes.hpp"

namespace dcsit
{
    enum class Regime
    {
        ExactBound,
        HighSnrApprox
    };

    inline std::string to_string(Regime r) { return r == Regime::ExactBound ? "exact" : "high-snr"; }

    struct PepBound
    {
        double value = 1.0;
        Regime regime = Regime::ExactBound;
    };

    // Code families with dedicated asymptotic forms
    enum class CodeClass
    {
        FullRank,
        SM,
        OSTBC
    };

    namespace detail
    {
        // Relative spread below which a divided difference is replaced by the derivative
        inline constexpr double equal_eig_tol = 1e-6;

        // K(b) = int_0^inf e^{-y}/(1 + b y) dy = (1/b) e^{1/b} E1(1/b)
        inline double kfun(double b)
        {
            double u = 1.0 / b;
            return u * expint_e1_scaled(u);
        }

        // f(a) = a^2/b K(b), b = 1 + a
        inline double ffun(double a)
        {
            if (a == 0.0)
                return 0.0;
            double b = 1.0 + a;
            return a * a / b * kfun(b);
        }

        inline double fprime(double a)
        {
            double b = 1.0 + a;
            double K = kfun(b);
            return a * (b + 1.0) / (b * b) * K + a * a / (b * b * b) * (1.0 - (b + 1.0) * K);
        }

        // int_0^inf e^{-y} (1+y)^2 / ((1 + b1 y)(1 + b2 y)) dy with b_k = 1 + a_k
        inline double mat_bracket(double a1, double a2)
        {
            double b1 = 1.0 + a1, b2 = 1.0 + a2;
            double base = 1.0 / (b1 * b2);
            if (std::abs(b1 - b2) < equal_eig_tol * std::max(b1, b2))
                return base + fprime(0.5 * (a1 + a2));
            return base + (ffun(a1) - ffun(a2)) / (a1 - a2);
        }

        // h(a) = e^{1/a} E1(1/a), h(0) = 0
        inline double hfun(double a)
        {
            if (a < 1e-12)
                return a - a * a;
            return expint_e1_scaled(1.0 / a);
        }

        inline double hprime(double a)
        {
            if (a < 1e-12)
                return 1.0 - 2.0 * a;
            double x = 1.0 / a;
            return x * expint_e2_scaled(x);
        }

        // int_0^inf e^{-y} / ((1 + a1 y)(1 + a2 y)) dy
        inline double altmat_bracket(double a1, double a2)
        {
            double hi = std::max(a1, a2);
            if (hi == 0.0)
                return 1.0;
            if (std::abs(a1 - a2) < equal_eig_tol * hi)
                return hprime(0.5 * (a1 + a2));
            return (hfun(a1) - hfun(a2)) / (a1 - a2);
        }

        inline double clamp_prob(double p) { return std::min(p, 1.0); }

        inline void check_rho(double rho)
        {
            if (!(rho >= 0.0) || !std::isfinite(rho))
                throw std::invalid_argument("pep: rho must be finite and nonnegative");
        }

        // Roundoff negatives from a PSD eigen-solve (down to -1e-12 of the larger value) become 0
        inline std::pair<double, double> check_eigs(double l1, double l2)
        {
            double tiny = -1e-12 * std::max(std::abs(l1), std::abs(l2));
            if (l1 < 0.0 && l1 >= tiny)
                l1 = 0.0;
            if (l2 < 0.0 && l2 >= tiny)
                l2 = 0.0;
            if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l2))
                throw std::invalid_argument("pep: eigenvalues must be finite and nonnegative");
            if (l1 < l2)
                std::swap(l1, l2);
            if (l1 == 0.0)
                throw std::invalid_argument("pep: both eigenvalues are zero");
            return {l1, l2};
        }

        inline void check_corr(const Herm2 &R)
        {
            if (std::abs(R.d0() - 1.0) > 1e-9 || std::abs(R.d1() - 1.0) > 1e-9 || R.det() < -1e-12)
                throw std::invalid_argument("pep: correlation matrix must be PSD with unit diagonal");
        }
    } // namespace detail

    inline PepBound pep_mat_iid(double l1, double l2, double rho)
    {
        detail::check_rho(rho);
        std::tie(l1, l2) = detail::check_eigs(l1, l2);
        double a1 = 0.25 * rho * l1, a2 = 0.25 * rho * l2;
        return {detail::clamp_prob(detail::mat_bracket(a1, a2) / ((1.0 + a1) * (1.0 + a2))), Regime::ExactBound};
    }

    inline PepBound pep_mat_correlated(const Herm2 &E, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        detail::check_rho(rho);
        detail::check_corr(R1);
        detail::check_corr(R2);
        auto [l11, l21] = eig_psd_product(R1, E);
        auto [l12, l22] = eig_psd_product(R2, E);
        double c = 0.25 * rho;
        double pre = 1.0 / ((1.0 + c * l11) * (1.0 + c * l21));
        return {detail::clamp_prob(pre * detail::mat_bracket(c * l12, c * l22)), Regime::ExactBound};
    }

    inline PepBound pep_altmat_iid(double l1, double l2, double rho)
    {
        detail::check_rho(rho);
        std::tie(l1, l2) = detail::check_eigs(l1, l2);
        double a1 = 0.25 * rho * l1, a2 = 0.25 * rho * l2;
        return {detail::clamp_prob(detail::altmat_bracket(a1, a2) * detail::mat_bracket(a1, a2)), Regime::ExactBound};
    }

    // First factor averages over user 2's statistics, second over user 1's
    inline PepBound pep_altmat_correlated(const Herm2 &E, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        detail::check_rho(rho);
        detail::check_corr(R1);
        detail::check_corr(R2);
        auto [l11, l21] = eig_psd_product(R1, E);
        auto [l12, l22] = eig_psd_product(R2, E);
        double c = 0.25 * rho;
        return {detail::clamp_prob(detail::altmat_bracket(c * l12, c * l22) * detail::mat_bracket(c * l11, c * l21)),
                Regime::ExactBound};
    }

    // Alamouti over the MISO link of user 1 with power 4/3 rho
    inline PepBound pep_tdma(const Herm2 &E, const Herm2 &R1, double rho)
    {
        detail::check_rho(rho);
        detail::check_corr(R1);
        auto [l1, l2] = eig_psd_product(R1, E);
        double c = 0.25 * tdma_power_factor * rho;
        return {detail::clamp_prob(1.0 / ((1.0 + c * l1) * (1.0 + c * l2))), Regime::ExactBound};
    }

    inline PepBound pep_pair(Scheme s, const Herm2 &E, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        switch (s)
        {
        case Scheme::MAT:
            return pep_mat_correlated(E, R1, R2, rho);
        case Scheme::AltMAT:
            return pep_altmat_correlated(E, R1, R2, rho);
        default:
            return pep_tdma(E, R1, rho);
        }
    }

    // Closed forms written with Ei directly, for the rank-1 and scaled-identity error matrices.
    // Arguments are a = (rho/4) lambda, b = 1 + a.

    namespace detail
    {
        // e^u Ei(-u); the product is formed literally until e^u would overflow
        inline double exp_ei_neg(double u)
        {
            if (u < 700.0)
                return std::exp(u) * exp_integral_ei(-u);
            return -expint_e1_scaled(u);
        }
    } // namespace detail

    // (1/b)[1/b - (a/b^2) e^{1/b} Ei(-1/b)]
    inline double pep_mat_sm(double a)
    {
        double b = 1.0 + a;
        return (1.0 / b) * (1.0 / b - a / (b * b) * detail::exp_ei_neg(1.0 / b));
    }

    // (1/b^2)[(b^3 - b^2 + b)/b^4 - (b^2 - 1)/b^4 e^{1/b} Ei(-1/b)]
    inline double pep_mat_ostbc(double a)
    {
        double b = 1.0 + a;
        double b4 = b * b * b * b;
        return (1.0 / (b * b)) *
               ((b * b * b - b * b + b) / b4 - (b * b - 1.0) / b4 * detail::exp_ei_neg(1.0 / b));
    }

    // (1/b11)[1/b12 - (a12/b12^2) e^{1/b12} Ei(-1/b12)]
    inline double pep_mat_sm_correlated(double a11, double a12)
    {
        return pep_mat_sm(a12) * (1.0 + a12) / (1.0 + a11);
    }

    // (1/a12) e^{1/a12} Ei(-1/a12) [a11/b11^2 e^{1/b11} Ei(-1/b11) - 1/b11]; both factors are negative
    inline double pep_altmat_sm_correlated(double a11, double a12)
    {
        double first = 1.0, second = 1.0;
        if (a12 > 0.0)
            first = -(1.0 / a12) * detail::exp_ei_neg(1.0 / a12);
        if (a11 > 0.0)
        {
            double b11 = 1.0 + a11;
            second = 1.0 / b11 - a11 / (b11 * b11) * detail::exp_ei_neg(1.0 / b11);
        }
        return first * second;
    }

    inline double pep_altmat_sm(double a) { return pep_altmat_sm_correlated(a, a); }

    // (1/a^2)[a + e^{1/a} Ei(-1/a)] times the scaled-identity MAT bracket
    inline double pep_altmat_ostbc(double a)
    {
        if (a == 0.0)
            return 1.0;
        double b = 1.0 + a;
        double b4 = b * b * b * b;
        double first = (1.0 / (a * a)) * (a + detail::exp_ei_neg(1.0 / a));
        double second = (b * b * b - b * b + b) / b4 - (b * b - 1.0) / b4 * detail::exp_ei_neg(1.0 / b);
        return first * second;
    }

    // TDMA worst-pair error at high SNR, ((4/3) rho d_T^2 / 8)^{-2}
    inline double tdma_error_highsnr(double d2T, double rho)
    {
        if (!(d2T > 0.0) || !(rho > 0.0))
            throw std::invalid_argument("tdma_error_highsnr: arguments must be positive");
        double x = tdma_power_factor * rho * d2T / 8.0;
        return 1.0 / (x * x);
    }

    // (rho d_M^2/8)^{-2} ln(rho d_M^2/8)
    inline double sm_mat_error_highsnr(double d2M, double rho)
    {
        if (!(d2M > 0.0) || !(rho > 0.0))
            throw std::invalid_argument("sm_mat_error_highsnr: arguments must be positive");
        double x = rho * d2M / 8.0;
        return std::log(x) / (x * x);
    }

    // SNR offset (dB) TDMA needs to match SM-encoded MAT at rho_M
    inline double snr_gap_db(double rho_M, double d2T, double d2M)
    {
        if (!(rho_M > 0.0) || !(d2T > 0.0) || !(d2M > 0.0))
            throw std::invalid_argument("snr_gap_db: arguments must be positive");
        double x = rho_M * d2M / 8.0;
        if (!(x > 1.0))
            throw std::domain_error("snr_gap_db: rho_M d_M^2 / 8 must exceed 1");
        return 1.25 + 10.0 * std::log10(d2T / d2M) + 5.0 * std::log10(std::log(x));
    }

    // Same gap, 10 log10(rho_M / rho_T), found by solving tdma_error_highsnr(rho_T) = sm_mat_error_highsnr(rho_M)
    inline double snr_gap_db_numeric(double rho_M, double d2T, double d2M)
    {
        double target = sm_mat_error_highsnr(d2M, rho_M);
        if (!(target > 0.0))
            throw std::domain_error("snr_gap_db_numeric: SM-MAT approximation is not positive");
        auto f = [&](double gap_db) { return std::log(tdma_error_highsnr(d2T, rho_M / db_to_linear(gap_db))) - std::log(target); };
        boost::uintmax_t iters = 200;
        auto tol = boost::math::tools::eps_tolerance<double>(50);
        auto [lo, hi] = boost::math::tools::toms748_solve(f, -100.0, 100.0, tol, iters);
        return 0.5 * (lo + hi);
    }

    // Asymptotic forms for i.i.d. channels; l1 >= l2 are eigenvalues of the error matrix
    // (for OSTBC l1 = alpha, for SM l1 = lambda)
    inline PepBound highsnr_pep_iid(Scheme s, CodeClass code, double l1, double l2, double rho)
    {
        if (!(rho > 0.0) || !(l1 > 0.0))
            throw std::invalid_argument("highsnr_pep: rho and lambda must be positive");
        double c = 0.25 * rho;
        double a = c * l1;
        double v = 0.0;
        if (s == Scheme::MAT)
        {
            if (code == CodeClass::FullRank)
            {
                if (!(l2 > 0.0))
                    throw std::invalid_argument("highsnr_pep: full-rank form needs lambda2 > 0");
                v = log_ratio(l1, l2) / (c * c * c * l1 * l2);
            }
            else if (code == CodeClass::SM)
                v = std::log(a) / (a * a);
            else
                v = 1.0 / (a * a * a);
        }
        else if (s == Scheme::AltMAT)
        {
            if (code == CodeClass::FullRank)
            {
                if (!(l2 > 0.0))
                    throw std::invalid_argument("highsnr_pep: full-rank form needs lambda2 > 0");
                double r = log_ratio(l1, l2);
                v = r * r / (c * c);
            }
            else if (code == CodeClass::SM)
            {
                double r = std::log(a) / a;
                v = r * r;
            }
            else
            {
                double r = std::log(a) / (a * a);
                v = 1.0 / (a * a) - r * r;
            }
        }
        else
        {
            if (code == CodeClass::SM)
                throw std::invalid_argument("highsnr_pep: TDMA is defined with O-STBC only");
            double ct = tdma_power_factor * c;
            double l2e = (code == CodeClass::OSTBC) ? l1 : l2;
            if (!(l2e > 0.0))
                throw std::invalid_argument("highsnr_pep: TDMA form needs lambda2 > 0");
            v = 1.0 / (ct * ct * l1 * l2e);
        }
        return {v, Regime::HighSnrApprox};
    }

    // MAT with scaled-identity error alpha I: (rho/4)^{-3} alpha^{-3} (1-|t1|^2)^{-1} ln((1+|t2|)/(1-|t2|))/(2|t2|)
    inline double mat_ostbc_highsnr_correlated(double alpha, double t1, double t2, double rho)
    {
        double c = 0.25 * rho * alpha;
        double g = t2 > 0.0 ? std::log((1.0 + t2) / (1.0 - t2)) / (2.0 * t2) : 1.0;
        return g / ((1.0 - t1 * t1) * c * c * c);
    }

    inline double altmat_ostbc_highsnr_correlated(double alpha, double t1, double t2, double rho)
    {
        double c = 0.25 * rho * alpha;
        auto g = [](double t) { return t > 0.0 ? std::log((1.0 + t) / (1.0 - t)) / (2.0 * t) : 1.0; };
        return g(t1) * g(t2) / (c * c);
    }

    // (b11 b21)^{-1} ln(b12/b22)/(b12 - b22)
    inline double mat_medium_snr_correlated(const Herm2 &E, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        double c = 0.25 * rho;
        auto [l11, l21] = eig_psd_product(R1, E);
        auto [l12, l22] = eig_psd_product(R2, E);
        return log_ratio(1.0 + c * l12, 1.0 + c * l22) / ((1.0 + c * l11) * (1.0 + c * l21));
    }

    // ln(1 + (rho/4) Tr{R2 E}) / (1 + (rho/4) Tr{Re E} + (rho/4)^2 Tr{R1 E} Tr{R2 E}), Re = R1 + R2
    inline double mat_sm_medium_snr_correlated(const Herm2 &E, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        double c = 0.25 * rho;
        double t1 = trace_product(R1, E), t2 = trace_product(R2, E);
        double te = trace_product(R1 + R2, E);
        return std::log1p(c * t2) / (1.0 + c * te + c * c * t1 * t2);
    }

    inline PepBound highsnr_pep_correlated(Scheme s, CodeClass code, const Herm2 &E, const Herm2 &R1, const Herm2 &R2,
                                           double rho)
    {
        if (!(rho > 0.0))
            throw std::invalid_argument("highsnr_pep: rho must be positive");
        double c = 0.25 * rho;
        auto [l11, l21] = eig_psd_product(R1, E);
        auto [l12, l22] = eig_psd_product(R2, E);
        double alpha = 0.5 * E.trace();
        double v = 0.0;
        if (s == Scheme::MAT)
        {
            if (code == CodeClass::FullRank)
            {
                if (!(l21 > 0.0) || !(l22 > 0.0))
                    throw std::invalid_argument("highsnr_pep: full-rank form needs a full-rank error matrix");
                v = log_ratio(l12, l22) / (c * c * c * l11 * l21);
            }
            else if (code == CodeClass::SM)
                v = mat_sm_medium_snr_correlated(E, R1, R2, rho);
            else
            {
                auto [r1a, r1b] = eig_herm2(R1);
                auto [r2a, r2b] = eig_herm2(R2);
                double ca = c * alpha;
                v = log_ratio(r2a, r2b) / (r1a * r1b * ca * ca * ca);
            }
        }
        else if (s == Scheme::AltMAT)
        {
            if (code == CodeClass::FullRank)
            {
                if (!(l21 > 0.0) || !(l22 > 0.0))
                    throw std::invalid_argument("highsnr_pep: full-rank form needs a full-rank error matrix");
                v = log_ratio(l11, l21) * log_ratio(l12, l22) / (c * c);
            }
            else if (code == CodeClass::SM)
            {
                double t1 = trace_product(R1, E), t2 = trace_product(R2, E);
                v = std::log(c * t1) * std::log(c * t2) / (c * c * t1 * t2);
            }
            else
            {
                auto [r1a, r1b] = eig_herm2(R1);
                auto [r2a, r2b] = eig_herm2(R2);
                double ca = c * alpha;
                v = log_ratio(r1a, r1b) * log_ratio(r2a, r2b) / (ca * ca);
            }
        }
        else
        {
            if (!(l21 > 0.0))
                throw std::invalid_argument("highsnr_pep: TDMA form needs a full-rank error matrix");
            double ct = tdma_power_factor * c;
            v = 1.0 / (ct * ct * l11 * l21);
        }
        return {v, Regime::HighSnrApprox};
    }

    // Direct quadrature of the averaged Chernoff bound, written with determinants so it shares no
    // eigenvalue or Ei code with the closed forms.
    inline double pep_numeric_oracle(Scheme s, const Herm2 &E, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        detail::check_rho(rho);
        if (s == Scheme::TDMA)
            throw std::invalid_argument("pep_numeric_oracle: MAT and Alt MAT only");
        if (rho == 0.0)
            return 1.0;
        const double c = 0.25 * rho;
        const Mat2 M1 = R1.mat() * E.mat(), M2 = R2.mat() * E.mat();
        const double tr1 = M1.trace().real(), det1 = M1.det().real();
        const double tr2 = M2.trace().real(), det2 = M2.det().real();
        auto detI = [c](double x, double tr, double det) { return 1.0 + c * x * tr + c * c * x * x * det; };

        const double scale = c * std::max(tr1, tr2);
        std::vector<double> cuts{0.0};
        if (scale > 0.0)
            for (double p = 1e-4 / scale; p < 1.0; p *= 10.0)
                cuts.push_back(p);
        for (double p : {1.0, 4.0, 16.0, 64.0})
            if (p > cuts.back())
                cuts.push_back(p);

        // Two Kronrod orders per piece; their disagreement is the convergence test
        // (the built-in error estimate is far too pessimistic on short pieces near 0)
        using GK61 = boost::math::quadrature::gauss_kronrod<double, 61>;
        using GK31 = boost::math::quadrature::gauss_kronrod<double, 31>;
        auto integrate = [&](auto f)
        {
            double total = 0.0, alt = 0.0;
            for (std::size_t i = 0; i < cuts.size(); ++i)
            {
                double lo = cuts[i];
                double hi = i + 1 < cuts.size() ? cuts[i + 1] : std::numeric_limits<double>::infinity();
                total += GK61::integrate(f, lo, hi, 12, 1e-13);
                alt += GK31::integrate(f, lo, hi, 12, 1e-13);
            }
            if (!(std::abs(total - alt) <= 1e-11 * std::abs(total)))
                throw std::runtime_error("pep_numeric_oracle: quadrature did not converge");
            return total;
        };

        // X -> Y/(1+Y) with Y unit exponential
        auto ratio_part = [&](double tr, double det)
        { return integrate([&](double y) { return std::exp(-y) / detI(y / (1.0 + y), tr, det); }); };
        // X unit exponential
        auto plain_part = [&](double tr, double det)
        { return integrate([&](double y) { return std::exp(-y) / detI(y, tr, det); }); };

        double v = (s == Scheme::MAT) ? ratio_part(tr2, det2) / detI(1.0, tr1, det1)
                                      : plain_part(tr2, det2) * ratio_part(tr1, det1);
        return std::min(v, 1.0);
    }

    // Uniform-prior union bound: (1/|C|) sum over ordered pairs of the pairwise bound
    inline double union_bound_error(const CodeBook &book, Scheme s, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < book.size(); ++i)
            for (std::size_t j = 0; j < book.size(); ++j)
                if (i != j)
                    sum += pep_pair(s, book.error_matrix(i, j), R1, R2, rho).value;
        return sum / double(book.size());
    }

    // Largest pairwise bound, the worst-pair approximation
    inline double worst_pair_error(const CodeBook &book, Scheme s, const Herm2 &R1, const Herm2 &R2, double rho)
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < book.size(); ++i)
            for (std::size_t j = i + 1; j < book.size(); ++j)
                worst = std::max(worst, pep_pair(s, book.error_matrix(i, j), R1, R2, rho).value);
        return worst;
    }

    struct PepRow
    {
        double rho_db = 0.0;
        PepBound bound;
    };

    inline void write_pep_csv(std::ostream &os, const std::vector<PepRow> &rows)
    {
        os << "rho_db,bound,regime\n";
        char buf[96];
        for (auto &r : rows)
        {
            std::snprintf(buf, sizeof buf, "%.10g,%.17g,", r.rho_db, r.bound.value);
            os << buf << to_string(r.bound.regime) << '\n';
        }
    }

} // namespace dcsit
