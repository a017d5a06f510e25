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

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>

namespace dcsit
{
    using cplx = std::complex<double>;

    // Column vector with two complex entries
    using Vec2 = std::array<cplx, 2>;

    inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;
    inline constexpr double pi = 3.14159265358979323846264338327950288;

    // 2x2 complex matrix, row-major: [[a, b], [c, d]]
    struct Mat2
    {
        cplx a{}, b{}, c{}, d{};

        static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
        static constexpr Mat2 diag(cplx x, cplx y) { return {x, 0.0, 0.0, y}; }

        cplx trace() const { return a + d; }
        cplx det() const { return a * d - b * c; }
        Mat2 adjoint() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
        double frobenius_sq() const { return std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d); }

        Mat2 &operator+=(const Mat2 &o)
        {
            a += o.a, b += o.b, c += o.c, d += o.d;
            return *this;
        }
        Mat2 &operator-=(const Mat2 &o)
        {
            a -= o.a, b -= o.b, c -= o.c, d -= o.d;
            return *this;
        }
        Mat2 &operator*=(cplx s)
        {
            a *= s, b *= s, c *= s, d *= s;
            return *this;
        }
    };

    inline Mat2 operator+(Mat2 x, const Mat2 &y) { return x += y; }
    inline Mat2 operator-(Mat2 x, const Mat2 &y) { return x -= y; }
    inline Mat2 operator*(Mat2 x, cplx s) { return x *= s; }
    inline Mat2 operator*(cplx s, Mat2 x) { return x *= s; }

    inline Mat2 operator*(const Mat2 &x, const Mat2 &y)
    {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }

    inline Vec2 operator*(const Mat2 &m, const Vec2 &v)
    {
        return {m.a * v[0] + m.b * v[1], m.c * v[0] + m.d * v[1]};
    }

    // Row vector times matrix
    inline Vec2 row_times(const Vec2 &r, const Mat2 &m)
    {
        return {r[0] * m.a + r[1] * m.c, r[0] * m.b + r[1] * m.d};
    }

    inline cplx dot_row(const Vec2 &row, const Vec2 &col) { return row[0] * col[0] + row[1] * col[1]; }
    inline double norm_sq(const Vec2 &v) { return std::norm(v[0]) + std::norm(v[1]); }

    // Hermitian 2x2 matrix stored as two real diagonals and the (0,1) entry.
    // Hermitian by construction; the (1,0) entry is conj(off).
    class Herm2
    {
    public:
        constexpr Herm2() = default;
        constexpr Herm2(double d0, double d1, cplx off) : d0_(d0), d1_(d1), off_(off) {}

        static constexpr Herm2 identity() { return {1.0, 1.0, 0.0}; }
        static constexpr Herm2 diag(double x, double y) { return {x, y, 0.0}; }

        // Outer product v v^H
        static Herm2 outer(const Vec2 &v) { return {std::norm(v[0]), std::norm(v[1]), v[0] * std::conj(v[1])}; }

        // Takes the Hermitian part of a general matrix; throws if the input is not Hermitian within tol
        static Herm2 from_mat(const Mat2 &m, double tol = 1e-12)
        {
            double scale = std::max(1.0, std::sqrt(m.frobenius_sq()));
            if (std::abs(m.a.imag()) > tol * scale || std::abs(m.d.imag()) > tol * scale ||
                std::abs(m.b - std::conj(m.c)) > tol * scale)
                throw std::invalid_argument("Herm2::from_mat: matrix is not Hermitian");
            return {m.a.real(), m.d.real(), 0.5 * (m.b + std::conj(m.c))};
        }

        double d0() const { return d0_; }
        double d1() const { return d1_; }
        cplx off() const { return off_; }

        cplx operator()(int i, int j) const
        {
            if (i == 0 && j == 0)
                return d0_;
            if (i == 1 && j == 1)
                return d1_;
            return (i == 0) ? off_ : std::conj(off_);
        }

        Mat2 mat() const { return {d0_, off_, std::conj(off_), d1_}; }
        double trace() const { return d0_ + d1_; }
        double det() const { return d0_ * d1_ - std::norm(off_); }

        Herm2 &operator+=(const Herm2 &o)
        {
            d0_ += o.d0_, d1_ += o.d1_, off_ += o.off_;
            return *this;
        }
        Herm2 &operator*=(double s)
        {
            d0_ *= s, d1_ *= s, off_ *= s;
            return *this;
        }

    private:
        double d0_ = 0.0, d1_ = 0.0;
        cplx off_{};
    };

    inline Herm2 operator+(Herm2 x, const Herm2 &y) { return x += y; }
    inline Herm2 operator*(Herm2 x, double s) { return x *= s; }
    inline Herm2 operator*(double s, Herm2 x) { return x *= s; }

    // Tr{A B} for Hermitian A, B (always real)
    inline double trace_product(const Herm2 &A, const Herm2 &B)
    {
        return A.d0() * B.d0() + A.d1() * B.d1() + 2.0 * std::real(A.off() * std::conj(B.off()));
    }

    namespace detail
    {
        constexpr double eps = std::numeric_limits<double>::epsilon();

        // E_n(x) e^x by modified Lentz continued fraction, x > ~1
        inline double expint_cf_scaled(int n, double x)
        {
            const double tiny = 1e-300;
            double b = x + n;
            double c = 1.0 / tiny;
            double d = 1.0 / b;
            double h = d;
            for (int i = 1; i < 10000; ++i)
            {
                double an = -double(i) * double(n - 1 + i);
                b += 2.0;
                d = 1.0 / (an * d + b);
                c = b + an / c;
                double del = c * d;
                h *= del;
                if (std::abs(del - 1.0) < eps)
                    return h;
            }
            throw std::runtime_error("expint continued fraction did not converge");
        }

        // E1(x) for 0 < x <= ~1 by the alternating power series
        inline double e1_series(double x)
        {
            double sum = 0.0, term = 1.0;
            for (int k = 1; k < 200; ++k)
            {
                term *= -x / k;
                double add = term / k;
                sum += add;
                if (std::abs(add) < eps * std::abs(sum))
                    break;
            }
            return -euler_gamma - std::log(x) - sum;
        }
    } // namespace detail

    // e^x E1(x) for x > 0
    inline double expint_e1_scaled(double x)
    {
        if (!(x > 0.0))
            throw std::domain_error("expint_e1_scaled: x must be positive");
        if (x > 1.0)
            return detail::expint_cf_scaled(1, x);
        return std::exp(x) * detail::e1_series(x);
    }

    // e^x E2(x) for x > 0; uses E2 = e^{-x} - x E1 below the switch point
    inline double expint_e2_scaled(double x)
    {
        if (!(x > 0.0))
            throw std::domain_error("expint_e2_scaled: x must be positive");
        if (x > 1.0)
            return detail::expint_cf_scaled(2, x);
        return 1.0 - x * expint_e1_scaled(x);
    }

    // Exponential integral Ei(x) = PV int_{-inf}^{x} e^t / t dt
    inline double exp_integral_ei(double x)
    {
        if (x == 0.0 || std::isnan(x))
            throw std::domain_error("exp_integral_ei: x must be nonzero");
        if (x < 0.0)
        {
            double y = -x;
            if (y > 1.0)
                return -std::exp(-y) * detail::expint_cf_scaled(1, y);
            return -detail::e1_series(y);
        }
        if (x < 40.0)
        {
            double sum = 0.0, term = 1.0;
            for (int k = 1; k < 500; ++k)
            {
                term *= x / k;
                double add = term / k;
                sum += add;
                if (add < detail::eps * sum)
                    break;
            }
            return euler_gamma + std::log(x) + sum;
        }
        // asymptotic e^x/x sum k!/x^k, truncated at the smallest term
        double sum = 1.0, term = 1.0;
        for (int k = 1; k < 60; ++k)
        {
            double next = term * k / x;
            if (next > term)
                break;
            term = next;
            sum += term;
            if (term < detail::eps * sum)
                break;
        }
        return std::exp(x) / x * sum;
    }

    // Eigenvalues of a Hermitian 2x2 matrix, descending
    inline std::pair<double, double> eig_herm2(const Herm2 &M)
    {
        double mean = 0.5 * (M.d0() + M.d1());
        double r = std::hypot(0.5 * (M.d0() - M.d1()), std::abs(M.off()));
        double l1 = mean + r;
        double l2 = mean - r;
        // small eigenvalue from det/l1 avoids cancellation
        if (mean > 0.0 && l1 > 0.0 && l2 < 0.5 * l1)
            l2 = M.det() / l1;
        else if (mean < 0.0 && l2 < 0.0 && l1 > 0.5 * l2)
            l1 = M.det() / l2;
        return {l1, l2};
    }

    // Roots of the characteristic polynomial of a general 2x2 matrix, ordered by descending real part
    inline std::pair<cplx, cplx> eig_general2(const Mat2 &M)
    {
        cplx half_tr = 0.5 * M.trace();
        cplx det = M.det();
        cplx s = std::sqrt(half_tr * half_tr - det);
        cplx p = half_tr + s, m = half_tr - s;
        cplx l1, l2;
        if (std::abs(p) >= std::abs(m))
            l1 = p, l2 = (p != 0.0) ? det / p : m;
        else
            l1 = m, l2 = det / m;
        if (l2.real() > l1.real())
            std::swap(l1, l2);
        return {l1, l2};
    }

    // Eigenvalues of A*B for PSD Hermitian A, B; real, nonnegative, descending.
    // Imaginary round-off and tiny negative parts are clamped to zero.
    inline std::pair<double, double> eig_psd_product(const Herm2 &A, const Herm2 &B)
    {
        double tr = trace_product(A, B);
        double det = A.det() * B.det();
        double half = 0.5 * tr;
        double disc = std::max(half * half - det, 0.0);
        double l1 = half + std::sqrt(disc);
        double l2 = (l1 > 0.0) ? det / l1 : 0.0;
        return {std::max(l1, 0.0), std::max(l2, 0.0)};
    }

    // Principal square root of a PSD Hermitian 2x2 matrix
    inline Herm2 sqrt_psd(const Herm2 &M)
    {
        double s = std::sqrt(std::max(M.det(), 0.0));
        double t = std::sqrt(std::max(M.trace() + 2.0 * s, 0.0));
        if (t == 0.0)
            return {};
        return {(M.d0() + s) / t, (M.d1() + s) / t, M.off() / t};
    }

    // ln(l1/l2)/(l1-l2) with the 1/l limit at l1 = l2; both arguments positive
    inline double log_ratio(double l1, double l2)
    {
        if (!(l1 > 0.0) || !(l2 > 0.0))
            throw std::domain_error("log_ratio: arguments must be positive");
        if (l1 < l2)
            std::swap(l1, l2);
        double x = (l1 - l2) / l2;
        if (x < 1e-8)
            return (1.0 - 0.5 * x) / l2;
        return std::log1p(x) / (l1 - l2);
    }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

} // namespace dcsit
