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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace dcsit
{
    enum class Modulation
    {
        PSK,
        QAM
    };

    // Unit average energy; points are indexed by their Gray label
    struct Constellation
    {
        Modulation kind = Modulation::QAM;
        int bits_per_symbol = 0;
        std::vector<cplx> points;

        std::size_t size() const { return points.size(); }

        double average_energy() const
        {
            double e = 0.0;
            for (auto &p : points)
                e += std::norm(p);
            return e / double(points.size());
        }

        double min_distance_sq() const
        {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < points.size(); ++i)
                for (std::size_t j = i + 1; j < points.size(); ++j)
                    d = std::min(d, std::norm(points[i] - points[j]));
            return d;
        }

        std::string name() const
        {
            std::size_t M = points.size();
            if (kind == Modulation::PSK)
                return M == 2 ? "bpsk" : std::to_string(M) + "psk";
            return M == 4 ? "qpsk" : std::to_string(M) + "qam";
        }
    };

    namespace detail
    {
        inline bool is_pow2(long M) { return M > 0 && (M & (M - 1)) == 0; }
        inline unsigned gray(unsigned k) { return k ^ (k >> 1); }
    } // namespace detail

    inline Constellation make_constellation(Modulation kind, int M)
    {
        if (M < 2 || !detail::is_pow2(M))
            throw std::invalid_argument("make_constellation: M must be a power of 2, got " + std::to_string(M));
        Constellation c;
        c.kind = kind;
        c.bits_per_symbol = std::countr_zero(unsigned(M));
        c.points.assign(std::size_t(M), cplx{});

        if (kind == Modulation::PSK)
        {
            double offset = (M == 4) ? pi / 4.0 : 0.0;
            for (int k = 0; k < M; ++k)
                c.points[detail::gray(unsigned(k))] = std::polar(1.0, offset + 2.0 * pi * k / M);
            return c;
        }

        int m = int(std::lround(std::sqrt(double(M))));
        if (m * m != M)
            throw std::invalid_argument("make_constellation: QAM needs a square M, got " + std::to_string(M));
        int k = std::countr_zero(unsigned(m));
        double norm = std::sqrt(2.0 * (M - 1) / 3.0);
        for (int i = 0; i < m; ++i)
            for (int q = 0; q < m; ++q)
            {
                unsigned label = (detail::gray(unsigned(i)) << k) | detail::gray(unsigned(q));
                c.points[label] = cplx(2.0 * i - (m - 1), 2.0 * q - (m - 1)) / norm;
            }
        return c;
    }

    // Accepts bpsk, qpsk, 8psk, 16psk, 4qam, 16qam, 64qam, 256qam; qpsk is the 4-QAM set
    inline Constellation constellation_by_name(const std::string &name)
    {
        std::string s;
        for (char ch : name)
            if (ch != '-' && ch != '_')
                s += char(std::tolower(static_cast<unsigned char>(ch)));
        if (s == "bpsk")
            return make_constellation(Modulation::PSK, 2);
        if (s == "qpsk")
            return make_constellation(Modulation::QAM, 4);
        auto num = [&](const std::string &suffix) -> int
        {
            if (s.size() <= suffix.size() || s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0)
                return 0;
            try
            {
                return std::stoi(s.substr(0, s.size() - suffix.size()));
            }
            catch (...)
            {
                return 0;
            }
        };
        if (int M = num("psk"))
            return make_constellation(Modulation::PSK, M);
        if (int M = num("qam"))
            return make_constellation(Modulation::QAM, M);
        throw std::invalid_argument("unknown constellation '" + name + "'");
    }

    // 2xT matrix stored by columns, T <= 2
    struct Codeword
    {
        std::array<Vec2, 2> col{};
    };

    enum class CodeKind
    {
        SM,
        Alamouti,
        Dayal,
        Nonlinear
    };

    inline std::string to_string(CodeKind k)
    {
        switch (k)
        {
        case CodeKind::SM:
            return "sm";
        case CodeKind::Alamouti:
            return "alamouti";
        case CodeKind::Dayal:
            return "dayal";
        case CodeKind::Nonlinear:
            return "nonlinear";
        }
        return "?";
    }

    struct CodeBook
    {
        CodeKind kind = CodeKind::SM;
        int T = 1;
        int Q = 1;
        std::vector<Codeword> codewords;
        std::vector<std::uint16_t> symbols; // Q symbol labels per codeword
        std::vector<Codeword> basis;        // 2Q matrices, empty for nonlinear books
        std::string constellation;          // name of the underlying constellation
        int bits_per_symbol = 0;

        std::size_t size() const { return codewords.size(); }
        std::uint16_t symbol(std::size_t i, int q) const { return symbols[i * std::size_t(Q) + std::size_t(q)]; }
        int bits_per_codeword() const { return Q * bits_per_symbol; }

        int bit_errors(std::size_t i, std::size_t j) const
        {
            int e = 0;
            for (int q = 0; q < Q; ++q)
                e += std::popcount(unsigned(symbol(i, q) ^ symbol(j, q)));
            return e;
        }

        int symbol_errors(std::size_t i, std::size_t j) const
        {
            int e = 0;
            for (int q = 0; q < Q; ++q)
                e += symbol(i, q) != symbol(j, q);
            return e;
        }

        // (C - E)(C - E)^H
        Herm2 error_matrix(std::size_t i, std::size_t j) const
        {
            Herm2 E;
            for (int t = 0; t < T; ++t)
            {
                auto &a = codewords[i].col[std::size_t(t)];
                auto &b = codewords[j].col[std::size_t(t)];
                E += Herm2::outer({a[0] - b[0], a[1] - b[1]});
            }
            return E;
        }

        double average_energy() const
        {
            double e = 0.0;
            for (auto &c : codewords)
                for (int t = 0; t < T; ++t)
                    e += norm_sq(c.col[std::size_t(t)]);
            return e / double(codewords.size());
        }
    };

    namespace detail
    {
        template <class Encoder>
        CodeBook build_linear(CodeKind kind, int T, int Q, const Constellation &c, Encoder enc)
        {
            CodeBook book;
            book.kind = kind;
            book.T = T;
            book.Q = Q;
            book.constellation = c.name();
            book.bits_per_symbol = c.bits_per_symbol;

            std::size_t M = c.size();
            std::size_t n = 1;
            for (int q = 0; q < Q; ++q)
                n *= M;
            book.codewords.reserve(n);
            book.symbols.reserve(n * std::size_t(Q));
            std::vector<cplx> s(static_cast<std::size_t>(Q));
            for (std::size_t idx = 0; idx < n; ++idx)
            {
                std::size_t r = idx;
                for (int q = 0; q < Q; ++q)
                {
                    auto lab = std::uint16_t(r % M);
                    r /= M;
                    book.symbols.push_back(lab);
                    s[std::size_t(q)] = c.points[lab];
                }
                book.codewords.push_back(enc(s));
            }

            // basis matrices: encoder response to unit real and unit imaginary inputs
            for (int part = 0; part < 2; ++part)
                for (int q = 0; q < Q; ++q)
                {
                    std::fill(s.begin(), s.end(), cplx{});
                    s[std::size_t(q)] = part == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
                    book.basis.push_back(enc(s));
                }
            return book;
        }
    } // namespace detail

    // C = (1/sqrt2) [c0; c1], T = 1
    inline CodeBook sm_codebook(const Constellation &c)
    {
        const double k = 1.0 / std::sqrt(2.0);
        return detail::build_linear(CodeKind::SM, 1, 2, c, [k](const std::vector<cplx> &s)
                                    {
            Codeword w;
            w.col[0] = {k * s[0], k * s[1]};
            return w; });
    }

    // C = (1/sqrt2) [c1, -c2*; c2, c1*]
    inline CodeBook alamouti_codebook(const Constellation &c)
    {
        const double k = 1.0 / std::sqrt(2.0);
        return detail::build_linear(CodeKind::Alamouti, 2, 2, c, [k](const std::vector<cplx> &s)
                                    {
            Codeword w;
            w.col[0] = {k * s[0], k * s[1]};
            w.col[1] = {-k * std::conj(s[1]), k * std::conj(s[0])};
            return w; });
    }

    // Full-rate 2x2 code: u = G[c1; c2], v = G[c3; c4] with a real rotation by atan(2)/2,
    // C = (1/sqrt2) [u1, z v2; z v1, u2], z = e^{j pi/4}
    inline CodeBook dayal_codebook(const Constellation &c)
    {
        if (c.kind != Modulation::QAM)
            throw std::invalid_argument("dayal_codebook: QAM constellation required, got " + c.name());
        const double k = 1.0 / std::sqrt(2.0);
        const double th = 0.5 * std::atan(2.0);
        const double cs = std::cos(th), sn = std::sin(th);
        const cplx z = std::polar(1.0, pi / 4.0);
        return detail::build_linear(CodeKind::Dayal, 2, 4, c, [=](const std::vector<cplx> &s)
                                    {
            cplx u1 = cs * s[0] + sn * s[1], u2 = -sn * s[0] + cs * s[1];
            cplx v1 = cs * s[2] + sn * s[3], v2 = -sn * s[2] + cs * s[3];
            Codeword w;
            w.col[0] = {k * u1, k * z * v1};
            w.col[1] = {k * z * v2, k * u2};
            return w; });
    }

    inline CodeBook make_codebook(CodeKind kind, const Constellation &c)
    {
        switch (kind)
        {
        case CodeKind::SM:
            return sm_codebook(c);
        case CodeKind::Alamouti:
            return alamouti_codebook(c);
        case CodeKind::Dayal:
            return dayal_codebook(c);
        default:
            throw std::invalid_argument("make_codebook: nonlinear books are built from a constellation file");
        }
    }

    struct SpectrumEntry
    {
        double l1 = 0.0, l2 = 0.0;
        std::uint64_t count = 0;
    };

    using ErrorSpectrum = std::vector<SpectrumEntry>;

    // Eigenvalue pairs of all ordered codeword pairs, merged at 1e-9 resolution
    inline ErrorSpectrum error_spectrum(const CodeBook &book)
    {
        if (book.size() < 2)
            throw std::invalid_argument("error_spectrum: codebook needs at least two codewords");
        std::map<std::pair<long long, long long>, SpectrumEntry> groups;
        for (std::size_t i = 0; i < book.size(); ++i)
            for (std::size_t j = 0; j < book.size(); ++j)
            {
                if (i == j)
                    continue;
                auto [l1, l2] = eig_herm2(book.error_matrix(i, j));
                l2 = std::max(l2, 0.0);
                if (l2 < 1e-12 * l1)
                    l2 = 0.0;
                auto key = std::make_pair(std::llround(l1 * 1e9), std::llround(l2 * 1e9));
                auto [it, fresh] = groups.try_emplace(key, SpectrumEntry{l1, l2, 0});
                it->second.count++;
            }
        ErrorSpectrum out;
        out.reserve(groups.size());
        for (auto &[key, e] : groups)
            out.push_back(e);
        return out;
    }

    // max over the spectrum of (l1 l2)^{-1} ln(l1/l2)/(l1 - l2)
    inline double design_metric_mat(const ErrorSpectrum &spec)
    {
        if (spec.empty())
            throw std::invalid_argument("design_metric_mat: empty spectrum");
        double best = 0.0;
        for (auto &e : spec)
        {
            if (!(e.l2 > 1e-9 * e.l1))
                throw std::domain_error("design_metric_mat: rank-deficient error matrix");
            best = std::max(best, log_ratio(e.l1, e.l2) / (e.l1 * e.l2));
        }
        return best;
    }

    // min ||C - E||_F^2 over distinct pairs
    inline double min_trace_distance(const CodeBook &book)
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < book.size(); ++i)
            for (std::size_t j = i + 1; j < book.size(); ++j)
                best = std::min(best, book.error_matrix(i, j).trace());
        return best;
    }

    // Gram matrix of the stacked real/imaginary basis equals (T/Q) I within tol
    inline bool ldc_orthonormality(const CodeBook &book, double tol = 1e-9)
    {
        if (book.basis.empty())
            throw std::invalid_argument("ldc_orthonormality: codebook has no basis matrices");
        const double target = double(book.T) / double(book.Q);
        for (std::size_t p = 0; p < book.basis.size(); ++p)
            for (std::size_t q = 0; q < book.basis.size(); ++q)
            {
                double g = 0.0;
                for (int t = 0; t < book.T; ++t)
                    for (int r = 0; r < 2; ++r)
                    {
                        cplx x = book.basis[p].col[std::size_t(t)][std::size_t(r)];
                        cplx y = book.basis[q].col[std::size_t(t)][std::size_t(r)];
                        g += x.real() * y.real() + x.imag() * y.imag();
                    }
                if (std::abs(g - (p == q ? target : 0.0)) > tol)
                    return false;
            }
        return true;
    }

    // index, then re/im of every entry, column-major
    inline void write_codebook_csv(std::ostream &os, const CodeBook &book)
    {
        os << "index";
        for (int t = 0; t < book.T; ++t)
            for (int r = 0; r < 2; ++r)
                os << ",r" << r << "t" << t << "_re,r" << r << "t" << t << "_im";
        os << '\n';
        char buf[64];
        for (std::size_t i = 0; i < book.size(); ++i)
        {
            os << i;
            for (int t = 0; t < book.T; ++t)
                for (int r = 0; r < 2; ++r)
                {
                    cplx x = book.codewords[i].col[std::size_t(t)][std::size_t(r)];
                    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", x.real(), x.imag());
                    os << buf;
                }
            os << '\n';
        }
    }

} // namespace dcsit
