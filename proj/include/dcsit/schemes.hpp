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
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "channel.hpp"
#include "codes.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace dcsit
{
    enum class Scheme
    {
        MAT,
        AltMAT,
        TDMA
    };

    inline std::string to_string(Scheme s)
    {
        switch (s)
        {
        case Scheme::MAT:
            return "mat";
        case Scheme::AltMAT:
            return "altmat";
        case Scheme::TDMA:
            return "tdma";
        }
        return "?";
    }

    inline Scheme scheme_by_name(const std::string &name)
    {
        if (name == "mat" || name == "MAT")
            return Scheme::MAT;
        if (name == "altmat" || name == "alt-mat" || name == "AltMAT")
            return Scheme::AltMAT;
        if (name == "tdma" || name == "TDMA")
            return Scheme::TDMA;
        throw std::invalid_argument("unknown scheme '" + name + "'");
    }

    // TDMA serves one user per slot with 4/3 of the nominal power
    inline constexpr double tdma_power_factor = 4.0 / 3.0;

    // Channel seen by user 1 after interference elimination; noise covariance diag(1, s)
    struct EquivalentChannel
    {
        Mat2 H;
        double s = 1.0;
    };

    inline EquivalentChannel mat_equivalent(const BlockFadingFrame &f)
    {
        cplx h31 = f.h[2][0];
        return {{f.h[0][0], f.h[0][1], h31 * f.g[0][0], h31 * f.g[0][1]}, 1.0 + std::norm(h31)};
    }

    inline EquivalentChannel altmat_equivalent(const BlockFadingFrame &f)
    {
        cplx h31 = f.h[2][0], h21 = f.h[1][0];
        return {{h31 * f.g[0][0], h31 * f.g[0][1], h21 * f.h[0][0], h21 * f.h[0][1]}, 1.0 + std::norm(h21)};
    }

    // Single-user MISO channel in the first row, zero second row
    inline EquivalentChannel tdma_equivalent(const BlockFadingFrame &f)
    {
        return {{f.h[0][0], f.h[0][1], 0.0, 0.0}, 1.0};
    }

    inline EquivalentChannel equivalent_channel(Scheme s, const BlockFadingFrame &f)
    {
        switch (s)
        {
        case Scheme::MAT:
            return mat_equivalent(f);
        case Scheme::AltMAT:
            return altmat_equivalent(f);
        default:
            return tdma_equivalent(f);
        }
    }

    // Signals over the three coherence times, x[k][t]
    using SlotSignals = std::array<std::array<Vec2, 2>, 3>;
    // Scalars received by user 1, y[k][t]
    using SlotReceptions = std::array<std::array<cplx, 2>, 3>;

    // c is user 1's codeword, cp user 2's. Not defined for TDMA.
    inline SlotSignals transmit(Scheme scheme, const Codeword &c, const Codeword &cp, int T,
                                const BlockFadingFrame &f, double rho)
    {
        SlotSignals x{};
        const double a = std::sqrt(rho);
        for (std::size_t t = 0; t < std::size_t(T); ++t)
        {
            const Vec2 &u = c.col[t], &v = cp.col[t];
            if (scheme == Scheme::MAT)
            {
                x[0][t] = {a * u[0], a * u[1]};
                x[1][t] = {a * v[0], a * v[1]};
                x[2][t] = {a * (dot_row(f.g[0], u) + dot_row(f.h[1], v)), 0.0};
            }
            else if (scheme == Scheme::AltMAT)
            {
                x[0][t] = {a * (u[0] + v[0]), a * (u[1] + v[1])};
                x[1][t] = {a * dot_row(f.h[0], v), 0.0};
                x[2][t] = {a * dot_row(f.g[0], u), 0.0};
            }
            else
                throw std::invalid_argument("transmit: TDMA has no three-slot frame");
        }
        return x;
    }

    inline SlotReceptions receive_user1(const SlotSignals &x, int T, const BlockFadingFrame &f,
                                        const SlotReceptions &noise)
    {
        SlotReceptions y{};
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t t = 0; t < std::size_t(T); ++t)
                y[k][t] = dot_row(f.h[k], x[k][t]) + noise[k][t];
        return y;
    }

    // MAT: [y1; y3 - h31 y2]. Alt MAT: [y3; h21 y1 - y2].
    inline std::array<Vec2, 2> eliminate_interference(Scheme scheme, const SlotReceptions &y, int T,
                                                      const BlockFadingFrame &f)
    {
        std::array<Vec2, 2> out{};
        for (std::size_t t = 0; t < std::size_t(T); ++t)
        {
            if (scheme == Scheme::MAT)
                out[t] = {y[0][t], y[2][t] - f.h[2][0] * y[1][t]};
            else if (scheme == Scheme::AltMAT)
                out[t] = {y[2][t], f.h[1][0] * y[0][t] - y[1][t]};
            else
                throw std::invalid_argument("eliminate_interference: TDMA has no three-slot frame");
        }
        return out;
    }

    // Whitened ML metric sum_t ||Sigma^{-1/2}(y_t - sqrt(rho) H c_t)||^2
    inline double ml_metric(std::span<const Vec2> rx, const EquivalentChannel &eq, const Codeword &c, double rho)
    {
        const double a = std::sqrt(rho);
        const double w = 1.0 / eq.s;
        double m = 0.0;
        for (std::size_t t = 0; t < rx.size(); ++t)
        {
            Vec2 hc = eq.H * c.col[t];
            m += std::norm(rx[t][0] - a * hc[0]) + w * std::norm(rx[t][1] - a * hc[1]);
        }
        return m;
    }

    // Exhaustive search; ties resolve to the lowest index
    inline std::size_t ml_decode(std::span<const Vec2> rx, const EquivalentChannel &eq, const CodeBook &book,
                                 double rho)
    {
        if (rx.size() != std::size_t(book.T))
            throw std::invalid_argument("ml_decode: received block length differs from T");
        const double a = std::sqrt(rho);
        const double w = 1.0 / std::sqrt(eq.s);
        const Mat2 G{a * eq.H.a, a * eq.H.b, a * w * eq.H.c, a * w * eq.H.d};
        std::array<Vec2, 2> r{};
        for (std::size_t t = 0; t < rx.size(); ++t)
            r[t] = {rx[t][0], w * rx[t][1]};

        std::size_t best = 0;
        double best_m = std::numeric_limits<double>::infinity();
        const std::size_t T = rx.size();
        for (std::size_t i = 0; i < book.size(); ++i)
        {
            const auto &c = book.codewords[i];
            double m = 0.0;
            for (std::size_t t = 0; t < T; ++t)
            {
                const Vec2 &x = c.col[t];
                m += std::norm(r[t][0] - G.a * x[0] - G.b * x[1]) + std::norm(r[t][1] - G.c * x[0] - G.d * x[1]);
            }
            if (m < best_m)
                best_m = m, best = i;
        }
        return best;
    }

    struct FrameResult
    {
        std::size_t sent = 0;
        std::size_t decoded = 0;
        int bit_errors = 0;
        int symbol_errors = 0;
    };

    // Draw order per frame: user-1 codeword, user-2 codeword, then 3x2 noise samples (always all six)
    inline FrameResult simulate_frame(Scheme scheme, const CodeBook &book, double rho, const BlockFadingFrame &f,
                                      RandomStream &rng, double noise_scale = 1.0)
    {
        if (!(rho > 0.0))
            throw std::invalid_argument("simulate_frame: rho must be positive");
        FrameResult res;
        res.sent = rng.index(book.size());
        std::size_t other = rng.index(book.size());
        SlotReceptions noise{};
        for (auto &slot : noise)
            for (auto &n : slot)
                n = noise_scale * rng.complex_normal();

        const Codeword &c = book.codewords[res.sent];
        std::array<Vec2, 2> rx{};
        EquivalentChannel eq;
        double rho_dec = rho;
        if (scheme == Scheme::TDMA)
        {
            rho_dec = tdma_power_factor * rho;
            const double a = std::sqrt(rho_dec);
            for (std::size_t t = 0; t < std::size_t(book.T); ++t)
                rx[t] = {a * dot_row(f.h[0], c.col[t]) + noise[0][t], 0.0};
            eq = tdma_equivalent(f);
        }
        else
        {
            auto x = transmit(scheme, c, book.codewords[other], book.T, f, rho);
            auto y = receive_user1(x, book.T, f, noise);
            rx = eliminate_interference(scheme, y, book.T, f);
            eq = equivalent_channel(scheme, f);
        }
        res.decoded = ml_decode(std::span<const Vec2>(rx.data(), std::size_t(book.T)), eq, book, rho_dec);
        res.bit_errors = book.bit_errors(res.sent, res.decoded);
        res.symbol_errors = book.symbol_errors(res.sent, res.decoded);
        return res;
    }

} // namespace dcsit
