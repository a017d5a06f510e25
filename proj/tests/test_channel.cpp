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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "dcsit/channel.hpp"

using namespace dcsit;
using Catch::Approx;

TEST_CASE("channel - correlation spec validation and phase wrapping")
{
    CHECK_THROWS_AS(CorrelationSpec(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationSpec(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationSpec(0.5, std::nan("")), std::invalid_argument);
    CHECK(CorrelationSpec(0.5, -pi / 2).phase() == Approx(1.5 * pi));
    CHECK(CorrelationSpec(0.5, 5 * pi).phase() == Approx(pi));
    CHECK(CorrelationSpec(0.5, 2 * pi).phase() == 0.0);
    auto s = CorrelationSpec(0.5, pi / 3);
    CHECK(std::abs(s.coefficient() - std::polar(0.5, pi / 3)) < 1e-15);
}

TEST_CASE("channel - correlation matrix")
{
    for (double ph : {0.0, 1.0, 4.0})
    {
        Herm2 R = corr_matrix(CorrelationSpec(0.0, ph));
        CHECK(R.d0() == 1.0);
        CHECK(R.d1() == 1.0);
        CHECK(R.off() == cplx(0.0));
    }
    auto [l1, l2] = eig_herm2(corr_matrix(CorrelationSpec(0.5, pi / 3)));
    CHECK(l1 == Approx(1.5));
    CHECK(l2 == Approx(0.5));
    // off-diagonal (0, 1) entry is t*
    CHECK(std::abs(corr_matrix(CorrelationSpec(0.5, 0.7)).off() - std::polar(0.5, -0.7)) < 1e-15);
}

TEST_CASE("channel - opposite phases sum to twice the identity exactly")
{
    for (int k = 0; k < 64; ++k)
    {
        double psi = 2 * pi * k / 64.0 + 0.013 * k;
        CorrelationSpec a(0.99, psi);
        Herm2 sum = corr_matrix(a) + corr_matrix(a.rotated(pi));
        CHECK(sum.d0() == 2.0);
        CHECK(sum.d1() == 2.0);
        CHECK(sum.off() == cplx(0.0));
    }
}

TEST_CASE("channel - square root of the correlation matrix")
{
    for (double m : {0.0, 0.3, 0.9, 0.999})
        for (double ph : {0.0, 1.3, 3.0})
        {
            Herm2 R = corr_matrix(CorrelationSpec(m, ph));
            Mat2 S = sqrt_psd(R).mat();
            Mat2 P = S * S.adjoint();
            CHECK(std::abs(P.a - 1.0) < 1e-12);
            CHECK(std::abs(P.d - 1.0) < 1e-12);
            CHECK(std::abs(P.b - R.off()) < 1e-12);
            CHECK(std::abs(P.c - std::conj(R.off())) < 1e-12);
        }
}

TEST_CASE("channel - sample covariance of i.i.d. and correlated draws")
{
    const int N = 1'000'000;
    for (double t : {0.0, 0.9})
    {
        ChannelSampler draw(CorrelationSpec(t, 0.0), CorrelationSpec());
        RandomStream rng(42);
        double p0 = 0, p1 = 0;
        cplx off = 0, cross = 0;
        for (int k = 0; k < N; ++k)
        {
            auto f = draw(rng);
            p0 += std::norm(f.h[1][0]);
            p1 += std::norm(f.h[1][1]);
            off += std::conj(f.h[1][0]) * f.h[1][1];
            cross += std::conj(f.h[0][0]) * f.g[0][0];
        }
        CHECK(p0 / N == Approx(1.0).margin(5e-3));
        CHECK(p1 / N == Approx(1.0).margin(5e-3));
        CHECK(std::abs(off / double(N) - cplx(t, 0.0)) < 5e-3);
        CHECK(std::abs(cross / double(N)) < 5e-3);
    }
}

TEST_CASE("channel - entry power is unit exponential (Kolmogorov-Smirnov)")
{
    const int N = 100'000;
    RandomStream rng(9);
    auto f0 = draw_frame(CorrelationSpec(0.6, 2.0), CorrelationSpec(0.3, 1.0), rng);
    (void)f0;
    ChannelSampler draw(CorrelationSpec(0.6, 2.0), CorrelationSpec(0.3, 1.0));
    std::vector<double> x;
    x.reserve(N);
    for (int k = 0; k < N; ++k)
        x.push_back(std::norm(draw(rng).g[2][1]));
    std::sort(x.begin(), x.end());
    double D = 0.0;
    for (int i = 0; i < N; ++i)
    {
        double F = 1.0 - std::exp(-x[std::size_t(i)]);
        D = std::max({D, F - double(i) / N, double(i + 1) / N - F});
    }
    // critical value at alpha = 0.01
    CHECK(D < 1.628 / std::sqrt(double(N)));
}

TEST_CASE("channel - replaying a seed replays the frames")
{
    RandomStream a = RandomStream::derive(7, {1, 2}), b = RandomStream::derive(7, {1, 2}), c = RandomStream::derive(7, {2, 1});
    for (int k = 0; k < 10; ++k)
    {
        auto fa = draw_frame(CorrelationSpec(0.5, 1.0), CorrelationSpec(), a);
        auto fb = draw_frame(CorrelationSpec(0.5, 1.0), CorrelationSpec(), b);
        auto fc = draw_frame(CorrelationSpec(0.5, 1.0), CorrelationSpec(), c);
        CHECK(fa.h == fb.h);
        CHECK(fa.g == fb.g);
        CHECK_FALSE(fa.h == fc.h);
    }
}
