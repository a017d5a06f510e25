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

#include <bit>
#include <sstream>

#include "dcsit/codes.hpp"

using namespace dcsit;
using Catch::Approx;

namespace
{
    bool gray_neighbours(const Constellation &c)
    {
        double d = c.min_distance_sq();
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                if (std::norm(c.points[i] - c.points[j]) < d * (1 + 1e-9) && std::popcount(unsigned(i ^ j)) != 1)
                    return false;
        return true;
    }
} // namespace

TEST_CASE("codes - constellations")
{
    CHECK(make_constellation(Modulation::QAM, 4).min_distance_sq() == Approx(2.0));
    CHECK(make_constellation(Modulation::PSK, 8).min_distance_sq() == Approx(2.0 - std::sqrt(2.0)));
    CHECK(make_constellation(Modulation::QAM, 16).min_distance_sq() == Approx(0.4));
    for (auto name : {"bpsk", "qpsk", "8psk", "16psk", "16qam", "64qam"})
    {
        auto c = constellation_by_name(name);
        INFO(name);
        CHECK(c.name() == name);
        CHECK(c.average_energy() == Approx(1.0).margin(1e-12));
        CHECK(c.min_distance_sq() > 1e-3);
        CHECK(gray_neighbours(c));
        CHECK((1u << c.bits_per_symbol) == c.size());
    }
    CHECK_THROWS_AS(make_constellation(Modulation::QAM, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_constellation(Modulation::PSK, 6), std::invalid_argument);
    CHECK_THROWS_AS(constellation_by_name("9qam"), std::invalid_argument);
}

TEST_CASE("codes - spatial multiplexing")
{
    auto book = sm_codebook(constellation_by_name("qpsk"));
    CHECK(book.size() == 16);
    CHECK(book.T == 1);
    CHECK(book.Q == 2);
    for (std::size_t i = 0; i < book.size(); ++i)
        CHECK(norm_sq(book.codewords[i].col[0]) == Approx(1.0));
    auto spec = error_spectrum(book);
    std::vector<double> l1s;
    std::uint64_t total = 0;
    for (auto &e : spec)
    {
        CHECK(e.l2 == 0.0);
        l1s.push_back(e.l1);
        total += e.count;
    }
    CHECK(total == 16 * 15);
    REQUIRE(l1s.size() == 4);
    for (int k = 0; k < 4; ++k)
        CHECK(l1s[std::size_t(k)] == Approx(k + 1.0));
    CHECK_THROWS_AS(design_metric_mat(spec), std::domain_error);
}

TEST_CASE("codes - Alamouti error matrices are scaled identities")
{
    for (auto name : {"bpsk", "qpsk", "8psk"})
    {
        auto book = alamouti_codebook(constellation_by_name(name));
        double amin = 1e300;
        for (std::size_t i = 0; i < book.size(); ++i)
            for (std::size_t j = 0; j < book.size(); ++j)
            {
                if (i == j)
                    continue;
                Herm2 E = book.error_matrix(i, j);
                double h = 0.5 * E.trace();
                CHECK(std::abs(E.d0() - h) <= 1e-12);
                CHECK(std::abs(E.d1() - h) <= 1e-12);
                CHECK(std::abs(E.off()) <= 1e-12);
                amin = std::min(amin, h);
            }
        if (std::string(name) == "qpsk")
            CHECK(amin == Approx(1.0));
        for (auto &e : error_spectrum(book))
            CHECK(e.l1 == Approx(e.l2));
    }
    auto book = alamouti_codebook(constellation_by_name("qpsk"));
    for (std::size_t p = 0; p < book.basis.size(); ++p)
        for (std::size_t q = 0; q < book.basis.size(); ++q)
            if (p != q)
            {
                double tr = 0.0;
                for (int t = 0; t < 2; ++t)
                    for (int r = 0; r < 2; ++r)
                    {
                        cplx x = book.basis[p].col[std::size_t(t)][std::size_t(r)];
                        cplx y = book.basis[q].col[std::size_t(t)][std::size_t(r)];
                        tr += 2.0 * std::real(x * std::conj(y));
                    }
                CHECK(std::abs(tr) < 1e-14);
            }
}

TEST_CASE("codes - Dayal code is full rank and full rate")
{
    auto book = dayal_codebook(constellation_by_name("qpsk"));
    CHECK(book.size() == 256);
    CHECK(book.T == 2);
    CHECK(book.Q == 4);
    CHECK(book.average_energy() == Approx(2.0).margin(1e-9));
    double min_det = 1e300, min_l2 = 1e300;
    for (std::size_t i = 0; i < book.size(); ++i)
        for (std::size_t j = 0; j < book.size(); ++j)
            if (i != j)
            {
                Herm2 E = book.error_matrix(i, j);
                min_det = std::min(min_det, E.det());
                min_l2 = std::min(min_l2, eig_herm2(E).second);
            }
    CHECK(min_det > 0.0);
    CHECK(min_l2 > 1e-9);
    CHECK(ldc_orthonormality(book));
    CHECK_THROWS_AS(dayal_codebook(constellation_by_name("8psk")), std::invalid_argument);
}

TEST_CASE("codes - energy normalization for every code and constellation")
{
    for (auto name : {"bpsk", "qpsk", "8psk", "16qam"})
    {
        auto c = constellation_by_name(name);
        CHECK(sm_codebook(c).average_energy() == Approx(1.0).margin(1e-9));
        CHECK(alamouti_codebook(c).average_energy() == Approx(2.0).margin(1e-9));
    }
    CHECK(dayal_codebook(constellation_by_name("16qam")).average_energy() == Approx(2.0).margin(1e-9));
}

TEST_CASE("codes - error spectrum edge cases")
{
    auto bpsk = alamouti_codebook(constellation_by_name("bpsk"));
    for (auto &e : error_spectrum(bpsk))
        CHECK(e.l1 == Approx(e.l2));
    CodeBook single = sm_codebook(constellation_by_name("bpsk"));
    single.codewords.resize(1);
    CHECK_THROWS_AS(error_spectrum(single), std::invalid_argument);
}

TEST_CASE("codes - MAT design metric")
{
    CHECK(design_metric_mat({{2.0, 2.0, 1}}) == Approx(0.125));
    CHECK(design_metric_mat({{4.0, 1.0, 1}}) == Approx(std::log(4.0) / 12.0));
    CHECK(design_metric_mat({{4.0, 1.0, 1}}) == Approx(0.11552).epsilon(1e-4));
    CHECK_THROWS_AS(design_metric_mat({}), std::invalid_argument);

    // max log-ratio factor >= 2Q/(T dmin^2), equality for Alamouti
    {
        auto c = constellation_by_name("qpsk");
        for (auto book : {alamouti_codebook(c), dayal_codebook(c)})
        {
            double worst = 0.0;
            for (auto &e : error_spectrum(book))
                worst = std::max(worst, log_ratio(e.l1, e.l2));
            double bound = 2.0 * book.Q / (book.T * c.min_distance_sq());
            CHECK(worst >= bound * (1 - 1e-12));
            if (book.kind == CodeKind::Alamouti)
                CHECK(worst == Approx(bound));
        }
    }
}

TEST_CASE("codes - LDC orthonormality and the minimum trace bound")
{
    auto c = constellation_by_name("qpsk");
    auto sm = sm_codebook(c), al = alamouti_codebook(c), dy = dayal_codebook(c);
    CHECK(ldc_orthonormality(sm));
    CHECK(ldc_orthonormality(al));
    for (auto *b : {&sm, &al, &dy})
    {
        double bound = double(b->T) / b->Q * c.min_distance_sq();
        CHECK(min_trace_distance(*b) <= bound * (1 + 1e-12));
        if (ldc_orthonormality(*b))
            CHECK(min_trace_distance(*b) == Approx(bound));
    }
    auto bad = al;
    bad.basis[0].col[0][0] += 0.1;
    CHECK_FALSE(ldc_orthonormality(bad));
    auto none = al;
    none.basis.clear();
    CHECK_THROWS_AS(ldc_orthonormality(none), std::invalid_argument);
}

TEST_CASE("codes - labels and error counters")
{
    auto book = sm_codebook(constellation_by_name("qpsk"));
    // codeword index is the little-endian mixed radix of the symbol labels
    CHECK(book.symbol(6, 0) == 2);
    CHECK(book.symbol(6, 1) == 1);
    CHECK(book.bit_errors(0, 15) == 4);
    CHECK(book.symbol_errors(0, 15) == 2);
    CHECK(book.bit_errors(0, 1) == 1);
    CHECK(book.symbol_errors(3, 3) == 0);
}

TEST_CASE("codes - codebook CSV")
{
    auto book = sm_codebook(constellation_by_name("bpsk"));
    std::ostringstream os;
    write_codebook_csv(os, book);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    CHECK(header == "index,r0t0_re,r0t0_im,r1t0_re,r1t0_im");
    CHECK(row.rfind("0,", 0) == 0);
    int lines = 1;
    while (std::getline(is, row))
        ++lines;
    CHECK(lines == 4);
}
