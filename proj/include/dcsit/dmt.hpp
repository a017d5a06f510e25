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
#include <compare>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "schemes.hpp"

namespace dcsit
{
    class Rational
    {
    public:
        constexpr Rational() = default;
        constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
        Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d)
        {
            if (d == 0)
                throw std::domain_error("Rational: zero denominator");
            normalize();
        }

        std::int64_t num() const { return num_; }
        std::int64_t den() const { return den_; }
        double to_double() const { return double(num_) / double(den_); }

        std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

        friend Rational operator+(Rational a, Rational b) { return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_}; }
        friend Rational operator-(Rational a, Rational b) { return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_}; }
        friend Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
        friend Rational operator/(Rational a, Rational b) { return {a.num_ * b.den_, a.den_ * b.num_}; }
        friend bool operator==(Rational a, Rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
        friend std::strong_ordering operator<=>(Rational a, Rational b) { return a.num_ * b.den_ <=> b.num_ * a.den_; }

    private:
        void normalize()
        {
            if (den_ < 0)
                num_ = -num_, den_ = -den_;
            std::int64_t g = std::gcd(num_, den_);
            if (g > 1)
                num_ /= g, den_ /= g;
        }

        std::int64_t num_ = 0;
        std::int64_t den_ = 1;
    };

    enum class DmtCode
    {
        Optimal,
        SM,
        OSTBC
    };

    inline std::string to_string(DmtCode c)
    {
        switch (c)
        {
        case DmtCode::Optimal:
            return "optimal";
        case DmtCode::SM:
            return "sm";
        case DmtCode::OSTBC:
            return "ostbc";
        }
        return "?";
    }

    struct DmtPoint
    {
        Rational r, d;
    };

    struct DmtCurve
    {
        std::vector<DmtPoint> breakpoints;

        Rational max_r() const { return breakpoints.back().r; }
    };

    inline DmtCurve dmt_curve(Scheme s, DmtCode code)
    {
        const Rational third(1, 3), two_thirds(2, 3), half(1, 2);
        switch (s)
        {
        case Scheme::MAT:
            if (code == DmtCode::Optimal)
                return {{{0, 3}, {third, 1}, {two_thirds, 0}}};
            if (code == DmtCode::SM)
                return {{{0, 2}, {two_thirds, 0}}};
            return {{{0, 3}, {third, 0}}};
        case Scheme::AltMAT:
            if (code == DmtCode::Optimal || code == DmtCode::SM)
                return {{{0, 2}, {two_thirds, 0}}};
            return {{{0, 2}, {third, 0}}};
        case Scheme::TDMA:
            if (code == DmtCode::SM)
                throw std::invalid_argument("dmt_curve: TDMA is defined with O-STBC only");
            return {{{0, 2}, {half, 0}}};
        }
        throw std::invalid_argument("dmt_curve: unknown scheme");
    }

    // Exact evaluation; beyond the last breakpoint the extended curve is 0 when extend is set
    inline Rational dmt_eval_exact(const DmtCurve &c, Rational r, bool extend = false)
    {
        const auto &bp = c.breakpoints;
        if (r < bp.front().r || (!extend && r > bp.back().r))
            throw std::out_of_range("dmt_eval: r outside the curve domain");
        if (r >= bp.back().r)
            return r == bp.back().r ? bp.back().d : Rational(0);
        for (std::size_t i = 0; i + 1 < bp.size(); ++i)
            if (r <= bp[i + 1].r)
            {
                Rational w = (r - bp[i].r) / (bp[i + 1].r - bp[i].r);
                return bp[i].d + w * (bp[i + 1].d - bp[i].d);
            }
        return bp.back().d;
    }

    inline double dmt_eval(const DmtCurve &c, double r)
    {
        const auto &bp = c.breakpoints;
        double lo = bp.front().r.to_double(), hi = bp.back().r.to_double();
        if (!(r >= lo && r <= hi))
            throw std::out_of_range("dmt_eval: r outside the curve domain");
        for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        {
            double r0 = bp[i].r.to_double(), r1 = bp[i + 1].r.to_double();
            if (r <= r1)
            {
                double d0 = bp[i].d.to_double(), d1 = bp[i + 1].d.to_double();
                return d0 + (r - r0) / (r1 - r0) * (d1 - d0);
            }
        }
        return bp.back().d.to_double();
    }

    enum class Relation
    {
        Equal,
        AGeqB,
        BGeqA,
        Crossing
    };

    struct Dominance
    {
        Relation relation = Relation::Equal;
        std::optional<Rational> crossing; // first sign change of d_A - d_B
    };

    // Compares curves on the union of breakpoints; each curve is extended by d = 0 past its last point
    inline Dominance dominance(const DmtCurve &A, const DmtCurve &B)
    {
        std::vector<Rational> rs;
        for (auto &p : A.breakpoints)
            rs.push_back(p.r);
        for (auto &p : B.breakpoints)
            rs.push_back(p.r);
        std::sort(rs.begin(), rs.end());
        rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

        std::vector<Rational> diff;
        for (auto r : rs)
            diff.push_back(dmt_eval_exact(A, r, true) - dmt_eval_exact(B, r, true));

        bool any_pos = false, any_neg = false;
        for (auto d : diff)
            any_pos |= d > Rational(0), any_neg |= d < Rational(0);

        Dominance out;
        if (!any_pos && !any_neg)
            out.relation = Relation::Equal;
        else if (!any_neg)
            out.relation = Relation::AGeqB;
        else if (!any_pos)
            out.relation = Relation::BGeqA;
        else
        {
            out.relation = Relation::Crossing;
            for (std::size_t i = 0; i + 1 < diff.size(); ++i)
            {
                Rational d0 = diff[i], d1 = diff[i + 1];
                if ((d0 > Rational(0) && d1 < Rational(0)) || (d0 < Rational(0) && d1 > Rational(0)))
                {
                    out.crossing = rs[i] + (rs[i + 1] - rs[i]) * d0 / (d0 - d1);
                    break;
                }
            }
        }
        return out;
    }

    struct NamedDmtCurve
    {
        Scheme scheme;
        DmtCode code;
        DmtCurve curve;
    };

    // All MAT and Alt MAT curves plus the TDMA line
    inline std::vector<NamedDmtCurve> all_dmt_curves()
    {
        std::vector<NamedDmtCurve> out;
        for (Scheme s : {Scheme::MAT, Scheme::AltMAT})
            for (DmtCode c : {DmtCode::Optimal, DmtCode::SM, DmtCode::OSTBC})
                out.push_back({s, c, dmt_curve(s, c)});
        out.push_back({Scheme::TDMA, DmtCode::OSTBC, dmt_curve(Scheme::TDMA, DmtCode::OSTBC)});
        return out;
    }

    inline void write_dmt_csv(std::ostream &os, const std::vector<NamedDmtCurve> &curves)
    {
        os << "scheme,code,r,d,r_rational,d_rational\n";
        char buf[64];
        for (auto &c : curves)
            for (auto &p : c.curve.breakpoints)
            {
                std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", p.r.to_double(), p.d.to_double());
                os << to_string(c.scheme) << ',' << to_string(c.code) << buf << p.r.str() << ',' << p.d.str() << '\n';
            }
    }

} // namespace dcsit
