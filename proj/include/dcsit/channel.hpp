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
#include <stdexcept>

#include "numerics.hpp"
#include "rng.hpp"

namespace dcsit
{
    // Transmit correlation coefficient t = |t| e^{j phase}
    class CorrelationSpec
    {
    public:
        CorrelationSpec() = default;
        CorrelationSpec(double magnitude, double phase) : magnitude_(magnitude), phase_(wrap(phase))
        {
            if (!std::isfinite(magnitude) || !std::isfinite(phase))
                throw std::invalid_argument("CorrelationSpec: non-finite argument");
            if (magnitude < 0.0 || magnitude >= 1.0)
                throw std::invalid_argument("CorrelationSpec: magnitude must lie in [0, 1)");
            coef_ = std::polar(magnitude_, phase_);
        }

        static CorrelationSpec iid() { return {}; }

        double magnitude() const { return magnitude_; }
        double phase() const { return phase_; }
        cplx coefficient() const { return coef_; }

        // Phase offset; an offset of exactly pi negates the coefficient bit-exactly
        CorrelationSpec rotated(double dphi) const
        {
            CorrelationSpec out(magnitude_, phase_ + dphi);
            if (dphi == pi)
                out.coef_ = -coef_;
            return out;
        }

    private:
        static double wrap(double p)
        {
            double w = std::fmod(p, 2.0 * pi);
            if (w < 0.0)
                w += 2.0 * pi;
            if (w >= 2.0 * pi)
                w = 0.0;
            return w;
        }

        double magnitude_ = 0.0;
        double phase_ = 0.0;
        cplx coef_{};
    };

    // R_t = [[1, t*], [t, 1]], so that E{h^H h} = R_t for a row vector h
    inline Herm2 corr_matrix(const CorrelationSpec &spec)
    {
        return {1.0, 1.0, std::conj(spec.coefficient())};
    }

    // h1..h3 reach user 1, g1..g3 reach user 2, index = coherence time
    struct BlockFadingFrame
    {
        std::array<Vec2, 3> h{};
        std::array<Vec2, 3> g{};
    };

    // Draws frames with rows h_w R^{1/2}. Draw order: h1, h2, h3, g1, g2, g3, each row entry 0 then 1.
    class ChannelSampler
    {
    public:
        ChannelSampler(const CorrelationSpec &spec1, const CorrelationSpec &spec2)
            : s1_(sqrt_psd(corr_matrix(spec1)).mat()), s2_(sqrt_psd(corr_matrix(spec2)).mat())
        {
        }

        BlockFadingFrame operator()(RandomStream &rng) const
        {
            BlockFadingFrame f;
            for (auto &row : f.h)
                row = row_times({rng.complex_normal(), rng.complex_normal()}, s1_);
            for (auto &row : f.g)
                row = row_times({rng.complex_normal(), rng.complex_normal()}, s2_);
            return f;
        }

    private:
        Mat2 s1_, s2_;
    };

    inline BlockFadingFrame draw_frame(const CorrelationSpec &spec1, const CorrelationSpec &spec2, RandomStream &rng)
    {
        return ChannelSampler(spec1, spec2)(rng);
    }

} // namespace dcsit
