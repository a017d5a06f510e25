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

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "numerics.hpp"

namespace dcsit
{
    // Independent random stream. Streams are derived from (master seed, ids...) through std::seed_seq,
    // so worker i of point p always sees the same numbers regardless of scheduling.
    class RandomStream
    {
    public:
        explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

        static RandomStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> ids)
        {
            std::vector<std::uint32_t> words;
            words.reserve(2 * (ids.size() + 1) + 1);
            auto push = [&](std::uint64_t v)
            {
                words.push_back(std::uint32_t(v & 0xffffffffu));
                words.push_back(std::uint32_t(v >> 32));
            };
            push(master);
            words.push_back(std::uint32_t(ids.size()));
            for (auto id : ids)
                push(id);
            std::seed_seq seq(words.begin(), words.end());
            RandomStream s;
            s.engine_.seed(seq);
            return s;
        }

        // Circularly symmetric CN(0, 1): real and imaginary parts N(0, 1/2)
        cplx complex_normal() { return {normal_(engine_), normal_(engine_)}; }

        double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

        // Uniform in [0, n)
        std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

        double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }

        std::mt19937_64 &engine() { return engine_; }

    private:
        std::mt19937_64 engine_;
        std::normal_distribution<double> normal_{0.0, std::sqrt(0.5)};
    };

} // namespace dcsit
