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

// Short user-pairing run: SM-encoded MAT with QPSK, |t| = 0.99 and a random common phase,
// for user-2 phase offsets 0, pi/2 and pi. All scenarios share their random numbers.

#include <dcsit/montecarlo.hpp>

#include <cstdlib>
#include <iostream>

using namespace dcsit;

int main(int argc, char **argv)
{
    std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    auto book = sm_codebook(constellation_by_name("qpsk"));
    CorrelationSpec t(0.99, 0.0);
    std::vector<PairingScenario> sc = {{"phi=0", t, t, PhaseMode::Joint},
                                       {"phi=pi/2", t, t.rotated(pi / 2), PhaseMode::Joint},
                                       {"phi=pi", t, t.rotated(pi), PhaseMode::Joint}};
    StopRule rule;
    rule.target_errors = 200;
    rule.max_trials = 500'000;
    std::vector<double> grid{0, 5, 10, 15, 20};

    std::vector<CurveRow> rows;
    for (auto &c : pairing_study(sc, Scheme::MAT, book, grid, rule, seed))
        for (auto &p : c.points)
            rows.push_back({"mat", "sm-qpsk", c.name, p});
    write_error_csv(std::cout, rows);
    return 0;
}
