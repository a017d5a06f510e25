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

// Prints the averaged Chernoff bounds of the QPSK SM worst pair for MAT, Alt MAT and TDMA
// under i.i.d. fading, with the matching high-SNR approximations (meaningful from about 10 dB).

#include <dcsit/codes.hpp>
#include <dcsit/pep.hpp>

#include <cstdio>

using namespace dcsit;

int main()
{
    auto book = sm_codebook(constellation_by_name("qpsk"));
    const Herm2 I = Herm2::identity();

    // pair with the smallest trace distance from codeword 0
    std::size_t j = 1;
    for (std::size_t k = 2; k < book.size(); ++k)
        if (book.error_matrix(0, k).trace() < book.error_matrix(0, j).trace())
            j = k;
    Herm2 E = book.error_matrix(0, j);
    auto [l1, l2] = eig_herm2(E);
    std::printf("pair (0, %zu): lambda = %.4f, %.4f\n\n", j, l1, l2);
    std::printf("%6s %12s %12s %12s %12s %12s\n", "rho_dB", "MAT", "MAT hi-SNR", "AltMAT", "AltMAT hi", "TDMA");
    for (double db = 10.0; db <= 50.0; db += 5.0)
    {
        double rho = db_to_linear(db);
        std::printf("%6.1f %12.4e %12.4e %12.4e %12.4e %12.4e\n", db, pep_mat_correlated(E, I, I, rho).value,
                    highsnr_pep_iid(Scheme::MAT, CodeClass::SM, l1, l2, rho).value,
                    pep_altmat_correlated(E, I, I, rho).value,
                    highsnr_pep_iid(Scheme::AltMAT, CodeClass::SM, l1, l2, rho).value, pep_tdma(E, I, rho).value);
    }
    return 0;
}
