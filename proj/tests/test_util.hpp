// Copyright 2026 The posmap Authors
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

// Shared helpers for the unit tests.

#pragma once

#include <random>

#include "posmap/choi.hpp"
#include "posmap/tensor.hpp"

namespace posmap::testing {

inline ComplexMatrix randomComplex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

inline HermitianOperator randomHermitian(Eigen::Index n, std::mt19937_64& rng) {
    return HermitianOperator(randomComplex(n, n, rng));
}

/// Unit-trace density matrix.
inline HermitianOperator randomState(Eigen::Index n, std::mt19937_64& rng) {
    ComplexMatrix a = randomComplex(n, n, rng);
    ComplexMatrix r = a * a.adjoint();
    return HermitianOperator(r / r.trace().real());
}

inline ComplexVector randomUnit(Eigen::Index n, std::mt19937_64& rng) {
    ComplexVector v = randomComplex(n, 1, rng).col(0);
    return v / v.norm();
}

/// Choi matrix of the map X ↦ diag(x11+x22, x22+x33, x33+x11) − X + diag(X)
/// on 3×3 matrices, i.e. 2·diag(X) shifted cyclically minus X off the
/// diagonal. Positive and not decomposable.
inline ChoiMatrix choiOriginalMap() {
    ComplexMatrix c = ComplexMatrix::Zero(9, 9);
    auto at = [](int i, int a) { return i * 3 + a; };
    for (int i = 0; i < 3; ++i) {
        // Φ(E_ii) = E_ii + E_{i-1,i-1}
        c(at(i, i), at(i, i)) += 1.0;
        int prev = (i + 2) % 3;
        c(at(i, prev), at(i, prev)) += 1.0;
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) c(at(i, i), at(j, j)) -= 1.0;
    return ChoiMatrix(3, 3, HermitianOperator(c));
}

} // namespace posmap::testing
