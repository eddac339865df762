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

// conic.hpp: linear-matrix-inequality problems and a primal-dual
// interior-point solver for them.
//
// Problems are stated in the form
//
//     minimize    cᵀy + c0
//     subject to  a_kᵀy = β_k                        (equalities)
//                 F_b0 + Σ_i y_i F_bi  ⪰ 0   for every cone block b
//
// with Hermitian (complex) blocks. Nonnegative-orthant blocks are diagonal
// PSD blocks. The solver runs the HKM search direction with Mehrotra
// predictor-corrector steps on the primal-dual pair; coefficient matrices
// are kept as sparse entry lists since every problem built in this
// project has O(1) nonzeros per variable and block.

#pragma once

#include <string>
#include <vector>

#include "posmap/tensor.hpp"

namespace posmap::conic {

struct MatrixEntry {
    int row = 0;
    int col = 0;
    Complex value;
};

/// All nonzero entries of a Hermitian matrix (both triangles).
using SparseHermitian = std::vector<MatrixEntry>;

enum class ConeKind { Psd, NonNegative };

struct ConeBlock {
    ConeKind kind = ConeKind::Psd;
    int size = 0;
    std::string label;
    ComplexMatrix constant;                    // size × size, Hermitian
    std::vector<SparseHermitian> coefficients; // one per variable
};

struct LinearEquality {
    RealVector coefficients;
    double rhs = 0.0;
};

struct ConicProblem {
    int numVariables = 0;
    RealVector objective;
    double objectiveConstant = 0.0;
    std::vector<LinearEquality> equalities;
    std::vector<ConeBlock> cones;

    /// Throws DimensionError / InputError on inconsistent slices.
    void validate() const;
    ComplexMatrix evaluateBlock(std::size_t block, const RealVector& y) const;
    double evaluateObjective(const RealVector& y) const;
};

enum class SolveStatus { Optimal, Inaccurate, Infeasible, Failed };

const char* toString(SolveStatus s);

struct SolverSettings {
    double feasibilityTol = 1e-8;
    double gapTol = 1e-8;
    int maxIterations = 200;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Failed;
    RealVector y;
    double value = 0.0;      // cᵀy + c0 at the returned point
    double lowerBound = 0.0; // dual bound
    int iterations = 0;
    double primalResidual = 0.0;
    double dualResidual = 0.0;
    double relativeGap = 0.0;
};

SolveResult solve(const ConicProblem& problem, const SolverSettings& settings = {});

} // namespace posmap::conic
