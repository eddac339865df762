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

// certificates.hpp: semidefinite certificates for decomposability and
// positivity of a map given by its Choi matrix.
//
//   ζ₁(C) = min Tr(σC) over PPT states σ on C^d ⊗ C^d'.
//   ζ_k(C) = min Tr(ρ̃C) over reductions ρ̃ = Tr_{B2..Bk} σ of states σ on
//            A⊗B1⊗…⊗Bk that are invariant under permutations of the B
//            copies and stay PSD under partial transposition of B1..Bl for
//            every l = 1..k.
//
// ζ₁ < 0 certifies non-decomposability; ζ_k ≥ 0 certifies positivity.
// Both minimize a linear function of C, so the optimal state returned as
// the witness is a supergradient of the (concave) value function.

#pragma once

#include <string>
#include <vector>

#include "posmap/choi.hpp"
#include "posmap/conic.hpp"

namespace posmap {

enum class ExtendSide { First, Second, Auto };

const char* toString(ExtendSide s);
ExtendSide extendSideFromString(const std::string& s);

struct SolverOptions {
    double feasibilityTol = 1e-8;
    double dualityGapTol = 1e-8;
    int maxIterations = 200;
    ExtendSide extendSide = ExtendSide::Second;
    /// Threshold used by the certify* decisions.
    double certTol = 1e-7;
    /// Largest complex dimension of the extension space.
    int maxExtensionDim = 64;
    /// Restrict to real states when C is real; the optimum is unchanged
    /// because Re σ is feasible whenever σ is.
    bool realStatesForRealChoi = true;
};

enum class CertStatus { Optimal, Inaccurate, Infeasible, Failed };

const char* toString(CertStatus s);

struct Certificate {
    double value = 0.0;         // NaN when status is Failed
    HermitianOperator witness;  // reduced optimal state on C^d ⊗ C^d'
    CertStatus status = CertStatus::Failed;
    int k = 1;
    double solveSeconds = 0.0;
    int iterations = 0;

    bool usable() const { return status == CertStatus::Optimal || status == CertStatus::Inaccurate; }
};

/// Conic form of the extension SDP together with the bookkeeping needed to
/// turn a solution vector back into a state.
struct ExtensionProblem {
    conic::ConicProblem problem;
    int k = 1;
    int dimA = 0;              // unextended factor
    int dimB = 0;              // extended factor
    bool swapped = false;      // true when the input factor was extended
    int variableDim = 0;       // complex dimension of the extension space
    int embeddedDim = 0;       // 2 * variableDim (real PSD cone size)
    int symmetryGenerators = 0; // adjacent transpositions of B slots
    int pptCones = 0;
    bool realStates = false;
    std::vector<conic::SparseHermitian> basis; // σ = I/n + Σ y_i basis_i

    ComplexMatrix extensionState(const RealVector& y) const;
    /// Tr_{B2..Bk} σ reordered to C^dIn ⊗ C^dOut.
    ComplexMatrix reducedState(const RealVector& y) const;
};

ExtensionProblem buildExtensionProblem(const ChoiMatrix& c, int k, const SolverOptions& opts = {});

Certificate zeta1(const ChoiMatrix& c, const SolverOptions& opts = {});
Certificate zetaK(const ChoiMatrix& c, int k, const SolverOptions& opts = {});

struct Verdict {
    bool holds = false;
    double margin = 0.0;
    Certificate certificate;
};

/// holds iff ζ₁ < −certTol; margin = −ζ₁. Throws SolverError on failure.
Verdict certifyNonDecomposable(const ChoiMatrix& c, const SolverOptions& opts = {});
/// holds iff ζ_k ≥ −certTol; margin = ζ_k. Sufficient, not necessary, for
/// positivity. Throws SolverError on failure.
Verdict certifyPositiveOnRelaxation(const ChoiMatrix& c, int k, const SolverOptions& opts = {});

} // namespace posmap
