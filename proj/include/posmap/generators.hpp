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

// generators.hpp: decomposable maps from trainable dilations, PPT maps
// from a factorized Choi matrix, and the PPT-square harness.

#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "posmap/choi.hpp"
#include "posmap/optimizer.hpp"

namespace posmap {

struct DilationParams {
    ComplexMatrix A; // on system ⊗ ancilla
    int ancillaDim = 0;

    static DilationParams zero(int systemDim, int ancillaDim);
    static DilationParams random(int systemDim, int ancillaDim, std::mt19937_64& rng, double scale = 1.0);
};

/// K_j = (I ⊗ ⟨j|) exp(A − A†) (I ⊗ |0⟩), j = 0..ancillaDim−1.
KrausSet krausFromDilation(const DilationParams& d, int systemDim);
/// Unitary exp(A − A†).
ComplexMatrix dilationUnitary(const DilationParams& d);

/// Adjoint of A ↦ Choi(krausFromDilation(A)): returns ∂L/∂A (as a complex
/// matrix with dL = Re Tr(Ḡ† dA)) given dL = Re Tr(G dC).
ComplexMatrix dilationGradient(const DilationParams& d, int systemDim, const ComplexMatrix& g);

struct DecomposableSpec {
    double pLogit = 0.0; // p = 1 / (1 + exp(−pLogit))
    DilationParams dilation1;
    DilationParams dilation2;

    double p() const;
    static DecomposableSpec withWeight(double p, DilationParams d1, DilationParams d2);
};

/// C = p·C_Γ₁ + (1−p)·C_{Γ₂∘T}.
ChoiMatrix decomposableChoi(const DecomposableSpec& spec, int systemDim);

struct DecomposableRun {
    DecomposableSpec spec;
    RunRecord record;
};

struct DecomposableGenConfig {
    int systemDim = 3;
    int ancillaDim = 0; // 0 means systemDim
    double initScale = 1.0;
    /// Starting mixing weight; drawn through a N(0,1) logit when unset.
    std::optional<double> initialP;
};

/// Minimizes max(0, λ_min(C)) over both dilations and the mixing weight.
/// Success (loss 0) means the decomposable output is not CP.
DecomposableRun trainNonCPDecomposable(const DecomposableGenConfig& gen, const TrainConfig& train);

struct PptMapSpec {
    ComplexMatrix A; // (dIn·dOut) × r
    int dIn = 0;
    int dOut = 0;

    static PptMapSpec random(int dIn, int dOut, std::mt19937_64& rng, double scale = 1.0);
};

/// C = AA†.
ChoiMatrix pptChoi(const PptMapSpec& spec);
/// Σ max(0, −λ_i(C^{T_B})).
double pptPenalty(const PptMapSpec& spec);
/// ∂penalty/∂A.
ComplexMatrix pptPenaltyGradient(const PptMapSpec& spec);

struct PptSquareConfig {
    int dimOuter = 2; // T₁: outer → inner, T₂: inner → outer
    int dimInner = 4;
    double pptWeight = 10.0;
    double initScale = 1.0;
    double penaltyTol = 1e-7;
    int repairEpochs = 500;
};

struct PptSquareResult {
    RunRecord record;         // zeta1 column: composition, zetak column: T₁
    double compositionZeta1 = 0.0;
    double positivityPenalty = 0.0; // max(0, −ζ_k(C_{T₁}))
    double pptPenaltyValue = 0.0;
    bool penaltiesMet = false;
    bool violation = false;   // ζ₁ < −certTol with penalties met: needs manual review
    ChoiMatrix t1;
    ChoiMatrix t2;
};

/// Joint training of a positive T₁ and a PPT T₂ pushing ζ₁(T₁∘T₂) below
/// −ε. After maxEpochs the ε-hinge is dropped and up to repairEpochs
/// further steps restore the penalties.
PptSquareResult pptSquareRun(const PptSquareConfig& cfg, const TrainConfig& train, const LossConfig& loss);

} // namespace posmap
