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

// choi.hpp: Choi-matrix representation of linear maps.
//
// A map Φ: B(C^d) → B(C^d') is stored through C = Σ_ij E_ij ⊗ Φ(E_ij),
// built from the unnormalized maximally entangled vector, so the identity
// map has Choi matrix |ψ⟩⟨ψ| with trace d. Entry C((i,a),(j,b)) equals
// ⟨a|Φ(|i⟩⟨j|)|b⟩ and the map acts as Φ(ρ)_ab = Σ_ij ρ_ij C((i,a),(j,b)).

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "posmap/tensor.hpp"

namespace posmap {

struct ChoiFlags {
    bool tp = false;
    bool real = false;
};

class ChoiMatrix {
public:
    ChoiMatrix() = default;
    /// Throws DimensionError on a size mismatch and InputError when a flag
    /// is set but its property does not hold (TP residual above 1e-10,
    /// nonzero imaginary part).
    ChoiMatrix(int dIn, int dOut, HermitianOperator m, ChoiFlags flags = {});

    int dIn() const noexcept { return dIn_; }
    int dOut() const noexcept { return dOut_; }
    const HermitianOperator& op() const noexcept { return m_; }
    const ComplexMatrix& matrix() const noexcept { return m_.matrix(); }
    ChoiFlags flags() const noexcept { return flags_; }
    SubsystemDims dims() const { return {dIn_, dOut_}; }

    /// ‖Tr_out(C) − I‖_F.
    double tpResidual() const;
    double maxAbsImag() const;

    static ChoiMatrix identityMap(int d);
    static ChoiMatrix transposition(int d);

private:
    int dIn_ = 0;
    int dOut_ = 0;
    HermitianOperator m_;
    ChoiFlags flags_;
};

/// Entrywise pattern over the Choi matrix: true = entry is free, false =
/// entry is structurally zero. Must be symmetric under (p,q) ↔ (q,p).
class ChoiMask {
public:
    ChoiMask() = default;
    ChoiMask(int dIn, int dOut, std::vector<std::uint8_t> keep);

    static ChoiMask full(int dIn, int dOut);

    int dIn() const noexcept { return dIn_; }
    int dOut() const noexcept { return dOut_; }
    int size() const noexcept { return dIn_ * dOut_; }
    bool keeps(int row, int col) const { return keep_[static_cast<std::size_t>(row * size() + col)] != 0; }
    std::size_t keptCount() const;

    /// Offending (row, col) pairs with keeps(r,c) != keeps(c,r).
    std::vector<std::pair<int, int>> asymmetricPairs() const;
    /// Throws InputError listing the asymmetric pairs.
    void validate() const;

private:
    int dIn_ = 0;
    int dOut_ = 0;
    std::vector<std::uint8_t> keep_;
};

/// Named masks: "family9" (the 3⊗3 pattern of familyChoi), "full",
/// and "random" (symmetric off-diagonal pattern kept with probability
/// `density`; the diagonal is always kept).
ChoiMask builtinMask(const std::string& name, int dIn = 3, int dOut = 3, double density = 0.3,
                     std::uint64_t seed = 0);

/// Trainable parametrization of a Choi matrix.
///
/// X is a real (dd')×(dd') array indexed by p = i·d'+j, q = k·d'+ℓ with
/// Re C_pq = (X_pq + X_qp)/2 and Im C_pq = (X_pq − X_qp)/2. The TP flag
/// makes the slot j = d' of every block diagonal dependent; the real flag
/// drops the antisymmetric part so C is real symmetric.
struct ChoiParams {
    int dIn = 0;
    int dOut = 0;
    RealMatrix X;
    std::optional<ChoiMask> mask;
    ChoiFlags flags;

    int size() const noexcept { return dIn * dOut; }
    bool isDependentSlot(int p, int q) const;
    /// Throws on shape mismatch, asymmetric mask, or a mask that removes a
    /// TP-dependent slot.
    void validate() const;
    /// Zero masked slots, refresh TP-dependent slots and symmetrize X in
    /// real mode so the stored tensor is always the one buildChoi reads.
    void normalize();

    /// I.i.d. Gaussian entries, then flags applied.
    static ChoiParams random(int dIn, int dOut, ChoiFlags flags, std::optional<ChoiMask> mask, std::mt19937_64& rng,
                             double stddev = 1.0);
};

ChoiMatrix buildChoi(const ChoiParams& params);

/// Chain rule through buildChoi. `grad` is the Hermitian matrix G with
/// dL = Re Tr(G dC); the result is ∂L/∂X with masked and dependent slots
/// zero and dependent contributions folded into the free diagonal slots.
RealMatrix choiParamGradient(const ChoiParams& params, const ComplexMatrix& grad);

HermitianOperator applyMap(const ChoiMatrix& c, const HermitianOperator& rho);
ComplexMatrix applyMap(const ChoiMatrix& c, const ComplexMatrix& x);

struct KrausSet {
    std::vector<ComplexMatrix> ops; // each dOut × dIn
    int dIn() const;
    int dOut() const;
    /// ‖Σ E†E − I‖_F.
    double completenessResidual() const;
    ComplexMatrix apply(const ComplexMatrix& rho) const;
};

ChoiMatrix choiFromKraus(const KrausSet& k);

struct FamilyParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    Complex w;
    Complex z;
};

/// 9×9 masked family on C^3 ⊗ C^3: diagonal (a,b,c,c,a,b,b,c,a), w at
/// (1,3), z at (0,8) and their Hermitian partners.
ChoiMatrix familyChoi(const FamilyParams& p);
/// Direct evaluation of the family's action, for cross-checks.
ComplexMatrix familyAction(const FamilyParams& p, const ComplexMatrix& rho);

/// Choi matrix of T1∘T2 (T2 applied first): needs dOut(c2) == dIn(c1).
ChoiMatrix composeChoi(const ChoiMatrix& c1, const ChoiMatrix& c2);
/// Gradients of L with respect to c1 and c2 given dL = Re Tr(G dC12).
std::pair<ComplexMatrix, ComplexMatrix> composeChoiAdjoint(const ComplexMatrix& g, const ChoiMatrix& c1,
                                                           const ChoiMatrix& c2);

/// Choi matrix of Γ∘T: partial transpose on the input factor.
ChoiMatrix precomposeTransposition(const ChoiMatrix& c);

struct ProbeResult {
    double minValue = 0.0;
    ComplexVector v; // input factor
    ComplexVector w; // output factor
};

/// Heuristic minimum of ⟨v⊗w|C|v⊗w⟩ over unit product vectors:
/// random starts refined by alternating minimal-eigenvector updates.
/// The result is an upper bound on the true minimum.
ProbeResult blockPositivityProbe(const ChoiMatrix& c, int nSamples, int seesawIters, std::uint64_t seed = 1);

} // namespace posmap
