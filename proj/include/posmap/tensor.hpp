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

// tensor.hpp: dense complex linear algebra and multipartite index operations.
//
// Basis convention: every bipartite operator is indexed in the computational
// product basis with the first subsystem as the most significant digit, so
// entry ((i,a),(j,b)) of an operator on C^d ⊗ C^d' lives at row i*d'+a,
// column j*d'+b.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace posmap {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Square complex matrix with exact Hermitian symmetry.
///
/// The constructor replaces its argument by (M + M†)/2, which is exactly
/// Hermitian in floating point (entrywise addition commutes), so the
/// invariant holds bit-for-bit after construction.
class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(const ComplexMatrix& m);

    static HermitianOperator identity(Eigen::Index dim);
    static HermitianOperator zero(Eigen::Index dim);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

    double trace() const { return m_.trace().real(); }

    HermitianOperator operator+(const HermitianOperator& o) const;
    HermitianOperator operator-(const HermitianOperator& o) const;
    HermitianOperator operator*(double s) const;

private:
    ComplexMatrix m_;
};

/// Ordered local dimensions of a multipartite space.
class SubsystemDims {
public:
    SubsystemDims() = default;
    SubsystemDims(std::initializer_list<int> dims);
    explicit SubsystemDims(std::vector<int> dims);

    const std::vector<int>& dims() const noexcept { return dims_; }
    std::size_t count() const noexcept { return dims_.size(); }
    int operator[](std::size_t i) const { return dims_.at(i); }
    Eigen::Index total() const noexcept;

    /// Throws DimensionError unless total() == n.
    void requireTotal(Eigen::Index n, const char* what) const;

private:
    std::vector<int> dims_;
};

/// Subsystem indices are zero-based positions into SubsystemDims.
using SubsystemSet = std::vector<int>;

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Entry-index permutation helpers for multipartite operators.
std::vector<int> splitIndex(Eigen::Index flat, const SubsystemDims& dims);
Eigen::Index joinIndex(const std::vector<int>& digits, const SubsystemDims& dims);

ComplexMatrix partialTrace(const ComplexMatrix& x, const SubsystemDims& dims, const SubsystemSet& tracedOut);
HermitianOperator partialTrace(const HermitianOperator& x, const SubsystemDims& dims, const SubsystemSet& tracedOut);

ComplexMatrix partialTranspose(const ComplexMatrix& x, const SubsystemDims& dims, const SubsystemSet& transposed);
HermitianOperator partialTranspose(const HermitianOperator& x, const SubsystemDims& dims,
                                   const SubsystemSet& transposed);

struct HermitianEigen {
    RealVector values;     // ascending
    ComplexMatrix vectors; // columns, orthonormal
};

HermitianEigen eigH(const HermitianOperator& h);
HermitianEigen eigH(const ComplexMatrix& h);
double minEigenvalue(const ComplexMatrix& h);

/// Eigen-decomposition of a general square matrix. The left vectors are
/// the columns of (V^{-1})†, so u_i† M = λ_i u_i† and u_i† v_i = 1 with
/// no eigenvalue matching step.
struct GeneralEigen {
    ComplexVector values;
    ComplexMatrix right;
    ComplexMatrix left;
};

GeneralEigen eigGeneral(const ComplexMatrix& m);

/// Transfer matrix of the map with Choi matrix c:
/// M((a,b),(i,j)) = C((i,a),(j,b)); shape dOut² × d².
ComplexMatrix reshuffle(const ComplexMatrix& c, int d, int dOut);
ComplexMatrix reshuffle(const HermitianOperator& c, int d, int dOut);
/// Inverse index map of reshuffle.
ComplexMatrix unreshuffle(const ComplexMatrix& m, int d, int dOut);

/// [[Re H, −Im H], [Im H, Re H]].
RealMatrix hermToRealEmbed(const HermitianOperator& h);

/// Permutes the trailing (B) slots of dims = [dA, dB, ..., dB].
/// perm[i] is the output slot receiving input slot i.
ComplexMatrix permutationOperator(const std::vector<int>& perm, const SubsystemDims& dims);

ComplexMatrix matrixExp(const ComplexMatrix& a);
/// Fréchet derivative of exp at a in direction e, from the upper-right
/// block of exp([[a, e], [0, a]]).
ComplexMatrix matrixExpDerivative(const ComplexMatrix& a, const ComplexMatrix& e);

/// Σ_i |i⟩⊗|i⟩, unnormalized.
ComplexVector maxEntVector(int d);

/// Real Frobenius inner product Re Tr(a† b).
double realInner(const ComplexMatrix& a, const ComplexMatrix& b);

bool allFinite(const ComplexMatrix& m);

} // namespace posmap
