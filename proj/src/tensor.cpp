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

#include "posmap/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "posmap/errors.hpp"

namespace posmap {

HermitianOperator::HermitianOperator(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("HermitianOperator requires a square matrix");
    }
    m_ = (m + m.adjoint()) * 0.5;
}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
    return HermitianOperator(ComplexMatrix::Zero(dim, dim));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& o) const {
    return HermitianOperator(m_ + o.m_);
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& o) const {
    return HermitianOperator(m_ - o.m_);
}

HermitianOperator HermitianOperator::operator*(double s) const {
    return HermitianOperator(m_ * s);
}

SubsystemDims::SubsystemDims(std::initializer_list<int> dims) : SubsystemDims(std::vector<int>(dims)) {}

SubsystemDims::SubsystemDims(std::vector<int> dims) : dims_(std::move(dims)) {
    for (int d : dims_) {
        if (d < 1) throw DimensionError("subsystem dimensions must be positive");
    }
}

Eigen::Index SubsystemDims::total() const noexcept {
    Eigen::Index n = 1;
    for (int d : dims_) n *= d;
    return n;
}

void SubsystemDims::requireTotal(Eigen::Index n, const char* what) const {
    if (total() != n) {
        throw DimensionError(std::string(what) + ": subsystem dimensions multiply to " + std::to_string(total()) +
                             " but operator has dimension " + std::to_string(n));
    }
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

std::vector<int> splitIndex(Eigen::Index flat, const SubsystemDims& dims) {
    std::vector<int> digits(dims.count());
    for (std::size_t s = dims.count(); s-- > 0;) {
        digits[s] = static_cast<int>(flat % dims[s]);
        flat /= dims[s];
    }
    return digits;
}

Eigen::Index joinIndex(const std::vector<int>& digits, const SubsystemDims& dims) {
    Eigen::Index flat = 0;
    for (std::size_t s = 0; s < dims.count(); ++s) flat = flat * dims[s] + digits[s];
    return flat;
}

namespace {

std::vector<bool> subsystemMask(const SubsystemDims& dims, const SubsystemSet& set) {
    std::vector<bool> mask(dims.count(), false);
    for (int s : set) {
        if (s < 0 || static_cast<std::size_t>(s) >= dims.count()) {
            throw DimensionError("subsystem index " + std::to_string(s) + " out of range");
        }
        mask[static_cast<std::size_t>(s)] = true;
    }
    return mask;
}

} // namespace

ComplexMatrix partialTrace(const ComplexMatrix& x, const SubsystemDims& dims, const SubsystemSet& tracedOut) {
    if (x.rows() != x.cols()) throw DimensionError("partialTrace requires a square operator");
    dims.requireTotal(x.rows(), "partialTrace");
    const auto traced = subsystemMask(dims, tracedOut);

    std::vector<int> keptDims;
    for (std::size_t s = 0; s < dims.count(); ++s) {
        if (!traced[s]) keptDims.push_back(dims[s]);
    }
    const SubsystemDims kept(keptDims);
    const Eigen::Index n = x.rows();

    // Map every flat index to (kept index, traced index).
    std::vector<Eigen::Index> keptOf(static_cast<std::size_t>(n)), tracedOf(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < n; ++p) {
        const auto digits = splitIndex(p, dims);
        Eigen::Index k = 0, t = 0;
        for (std::size_t s = 0; s < dims.count(); ++s) {
            if (traced[s]) t = t * dims[s] + digits[s];
            else k = k * dims[s] + digits[s];
        }
        keptOf[static_cast<std::size_t>(p)] = k;
        tracedOf[static_cast<std::size_t>(p)] = t;
    }

    ComplexMatrix out = ComplexMatrix::Zero(kept.total(), kept.total());
    for (Eigen::Index q = 0; q < n; ++q) {
        for (Eigen::Index p = 0; p < n; ++p) {
            if (tracedOf[static_cast<std::size_t>(p)] == tracedOf[static_cast<std::size_t>(q)]) {
                out(keptOf[static_cast<std::size_t>(p)], keptOf[static_cast<std::size_t>(q)]) += x(p, q);
            }
        }
    }
    return out;
}

HermitianOperator partialTrace(const HermitianOperator& x, const SubsystemDims& dims, const SubsystemSet& tracedOut) {
    return HermitianOperator(partialTrace(x.matrix(), dims, tracedOut));
}

ComplexMatrix partialTranspose(const ComplexMatrix& x, const SubsystemDims& dims, const SubsystemSet& transposed) {
    if (x.rows() != x.cols()) throw DimensionError("partialTranspose requires a square operator");
    dims.requireTotal(x.rows(), "partialTranspose");
    const auto flip = subsystemMask(dims, transposed);
    const Eigen::Index n = x.rows();

    std::vector<std::vector<int>> digits(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < n; ++p) digits[static_cast<std::size_t>(p)] = splitIndex(p, dims);

    ComplexMatrix out(n, n);
    std::vector<int> r, c;
    for (Eigen::Index q = 0; q < n; ++q) {
        for (Eigen::Index p = 0; p < n; ++p) {
            r = digits[static_cast<std::size_t>(p)];
            c = digits[static_cast<std::size_t>(q)];
            for (std::size_t s = 0; s < dims.count(); ++s) {
                if (flip[s]) std::swap(r[s], c[s]);
            }
            out(joinIndex(r, dims), joinIndex(c, dims)) = x(p, q);
        }
    }
    return out;
}

HermitianOperator partialTranspose(const HermitianOperator& x, const SubsystemDims& dims,
                                   const SubsystemSet& transposed) {
    return HermitianOperator(partialTranspose(x.matrix(), dims, transposed));
}

HermitianEigen eigH(const HermitianOperator& h) { return eigH(h.matrix()); }

HermitianEigen eigH(const ComplexMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw SolverError("Hermitian eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double minEigenvalue(const ComplexMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw SolverError("Hermitian eigensolver did not converge");
    return solver.eigenvalues()(0);
}

GeneralEigen eigGeneral(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("eigGeneral requires a square matrix");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, true);
    if (solver.info() != Eigen::Success) throw SolverError("general eigensolver did not converge");
    GeneralEigen out;
    out.values = solver.eigenvalues();
    out.right = solver.eigenvectors();
    Eigen::PartialPivLU<ComplexMatrix> lu(out.right);
    out.left = lu.inverse().adjoint();
    return out;
}

ComplexMatrix reshuffle(const ComplexMatrix& c, int d, int dOut) {
    const Eigen::Index n = static_cast<Eigen::Index>(d) * dOut;
    if (c.rows() != n || c.cols() != n) throw DimensionError("reshuffle: Choi matrix must have dimension d*dOut");
    ComplexMatrix m(dOut * dOut, d * d);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < dOut; ++a)
            for (int j = 0; j < d; ++j)
                for (int b = 0; b < dOut; ++b) m(a * dOut + b, i * d + j) = c(i * dOut + a, j * dOut + b);
    return m;
}

ComplexMatrix reshuffle(const HermitianOperator& c, int d, int dOut) { return reshuffle(c.matrix(), d, dOut); }

ComplexMatrix unreshuffle(const ComplexMatrix& m, int d, int dOut) {
    if (m.rows() != static_cast<Eigen::Index>(dOut) * dOut || m.cols() != static_cast<Eigen::Index>(d) * d) {
        throw DimensionError("unreshuffle: transfer matrix must be dOut² × d²");
    }
    ComplexMatrix c(d * dOut, d * dOut);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < dOut; ++a)
            for (int j = 0; j < d; ++j)
                for (int b = 0; b < dOut; ++b) c(i * dOut + a, j * dOut + b) = m(a * dOut + b, i * d + j);
    return c;
}

RealMatrix hermToRealEmbed(const HermitianOperator& h) {
    const Eigen::Index n = h.dim();
    RealMatrix out(2 * n, 2 * n);
    const RealMatrix re = h.matrix().real();
    const RealMatrix im = h.matrix().imag();
    out.topLeftCorner(n, n) = re;
    out.topRightCorner(n, n) = -im;
    out.bottomLeftCorner(n, n) = im;
    out.bottomRightCorner(n, n) = re;
    return out;
}

ComplexMatrix permutationOperator(const std::vector<int>& perm, const SubsystemDims& dims) {
    const std::size_t k = perm.size();
    if (dims.count() != k + 1) {
        throw InputError("permutationOperator: permutation must act on every B slot of [dA, dB, ..., dB]");
    }
    std::vector<int> sorted(perm);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < k; ++i) {
        if (sorted[i] != static_cast<int>(i)) throw InputError("permutationOperator: not a permutation");
    }
    for (std::size_t i = 2; i < dims.count(); ++i) {
        if (dims[i] != dims[1]) throw InputError("permutationOperator: B slots must share one dimension");
    }
    const Eigen::Index n = dims.total();
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    std::vector<int> out(dims.count());
    for (Eigen::Index col = 0; col < n; ++col) {
        const auto in = splitIndex(col, dims);
        out[0] = in[0];
        for (std::size_t i = 0; i < k; ++i) out[static_cast<std::size_t>(perm[i]) + 1] = in[i + 1];
        p(joinIndex(out, dims), col) = 1.0;
    }
    return p;
}

ComplexMatrix matrixExp(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("matrixExp requires a square matrix");
    return a.exp();
}

ComplexMatrix matrixExpDerivative(const ComplexMatrix& a, const ComplexMatrix& e) {
    if (a.rows() != a.cols() || e.rows() != a.rows() || e.cols() != a.cols()) {
        throw DimensionError("matrixExpDerivative: shapes must agree");
    }
    const Eigen::Index n = a.rows();
    ComplexMatrix big = ComplexMatrix::Zero(2 * n, 2 * n);
    big.topLeftCorner(n, n) = a;
    big.bottomRightCorner(n, n) = a;
    big.topRightCorner(n, n) = e;
    const ComplexMatrix expBig = big.exp();
    return expBig.topRightCorner(n, n);
}

ComplexVector maxEntVector(int d) {
    if (d < 1) throw DimensionError("maxEntVector: d must be positive");
    ComplexVector psi = ComplexVector::Zero(d * d);
    for (int i = 0; i < d; ++i) psi(i * d + i) = 1.0;
    return psi;
}

double realInner(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

bool allFinite(const ComplexMatrix& m) {
    return m.real().allFinite() && m.imag().allFinite();
}

} // namespace posmap
