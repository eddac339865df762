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

#include "posmap/choi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "posmap/errors.hpp"

namespace posmap {

// ---------------------------------------------------------------- ChoiMatrix

ChoiMatrix::ChoiMatrix(int dIn, int dOut, HermitianOperator m, ChoiFlags flags)
    : dIn_(dIn), dOut_(dOut), m_(std::move(m)), flags_(flags) {
    if (dIn < 1 || dOut < 1) throw DimensionError("ChoiMatrix: dimensions must be positive");
    if (m_.dim() != static_cast<Eigen::Index>(dIn) * dOut) {
        throw DimensionError("ChoiMatrix: operator dimension must equal dIn*dOut");
    }
    if (!allFinite(m_.matrix())) throw InputError("ChoiMatrix: non-finite entries");
    if (flags_.tp && tpResidual() > 1e-10) throw InputError("ChoiMatrix: flagged TP but Tr_out(C) != I");
    if (flags_.real && maxAbsImag() != 0.0) throw InputError("ChoiMatrix: flagged real but has imaginary entries");
}

double ChoiMatrix::tpResidual() const {
    const ComplexMatrix reduced = partialTrace(m_.matrix(), dims(), {1});
    return (reduced - ComplexMatrix::Identity(dIn_, dIn_)).norm();
}

double ChoiMatrix::maxAbsImag() const { return m_.matrix().imag().cwiseAbs().maxCoeff(); }

ChoiMatrix ChoiMatrix::identityMap(int d) {
    const ComplexVector psi = maxEntVector(d);
    return ChoiMatrix(d, d, HermitianOperator(psi * psi.adjoint()), {true, true});
}

ChoiMatrix ChoiMatrix::transposition(int d) {
    ComplexMatrix swap = ComplexMatrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
    return ChoiMatrix(d, d, HermitianOperator(swap), {true, true});
}

// ------------------------------------------------------------------ ChoiMask

ChoiMask::ChoiMask(int dIn, int dOut, std::vector<std::uint8_t> keep) : dIn_(dIn), dOut_(dOut), keep_(std::move(keep)) {
    if (dIn < 1 || dOut < 1) throw DimensionError("ChoiMask: dimensions must be positive");
    if (keep_.size() != static_cast<std::size_t>(size()) * static_cast<std::size_t>(size())) {
        throw DimensionError("ChoiMask: pattern must have (dIn*dOut)^2 entries");
    }
}

ChoiMask ChoiMask::full(int dIn, int dOut) {
    const auto n = static_cast<std::size_t>(dIn * dOut);
    return ChoiMask(dIn, dOut, std::vector<std::uint8_t>(n * n, 1));
}

std::size_t ChoiMask::keptCount() const {
    return static_cast<std::size_t>(std::count_if(keep_.begin(), keep_.end(), [](std::uint8_t k) { return k != 0; }));
}

std::vector<std::pair<int, int>> ChoiMask::asymmetricPairs() const {
    std::vector<std::pair<int, int>> bad;
    for (int r = 0; r < size(); ++r)
        for (int c = r + 1; c < size(); ++c)
            if (keeps(r, c) != keeps(c, r)) bad.emplace_back(r, c);
    return bad;
}

void ChoiMask::validate() const {
    const auto bad = asymmetricPairs();
    if (bad.empty()) return;
    std::ostringstream os;
    os << "mask is not symmetric under Hermitian index exchange; offending pairs:";
    for (const auto& [r, c] : bad) os << " (" << r << "," << c << ")";
    throw InputError(os.str());
}

ChoiMask builtinMask(const std::string& name, int dIn, int dOut, double density, std::uint64_t seed) {
    if (name == "full") return ChoiMask::full(dIn, dOut);
    if (name == "family9") {
        std::vector<std::uint8_t> keep(81, 0);
        auto set = [&](int r, int c) {
            keep[static_cast<std::size_t>(r * 9 + c)] = 1;
            keep[static_cast<std::size_t>(c * 9 + r)] = 1;
        };
        for (int i = 0; i < 9; ++i) set(i, i);
        set(1, 3);
        set(0, 8);
        return ChoiMask(3, 3, std::move(keep));
    }
    if (name == "random") {
        if (!(density >= 0.0 && density <= 1.0)) throw InputError("random mask density must lie in [0,1]");
        const int n = dIn * dOut;
        std::vector<std::uint8_t> keep(static_cast<std::size_t>(n * n), 0);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int r = 0; r < n; ++r) {
            keep[static_cast<std::size_t>(r * n + r)] = 1;
            for (int c = r + 1; c < n; ++c) {
                const std::uint8_t k = unif(rng) < density ? 1 : 0;
                keep[static_cast<std::size_t>(r * n + c)] = k;
                keep[static_cast<std::size_t>(c * n + r)] = k;
            }
        }
        return ChoiMask(dIn, dOut, std::move(keep));
    }
    throw InputError("unknown builtin mask '" + name + "' (expected family9, full, random)");
}

// ---------------------------------------------------------------- ChoiParams

bool ChoiParams::isDependentSlot(int p, int q) const {
    if (!flags.tp) return false;
    return p % dOut == dOut - 1 && q % dOut == dOut - 1;
}

void ChoiParams::validate() const {
    if (dIn < 1 || dOut < 1) throw DimensionError("ChoiParams: dimensions must be positive");
    if (X.rows() != size() || X.cols() != size()) throw DimensionError("ChoiParams: X must be (dIn*dOut)^2");
    if (!X.allFinite()) throw InputError("ChoiParams: non-finite parameters");
    if (mask) {
        if (mask->dIn() != dIn || mask->dOut() != dOut) throw DimensionError("ChoiParams: mask dimensions mismatch");
        mask->validate();
        if (flags.tp) {
            for (int i = 0; i < dIn; ++i)
                for (int k = 0; k < dIn; ++k) {
                    const int p = i * dOut + dOut - 1;
                    const int q = k * dOut + dOut - 1;
                    if (!mask->keeps(p, q)) {
                        throw InputError("ChoiParams: mask removes the trace-fixing diagonal slot of block (" +
                                         std::to_string(i) + "," + std::to_string(k) + ")");
                    }
                }
        }
    }
}

void ChoiParams::normalize() {
    const int n = size();
    if (mask) {
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (!mask->keeps(p, q)) X(p, q) = 0.0;
    }
    if (flags.real) X = ((X + X.transpose()) * 0.5).eval();
    if (flags.tp) {
        for (int i = 0; i < dIn; ++i)
            for (int k = 0; k < dIn; ++k) {
                double sum = 0.0;
                for (int j = 0; j + 1 < dOut; ++j) sum += X(i * dOut + j, k * dOut + j);
                X(i * dOut + dOut - 1, k * dOut + dOut - 1) = (i == k ? 1.0 : 0.0) - sum;
            }
    }
}

ChoiParams ChoiParams::random(int dIn, int dOut, ChoiFlags flags, std::optional<ChoiMask> mask, std::mt19937_64& rng,
                              double stddev) {
    if (!(stddev > 0.0)) throw InputError("initial standard deviation must be positive");
    ChoiParams p;
    p.dIn = dIn;
    p.dOut = dOut;
    p.flags = flags;
    p.mask = std::move(mask);
    const int n = dIn * dOut;
    p.X.resize(n, n);
    if (dIn < 1 || dOut < 1) throw DimensionError("dimensions must be positive");
    std::normal_distribution<double> gauss(0.0, stddev);
    for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r) p.X(r, q) = gauss(rng);
    p.validate();
    p.normalize();
    return p;
}

ChoiMatrix buildChoi(const ChoiParams& params) {
    params.validate();
    ChoiParams eff = params;
    eff.normalize();
    const int n = eff.size();
    ComplexMatrix c(n, n);
    for (int q = 0; q < n; ++q) {
        for (int p = 0; p < n; ++p) {
            const double re = 0.5 * (eff.X(p, q) + eff.X(q, p));
            const double im = eff.flags.real ? 0.0 : 0.5 * (eff.X(p, q) - eff.X(q, p));
            c(p, q) = Complex(re, im);
        }
    }
    // The formula is already exactly Hermitian; the constructor's
    // symmetrization leaves it unchanged.
    return ChoiMatrix(eff.dIn, eff.dOut, HermitianOperator(c), eff.flags);
}

RealMatrix choiParamGradient(const ChoiParams& params, const ComplexMatrix& grad) {
    const int n = params.size();
    if (grad.rows() != n || grad.cols() != n) throw DimensionError("choiParamGradient: gradient shape mismatch");
    const ComplexMatrix g = (grad + grad.adjoint()) * 0.5;
    RealMatrix out(n, n);
    for (int q = 0; q < n; ++q)
        for (int p = 0; p < n; ++p)
            out(p, q) = params.flags.real ? g(p, q).real() : g(p, q).real() + g(p, q).imag();
    if (params.flags.tp) {
        const int dOut = params.dOut;
        for (int i = 0; i < params.dIn; ++i)
            for (int k = 0; k < params.dIn; ++k) {
                const int pd = i * dOut + dOut - 1;
                const int qd = k * dOut + dOut - 1;
                const double dep = out(pd, qd);
                for (int j = 0; j + 1 < dOut; ++j) out(i * dOut + j, k * dOut + j) -= dep;
                out(pd, qd) = 0.0;
            }
    }
    if (params.mask) {
        for (int q = 0; q < n; ++q)
            for (int p = 0; p < n; ++p)
                if (!params.mask->keeps(p, q)) out(p, q) = 0.0;
    }
    return out;
}

// --------------------------------------------------------------- map action

ComplexMatrix applyMap(const ChoiMatrix& c, const ComplexMatrix& x) {
    const int d = c.dIn(), dOut = c.dOut();
    if (x.rows() != d || x.cols() != d) throw DimensionError("applyMap: input must be dIn × dIn");
    const ComplexMatrix& m = c.matrix();
    ComplexMatrix out = ComplexMatrix::Zero(dOut, dOut);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const Complex rij = x(i, j);
            if (rij == Complex(0.0, 0.0)) continue;
            out += rij * m.block(i * dOut, j * dOut, dOut, dOut);
        }
    return out;
}

HermitianOperator applyMap(const ChoiMatrix& c, const HermitianOperator& rho) {
    return HermitianOperator(applyMap(c, rho.matrix()));
}

// -------------------------------------------------------------------- Kraus

int KrausSet::dIn() const {
    if (ops.empty()) throw InputError("KrausSet: empty");
    return static_cast<int>(ops.front().cols());
}

int KrausSet::dOut() const {
    if (ops.empty()) throw InputError("KrausSet: empty");
    return static_cast<int>(ops.front().rows());
}

double KrausSet::completenessResidual() const {
    ComplexMatrix s = ComplexMatrix::Zero(dIn(), dIn());
    for (const auto& e : ops) s += e.adjoint() * e;
    return (s - ComplexMatrix::Identity(dIn(), dIn())).norm();
}

ComplexMatrix KrausSet::apply(const ComplexMatrix& rho) const {
    ComplexMatrix out = ComplexMatrix::Zero(dOut(), dOut());
    for (const auto& e : ops) out += e * rho * e.adjoint();
    return out;
}

ChoiMatrix choiFromKraus(const KrausSet& k) {
    const int d = k.dIn(), dOut = k.dOut();
    for (const auto& e : k.ops) {
        if (e.rows() != dOut || e.cols() != d) throw InputError("choiFromKraus: Kraus operators differ in shape");
    }
    const ComplexVector psi = maxEntVector(d);
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    ComplexMatrix c = ComplexMatrix::Zero(d * dOut, d * dOut);
    for (const auto& e : k.ops) {
        const ComplexVector v = kron(id, e) * psi;
        c += v * v.adjoint();
    }
    return ChoiMatrix(d, dOut, HermitianOperator(c));
}

// ------------------------------------------------------------------- family

ChoiMatrix familyChoi(const FamilyParams& p) {
    if (p.a < 0.0 || p.b < 0.0 || p.c < 0.0) throw InputError("familyChoi: a, b, c must be non-negative");
    ComplexMatrix m = ComplexMatrix::Zero(9, 9);
    const double diag[9] = {p.a, p.b, p.c, p.c, p.a, p.b, p.b, p.c, p.a};
    for (int i = 0; i < 9; ++i) m(i, i) = diag[i];
    m(1, 3) = p.w;
    m(3, 1) = std::conj(p.w);
    m(0, 8) = p.z;
    m(8, 0) = std::conj(p.z);
    return ChoiMatrix(3, 3, HermitianOperator(m));
}

ComplexMatrix familyAction(const FamilyParams& p, const ComplexMatrix& r) {
    if (r.rows() != 3 || r.cols() != 3) throw DimensionError("familyAction: input must be 3×3");
    ComplexMatrix out = ComplexMatrix::Zero(3, 3);
    out(0, 0) = p.a * r(0, 0) + p.c * r(1, 1) + p.b * r(2, 2);
    out(1, 1) = p.b * r(0, 0) + p.a * r(1, 1) + p.c * r(2, 2);
    out(2, 2) = p.c * r(0, 0) + p.b * r(1, 1) + p.a * r(2, 2);
    out(0, 1) = std::conj(p.w) * r(1, 0);
    out(1, 0) = p.w * r(0, 1);
    out(0, 2) = p.z * r(0, 2);
    out(2, 0) = std::conj(p.z) * r(2, 0);
    return out;
}

// -------------------------------------------------------------- composition

ChoiMatrix composeChoi(const ChoiMatrix& c1, const ChoiMatrix& c2) {
    if (c2.dOut() != c1.dIn()) throw InputError("composeChoi: output of T2 must match input of T1");
    const int din = c2.dIn(), mid = c2.dOut(), dout = c1.dOut();
    const ComplexMatrix& m1 = c1.matrix();
    const ComplexMatrix& m2 = c2.matrix();
    ComplexMatrix out = ComplexMatrix::Zero(din * dout, din * dout);
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            auto blk = out.block(i * dout, j * dout, dout, dout);
            for (int a = 0; a < mid; ++a)
                for (int b = 0; b < mid; ++b) {
                    const Complex coef = m2(i * mid + a, j * mid + b);
                    if (coef == Complex(0.0, 0.0)) continue;
                    blk += coef * m1.block(a * dout, b * dout, dout, dout);
                }
        }
    return ChoiMatrix(din, dout, HermitianOperator(out));
}

std::pair<ComplexMatrix, ComplexMatrix> composeChoiAdjoint(const ComplexMatrix& g, const ChoiMatrix& c1,
                                                           const ChoiMatrix& c2) {
    const int din = c2.dIn(), mid = c2.dOut(), dout = c1.dOut();
    if (g.rows() != din * dout || g.cols() != din * dout) throw DimensionError("composeChoiAdjoint: shape mismatch");
    const ComplexMatrix& m1 = c1.matrix();
    const ComplexMatrix& m2 = c2.matrix();
    ComplexMatrix g1 = ComplexMatrix::Zero(mid * dout, mid * dout);
    ComplexMatrix g2 = ComplexMatrix::Zero(din * mid, din * mid);
    // dL = Re Σ G[(j,y),(i,x)] Σ_ab C2[(i,a),(j,b)] C1[(a,x),(b,y)].
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            const auto gBlock = g.block(j * dout, i * dout, dout, dout); // G[(j,·),(i,·)]
            for (int a = 0; a < mid; ++a)
                for (int b = 0; b < mid; ++b) {
                    const Complex c2v = m2(i * mid + a, j * mid + b);
                    // G1[(b,y),(a,x)] += G[(j,y),(i,x)] * C2[(i,a),(j,b)]
                    g1.block(b * dout, a * dout, dout, dout) += c2v * gBlock;
                    // G2[(j,b),(i,a)] += Σ_xy G[(j,y),(i,x)] C1[(a,x),(b,y)]
                    const auto c1Block = m1.block(a * dout, b * dout, dout, dout);
                    g2(j * mid + b, i * mid + a) += (gBlock.transpose().cwiseProduct(c1Block)).sum();
                }
        }
    return {(g1 + g1.adjoint()) * 0.5, (g2 + g2.adjoint()) * 0.5};
}

ChoiMatrix precomposeTransposition(const ChoiMatrix& c) {
    ChoiFlags flags = c.flags();
    return ChoiMatrix(c.dIn(), c.dOut(), partialTranspose(c.op(), c.dims(), {0}), flags);
}

// -------------------------------------------------------------------- probe

namespace {

ComplexVector randomUnit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
    return v / v.norm();
}

} // namespace

ProbeResult blockPositivityProbe(const ChoiMatrix& c, int nSamples, int seesawIters, std::uint64_t seed) {
    if (nSamples < 1) throw InputError("blockPositivityProbe: nSamples must be at least 1");
    const int d = c.dIn(), dOut = c.dOut();
    const ComplexMatrix& m = c.matrix();
    std::mt19937_64 rng(seed);
    ProbeResult best;
    best.minValue = std::numeric_limits<double>::infinity();

    ComplexMatrix outBlock(dOut, dOut), inBlock(d, d);
    for (int s = 0; s < nSamples; ++s) {
        ComplexVector v = randomUnit(d, rng);
        ComplexVector w = randomUnit(dOut, rng);
        double value = (kron(v, w).adjoint() * m * kron(v, w))(0, 0).real();
        for (int it = 0; it < seesawIters; ++it) {
            // Fix v: contract to B(C^d').
            outBlock.setZero();
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) outBlock += std::conj(v(i)) * v(j) * m.block(i * dOut, j * dOut, dOut, dOut);
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> eo((outBlock + outBlock.adjoint()) * 0.5);
            w = eo.eigenvectors().col(0);
            // Fix w: contract to B(C^d).
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    inBlock(i, j) = (w.adjoint() * m.block(i * dOut, j * dOut, dOut, dOut) * w)(0, 0);
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> ei((inBlock + inBlock.adjoint()) * 0.5);
            v = ei.eigenvectors().col(0);
            value = ei.eigenvalues()(0);
        }
        if (seesawIters == 0) value = (kron(v, w).adjoint() * m * kron(v, w))(0, 0).real();
        if (value < best.minValue) {
            best.minValue = value;
            best.v = v;
            best.w = w;
        }
    }
    return best;
}

} // namespace posmap
