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

#include "posmap/certificates.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "posmap/errors.hpp"

namespace posmap {

const char* toString(ExtendSide s) {
    switch (s) {
        case ExtendSide::First: return "first";
        case ExtendSide::Second: return "second";
        case ExtendSide::Auto: return "auto";
    }
    return "second";
}

ExtendSide extendSideFromString(const std::string& s) {
    if (s == "first") return ExtendSide::First;
    if (s == "second") return ExtendSide::Second;
    if (s == "auto") return ExtendSide::Auto;
    throw InputError("extend side must be first, second or auto (got '" + s + "')");
}

const char* toString(CertStatus s) {
    switch (s) {
        case CertStatus::Optimal: return "optimal";
        case CertStatus::Inaccurate: return "inaccurate";
        case CertStatus::Infeasible: return "infeasible";
        case CertStatus::Failed: return "failed";
    }
    return "failed";
}

namespace {

// Reorders an operator on C^x ⊗ C^y to C^y ⊗ C^x.
ComplexMatrix swapFactors(const ComplexMatrix& m, int x, int y) {
    ComplexMatrix out(x * y, x * y);
    for (int a = 0; a < x; ++a)
        for (int b = 0; b < y; ++b)
            for (int a2 = 0; a2 < x; ++a2)
                for (int b2 = 0; b2 < y; ++b2) out(b * x + a, b2 * x + a2) = m(a * y + b, a2 * y + b2);
    return out;
}

} // namespace

ComplexMatrix ExtensionProblem::extensionState(const RealVector& y) const {
    const int n = variableDim;
    ComplexMatrix sigma = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double yi = y(static_cast<Eigen::Index>(i));
        for (const auto& e : basis[i]) sigma(e.row, e.col) += yi * e.value;
    }
    return sigma;
}

ComplexMatrix ExtensionProblem::reducedState(const RealVector& y) const {
    std::vector<int> dims{dimA};
    for (int t = 0; t < k; ++t) dims.push_back(dimB);
    SubsystemSet traced;
    for (int t = 2; t <= k; ++t) traced.push_back(t);
    ComplexMatrix rho = traced.empty() ? extensionState(y) : partialTrace(extensionState(y), SubsystemDims(dims), traced);
    rho = ((rho + rho.adjoint()) * 0.5).eval();
    return swapped ? swapFactors(rho, dimA, dimB) : rho;
}

ExtensionProblem buildExtensionProblem(const ChoiMatrix& c, int k, const SolverOptions& opts) {
    if (k < 1) throw InputError("extension level k must be at least 1");
    ExtensionProblem ep;
    ep.k = k;
    bool extendInput = false;
    switch (opts.extendSide) {
        case ExtendSide::Second: extendInput = false; break;
        case ExtendSide::First: extendInput = true; break;
        case ExtendSide::Auto: extendInput = c.dIn() < c.dOut(); break;
    }
    if (k == 1) extendInput = false;
    ep.swapped = extendInput;
    ep.dimA = extendInput ? c.dOut() : c.dIn();
    ep.dimB = extendInput ? c.dIn() : c.dOut();
    const ComplexMatrix cm = extendInput ? swapFactors(c.matrix(), c.dIn(), c.dOut()) : c.matrix();

    long long nLong = ep.dimA;
    for (int t = 0; t < k; ++t) nLong *= ep.dimB;
    if (nLong > opts.maxExtensionDim) {
        throw CapacityError("extension space dimension " + std::to_string(nLong) + " exceeds the limit of " +
                            std::to_string(opts.maxExtensionDim));
    }
    const int n = static_cast<int>(nLong);
    ep.variableDim = n;
    ep.embeddedDim = 2 * n;
    ep.symmetryGenerators = k - 1;
    ep.pptCones = k;
    ep.realStates = opts.realStatesForRealChoi && cm.imag().cwiseAbs().maxCoeff() == 0.0;

    std::vector<int> dimsVec{ep.dimA};
    for (int t = 0; t < k; ++t) dimsVec.push_back(ep.dimB);
    const SubsystemDims dims(dimsVec);
    std::vector<std::vector<int>> digits(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) digits[static_cast<std::size_t>(p)] = splitIndex(p, dims);

    // Adjacent transpositions of B slots t and t+1 (slots are 1..k).
    std::vector<std::vector<int>> generators;
    for (int t = 1; t < k; ++t) {
        std::vector<int> g(static_cast<std::size_t>(n));
        for (int p = 0; p < n; ++p) {
            auto dg = digits[static_cast<std::size_t>(p)];
            std::swap(dg[static_cast<std::size_t>(t)], dg[static_cast<std::size_t>(t + 1)]);
            g[static_cast<std::size_t>(p)] = static_cast<int>(joinIndex(dg, dims));
        }
        generators.push_back(std::move(g));
    }

    // Orbits of matrix units E_pq under simultaneous B permutations.
    const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    std::vector<int> orbitOf(nn, -1);
    std::vector<std::vector<std::pair<int, int>>> orbits;
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            const std::size_t id = static_cast<std::size_t>(p) * static_cast<std::size_t>(n) + static_cast<std::size_t>(q);
            if (orbitOf[id] >= 0) continue;
            const int o = static_cast<int>(orbits.size());
            orbits.emplace_back();
            std::vector<std::pair<int, int>> stack{{p, q}};
            orbitOf[id] = o;
            while (!stack.empty()) {
                const auto [r, s] = stack.back();
                stack.pop_back();
                orbits[static_cast<std::size_t>(o)].emplace_back(r, s);
                for (const auto& g : generators) {
                    const int r2 = g[static_cast<std::size_t>(r)], s2 = g[static_cast<std::size_t>(s)];
                    const std::size_t id2 = static_cast<std::size_t>(r2) * static_cast<std::size_t>(n) + static_cast<std::size_t>(s2);
                    if (orbitOf[id2] < 0) {
                        orbitOf[id2] = o;
                        stack.emplace_back(r2, s2);
                    }
                }
            }
        }
    }

    // Hermitian, permutation-invariant, traceless basis around σ0 = I/n.
    // The pivot n-1 = |dA-1, dB-1, ..., dB-1⟩ is fixed by every permutation.
    const int pivot = n - 1;
    std::vector<bool> done(orbits.size(), false);
    for (std::size_t o = 0; o < orbits.size(); ++o) {
        if (done[o]) continue;
        const auto [p0, q0] = orbits[o].front();
        const std::size_t t = static_cast<std::size_t>(orbitOf[static_cast<std::size_t>(q0) * static_cast<std::size_t>(n) + static_cast<std::size_t>(p0)]);
        done[o] = done[t] = true;
        if (t == o) {
            if (p0 == q0) {
                if (p0 == pivot) continue;
                conic::SparseHermitian el;
                for (const auto& [r, s] : orbits[o]) el.push_back({r, s, Complex(1.0, 0.0)});
                el.push_back({pivot, pivot, Complex(-static_cast<double>(orbits[o].size()), 0.0)});
                ep.basis.push_back(std::move(el));
            } else {
                conic::SparseHermitian el;
                for (const auto& [r, s] : orbits[o]) el.push_back({r, s, Complex(1.0, 0.0)});
                ep.basis.push_back(std::move(el));
            }
            continue;
        }
        conic::SparseHermitian re, im;
        for (const auto& [r, s] : orbits[o]) {
            re.push_back({r, s, Complex(1.0, 0.0)});
            im.push_back({r, s, Complex(0.0, 1.0)});
        }
        for (const auto& [r, s] : orbits[t]) {
            re.push_back({r, s, Complex(1.0, 0.0)});
            im.push_back({r, s, Complex(0.0, -1.0)});
        }
        ep.basis.push_back(std::move(re));
        if (!ep.realStates) ep.basis.push_back(std::move(im));
    }

    const int m = static_cast<int>(ep.basis.size());
    auto& prob = ep.problem;
    prob.numVariables = m;
    prob.objective = RealVector::Zero(m);
    const int dAB = ep.dimA * ep.dimB;
    prob.objectiveConstant = cm.trace().real() / static_cast<double>(dAB);

    // Tr(Tr_{B2..Bk}(E_pq) C) = C[(a_q,b1_q),(a_p,b1_p)] when the traced digits agree.
    for (int i = 0; i < m; ++i) {
        double ci = 0.0;
        for (const auto& e : ep.basis[static_cast<std::size_t>(i)]) {
            const auto& dp = digits[static_cast<std::size_t>(e.row)];
            const auto& dq = digits[static_cast<std::size_t>(e.col)];
            bool same = true;
            for (int s = 2; s <= k && same; ++s) same = dp[static_cast<std::size_t>(s)] == dq[static_cast<std::size_t>(s)];
            if (!same) continue;
            const int u = dp[0] * ep.dimB + dp[1];
            const int v = dq[0] * ep.dimB + dq[1];
            ci += (e.value * cm(v, u)).real();
        }
        prob.objective(i) = ci;
    }

    auto makeBlock = [&](int transposedSlots) {
        conic::ConeBlock block;
        block.kind = conic::ConeKind::Psd;
        block.size = n;
        block.label = transposedSlots == 0 ? "sigma" : "pt" + std::to_string(transposedSlots);
        block.constant = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
        block.coefficients.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            conic::SparseHermitian mapped;
            mapped.reserve(ep.basis[static_cast<std::size_t>(i)].size());
            for (const auto& e : ep.basis[static_cast<std::size_t>(i)]) {
                auto r = digits[static_cast<std::size_t>(e.row)];
                auto s = digits[static_cast<std::size_t>(e.col)];
                for (int slot = 1; slot <= transposedSlots; ++slot) {
                    std::swap(r[static_cast<std::size_t>(slot)], s[static_cast<std::size_t>(slot)]);
                }
                mapped.push_back({static_cast<int>(joinIndex(r, dims)), static_cast<int>(joinIndex(s, dims)), e.value});
            }
            block.coefficients.push_back(std::move(mapped));
        }
        return block;
    };
    prob.cones.push_back(makeBlock(0));
    for (int l = 1; l <= k; ++l) prob.cones.push_back(makeBlock(l));
    return ep;
}

namespace {

Certificate solveCertificate(const ChoiMatrix& c, int k, const SolverOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const ExtensionProblem ep = buildExtensionProblem(c, k, opts);
    conic::SolverSettings settings;
    settings.feasibilityTol = opts.feasibilityTol;
    settings.gapTol = opts.dualityGapTol;
    settings.maxIterations = opts.maxIterations;
    const conic::SolveResult res = conic::solve(ep.problem, settings);

    Certificate cert;
    cert.k = k;
    cert.iterations = res.iterations;
    switch (res.status) {
        case conic::SolveStatus::Optimal: cert.status = CertStatus::Optimal; break;
        case conic::SolveStatus::Inaccurate: cert.status = CertStatus::Inaccurate; break;
        case conic::SolveStatus::Infeasible: cert.status = CertStatus::Infeasible; break;
        case conic::SolveStatus::Failed: cert.status = CertStatus::Failed; break;
    }
    if (cert.usable()) {
        cert.value = ep.problem.evaluateObjective(res.y);
        cert.witness = HermitianOperator(ep.reducedState(res.y));
    } else {
        cert.value = std::numeric_limits<double>::quiet_NaN();
        cert.witness = HermitianOperator::zero(static_cast<Eigen::Index>(c.dIn()) * c.dOut());
    }
    cert.solveSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cert;
}

} // namespace

Certificate zeta1(const ChoiMatrix& c, const SolverOptions& opts) { return solveCertificate(c, 1, opts); }

Certificate zetaK(const ChoiMatrix& c, int k, const SolverOptions& opts) {
    if (k < 2) throw InputError("zetaK requires k >= 2");
    return solveCertificate(c, k, opts);
}

Verdict certifyNonDecomposable(const ChoiMatrix& c, const SolverOptions& opts) {
    Verdict v;
    v.certificate = zeta1(c, opts);
    if (!v.certificate.usable()) throw SolverError("zeta1 solve failed");
    v.margin = -v.certificate.value;
    v.holds = v.certificate.value < -opts.certTol;
    return v;
}

Verdict certifyPositiveOnRelaxation(const ChoiMatrix& c, int k, const SolverOptions& opts) {
    Verdict v;
    v.certificate = zetaK(c, k, opts);
    if (!v.certificate.usable()) throw SolverError("zetaK solve failed");
    v.margin = v.certificate.value;
    v.holds = v.certificate.value >= -opts.certTol;
    return v;
}

} // namespace posmap
