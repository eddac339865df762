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

#include "posmap/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "posmap/errors.hpp"

namespace posmap::conic {

const char* toString(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Inaccurate: return "inaccurate";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Failed: return "failed";
    }
    return "unknown";
}

void ConicProblem::validate() const {
    if (numVariables < 0) throw InputError("conic problem: negative variable count");
    if (objective.size() != numVariables) throw DimensionError("conic problem: objective length mismatch");
    for (const auto& eq : equalities) {
        if (eq.coefficients.size() != numVariables) throw DimensionError("conic problem: equality length mismatch");
    }
    for (const auto& cone : cones) {
        if (cone.size < 1) throw DimensionError("conic problem: empty cone block " + cone.label);
        if (cone.constant.rows() != cone.size || cone.constant.cols() != cone.size) {
            throw DimensionError("conic problem: constant of block " + cone.label + " has wrong shape");
        }
        if (cone.coefficients.size() != static_cast<std::size_t>(numVariables)) {
            throw DimensionError("conic problem: block " + cone.label + " needs one coefficient per variable");
        }
        for (const auto& coeff : cone.coefficients) {
            for (const auto& e : coeff) {
                if (e.row < 0 || e.col < 0 || e.row >= cone.size || e.col >= cone.size) {
                    throw DimensionError("conic problem: entry outside block " + cone.label);
                }
                if (cone.kind == ConeKind::NonNegative && e.row != e.col) {
                    throw InputError("conic problem: nonnegative block " + cone.label + " must be diagonal");
                }
            }
        }
    }
}

ComplexMatrix ConicProblem::evaluateBlock(std::size_t block, const RealVector& y) const {
    const auto& cone = cones.at(block);
    ComplexMatrix out = cone.constant;
    for (int i = 0; i < numVariables; ++i) {
        const double yi = y(i);
        if (yi == 0.0) continue;
        for (const auto& e : cone.coefficients[static_cast<std::size_t>(i)]) out(e.row, e.col) += yi * e.value;
    }
    return out;
}

double ConicProblem::evaluateObjective(const RealVector& y) const { return objective.dot(y) + objectiveConstant; }

namespace {

// Re Tr(F K) for sparse Hermitian F.
double traceProduct(const SparseHermitian& f, const ComplexMatrix& k) {
    double s = 0.0;
    for (const auto& e : f) s += (e.value * k(e.col, e.row)).real();
    return s;
}

ComplexMatrix hermitianPart(const ComplexMatrix& m) { return (m + m.adjoint()) * 0.5; }

// Largest α with x + α·dx ⪰ 0 (infinity when dx keeps x in the cone).
double maxStep(const ComplexMatrix& x, const ComplexMatrix& dx) {
    Eigen::LLT<ComplexMatrix> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const auto lower = llt.matrixL();
    const ComplexMatrix t = lower.solve(dx);
    const ComplexMatrix s = lower.solve(t.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitianPart(s), Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0);
    if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / lmin;
}

bool inverseHermitian(const ComplexMatrix& z, ComplexMatrix& inv) {
    Eigen::LLT<ComplexMatrix> llt(z);
    if (llt.info() != Eigen::Success) return false;
    inv = hermitianPart(llt.solve(ComplexMatrix::Identity(z.rows(), z.cols())));
    return inv.allFinite();
}

bool isPositiveDefinite(const ComplexMatrix& z) {
    Eigen::LLT<ComplexMatrix> llt(z);
    if (llt.info() != Eigen::Success) return false;
    return llt.matrixLLT().diagonal().real().minCoeff() > 1e-10;
}

// Interior-point core for problems without equalities.
SolveResult solveInequalityForm(const ConicProblem& p, const SolverSettings& settings) {
    const int m = p.numVariables;
    const std::size_t nb = p.cones.size();
    SolveResult result;
    result.y = RealVector::Zero(m);

    if (nb == 0) {
        if (m > 0 && p.objective.cwiseAbs().maxCoeff() > 0.0) throw InputError("conic problem is unbounded");
        result.status = SolveStatus::Optimal;
        result.value = result.lowerBound = p.objectiveConstant;
        return result;
    }

    // Variables absent from every block are either free with zero cost or
    // make the problem unbounded.
    std::vector<bool> present(static_cast<std::size_t>(m), false);
    std::vector<std::vector<int>> active(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        for (int i = 0; i < m; ++i) {
            if (!p.cones[b].coefficients[static_cast<std::size_t>(i)].empty()) {
                active[b].push_back(i);
                present[static_cast<std::size_t>(i)] = true;
            }
        }
    }
    for (int i = 0; i < m; ++i) {
        if (!present[static_cast<std::size_t>(i)] && p.objective(i) != 0.0) {
            throw InputError("conic problem is unbounded: variable " + std::to_string(i) + " is unconstrained");
        }
    }

    int nTotal = 0;
    double normF0 = 0.0;
    double startScale = 0.0;
    std::vector<double> coeffNorm(static_cast<std::size_t>(m), 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        nTotal += p.cones[b].size;
        normF0 += p.cones[b].constant.squaredNorm();
        for (int i = 0; i < m; ++i) {
            for (const auto& e : p.cones[b].coefficients[static_cast<std::size_t>(i)]) {
                coeffNorm[static_cast<std::size_t>(i)] += std::norm(e.value);
            }
        }
    }
    normF0 = std::sqrt(normF0);
    double maxCoeffNorm = 0.0;
    for (int i = 0; i < m; ++i) {
        const double fn = std::sqrt(coeffNorm[static_cast<std::size_t>(i)]);
        maxCoeffNorm = std::max(maxCoeffNorm, fn);
        startScale = std::max(startScale, (1.0 + std::abs(p.objective(i))) / (1.0 + fn));
    }
    const double normC = p.objective.norm();

    std::vector<ComplexMatrix> X(nb), Z(nb), W(nb), D(nb), dX(nb), dZ(nb), dXa(nb), dZa(nb);
    const double xi = std::max({10.0, std::sqrt(static_cast<double>(nTotal)), nTotal * startScale});
    bool startFeasible = true;
    for (std::size_t b = 0; b < nb; ++b) {
        if (!isPositiveDefinite(p.cones[b].constant)) startFeasible = false;
    }
    const double eta = std::max({10.0, std::sqrt(static_cast<double>(nTotal)), maxCoeffNorm, normF0});
    for (std::size_t b = 0; b < nb; ++b) {
        const int n = p.cones[b].size;
        X[b] = ComplexMatrix::Identity(n, n) * xi;
        Z[b] = startFeasible ? hermitianPart(p.cones[b].constant) : ComplexMatrix(ComplexMatrix::Identity(n, n) * eta);
    }

    RealVector& y = result.y;
    RealVector dy(m), dya(m), rhs(m), primalRes(m);
    RealMatrix M(m, m);

    auto assembleRhs = [&](const std::vector<ComplexMatrix>& R) {
        rhs = -p.objective;
        for (std::size_t b = 0; b < nb; ++b) {
            for (int i : active[b]) rhs(i) += traceProduct(p.cones[b].coefficients[static_cast<std::size_t>(i)], R[b]);
        }
    };
    auto directions = [&](const RealVector& step, std::vector<ComplexMatrix>& outZ, std::vector<ComplexMatrix>& outX,
                          double sigmaMu, const std::vector<ComplexMatrix>* corrX,
                          const std::vector<ComplexMatrix>* corrZ) {
        for (std::size_t b = 0; b < nb; ++b) {
            outZ[b] = D[b];
            for (int i : active[b]) {
                const double s = step(i);
                for (const auto& e : p.cones[b].coefficients[static_cast<std::size_t>(i)]) outZ[b](e.row, e.col) += s * e.value;
            }
            ComplexMatrix t = -X[b] - X[b] * outZ[b] * W[b];
            if (sigmaMu != 0.0) t += sigmaMu * W[b];
            if (corrX != nullptr) t -= (*corrX)[b] * (*corrZ)[b] * W[b];
            outX[b] = hermitianPart(t);
        }
    };
    auto stepLengths = [&](const std::vector<ComplexMatrix>& ddx, const std::vector<ComplexMatrix>& ddz) {
        double ap = std::numeric_limits<double>::infinity();
        double ad = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < nb; ++b) {
            ap = std::min(ap, maxStep(X[b], ddx[b]));
            ad = std::min(ad, maxStep(Z[b], ddz[b]));
        }
        return std::pair<double, double>(ap, ad);
    };

    std::vector<ComplexMatrix> R(nb);
    double lastGoodGap = std::numeric_limits<double>::infinity();
    double lastPinf = std::numeric_limits<double>::infinity();
    double lastDinf = std::numeric_limits<double>::infinity();
    bool stalled = false;

    for (int iter = 0; iter <= settings.maxIterations; ++iter) {
        result.iterations = iter;
        for (std::size_t b = 0; b < nb; ++b) {
            if (!inverseHermitian(Z[b], W[b])) {
                stalled = true;
                break;
            }
            D[b] = p.evaluateBlock(b, y) - Z[b];
        }
        if (stalled) break;

        primalRes = p.objective;
        double mu = 0.0;
        double bound = 0.0;
        double dinf = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            for (int i : active[b]) primalRes(i) -= traceProduct(p.cones[b].coefficients[static_cast<std::size_t>(i)], X[b]);
            mu += realInner(X[b], Z[b]);
            bound -= realInner(p.cones[b].constant, X[b]);
            dinf += D[b].squaredNorm();
        }
        mu /= nTotal;
        const double value = p.objective.dot(y);
        const double pinf = primalRes.norm() / (1.0 + normC);
        dinf = std::sqrt(dinf) / (1.0 + normF0);
        const double relGap = std::abs(value - bound) / (1.0 + std::abs(value) + std::abs(bound));

        result.value = value + p.objectiveConstant;
        result.lowerBound = bound + p.objectiveConstant;
        result.primalResidual = pinf;
        result.dualResidual = dinf;
        result.relativeGap = relGap;
        lastGoodGap = relGap;
        lastPinf = pinf;
        lastDinf = dinf;

        if (!std::isfinite(value) || !std::isfinite(bound)) {
            stalled = true;
            break;
        }
        if (relGap <= settings.gapTol && pinf <= settings.feasibilityTol && dinf <= settings.feasibilityTol) {
            result.status = SolveStatus::Optimal;
            return result;
        }
        if (iter == settings.maxIterations) break;

        // Schur complement M_ij = Re Tr(F_i X F_j Z^{-1}).
        M.setZero();
        for (std::size_t b = 0; b < nb; ++b) {
            const int n = p.cones[b].size;
            const auto& coeffs = p.cones[b].coefficients;
            ComplexMatrix G(n, n);
            const auto& act = active[b];
            for (std::size_t jj = 0; jj < act.size(); ++jj) {
                const int j = act[jj];
                G.setZero();
                for (const auto& e : coeffs[static_cast<std::size_t>(j)]) {
                    G.noalias() += e.value * (X[b].col(e.row) * W[b].row(e.col));
                }
                for (std::size_t ii = 0; ii <= jj; ++ii) {
                    const int i = act[ii];
                    const double v = traceProduct(coeffs[static_cast<std::size_t>(i)], G);
                    M(i, j) += v;
                    if (ii != jj) M(j, i) += v;
                }
            }
        }
        for (int i = 0; i < m; ++i) {
            if (!present[static_cast<std::size_t>(i)]) M(i, i) = 1.0;
        }
        M = (M + M.transpose()).eval() * 0.5;

        Eigen::LLT<RealMatrix> schur(M);
        if (schur.info() != Eigen::Success) {
            const double reg = 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
            M.diagonal().array() += reg;
            schur.compute(M);
            if (schur.info() != Eigen::Success) {
                stalled = true;
                break;
            }
        }
        auto solveSchur = [&](RealVector& out) {
            out = schur.solve(rhs);
            for (int i = 0; i < m; ++i) {
                if (!present[static_cast<std::size_t>(i)]) out(i) = 0.0;
            }
        };

        // Predictor.
        for (std::size_t b = 0; b < nb; ++b) R[b] = -X[b] * D[b] * W[b];
        assembleRhs(R);
        solveSchur(dya);
        directions(dya, dZa, dXa, 0.0, nullptr, nullptr);
        auto [apAff, adAff] = stepLengths(dXa, dZa);
        apAff = std::min(1.0, apAff);
        adAff = std::min(1.0, adAff);
        double muAff = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            muAff += realInner(X[b] + apAff * dXa[b], Z[b] + adAff * dZa[b]);
        }
        muAff /= nTotal;
        double sigma = std::pow(std::max(0.0, muAff) / mu, 3.0);
        sigma = std::clamp(sigma, 0.0, 1.0);
        if (pinf > 1e3 * settings.feasibilityTol || dinf > 1e3 * settings.feasibilityTol) sigma = std::max(sigma, 0.1 * std::min(1.0, std::max(pinf, dinf)));

        // Corrector.
        const double sigmaMu = sigma * mu;
        for (std::size_t b = 0; b < nb; ++b) R[b] = sigmaMu * W[b] - X[b] * D[b] * W[b] - dXa[b] * dZa[b] * W[b];
        assembleRhs(R);
        solveSchur(dy);
        directions(dy, dZ, dX, sigmaMu, &dXa, &dZa);
        auto [ap, ad] = stepLengths(dX, dZ);
        const double tau = std::clamp(0.9 + 0.09 * std::min(apAff, adAff), 0.9, 0.99);
        ap = std::min(1.0, tau * ap);
        ad = std::min(1.0, tau * ad);
        if (!(ap > 1e-12) && !(ad > 1e-12)) {
            stalled = true;
            break;
        }
        for (std::size_t b = 0; b < nb; ++b) {
            X[b] = hermitianPart(X[b] + ap * dX[b]);
            Z[b] = hermitianPart(Z[b] + ad * dZ[b]);
        }
        y += ad * dy;
    }

    const bool nearlySolved = lastGoodGap <= 1e-5 && lastPinf <= 1e-5 && lastDinf <= 1e-5;
    result.status = nearlySolved ? SolveStatus::Inaccurate : SolveStatus::Failed;
    return result;
}

} // namespace

SolveResult solve(const ConicProblem& problem, const SolverSettings& settings) {
    problem.validate();
    if (settings.feasibilityTol <= 0.0 || settings.gapTol <= 0.0 || settings.maxIterations < 1) {
        throw InputError("solver settings: tolerances must be positive and maxIterations ≥ 1");
    }
    if (problem.equalities.empty()) return solveInequalityForm(problem, settings);

    // Eliminate equalities: y = y0 + N z.
    const int m = problem.numVariables;
    const int q = static_cast<int>(problem.equalities.size());
    RealMatrix A(q, m);
    RealVector rhs(q);
    for (int k = 0; k < q; ++k) {
        A.row(k) = problem.equalities[static_cast<std::size_t>(k)].coefficients.transpose();
        rhs(k) = problem.equalities[static_cast<std::size_t>(k)].rhs;
    }
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(A);
    const RealVector y0 = cod.solve(rhs);
    SolveResult result;
    if ((A * y0 - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) {
        result.status = SolveStatus::Infeasible;
        result.y = y0;
        return result;
    }
    Eigen::FullPivLU<RealMatrix> lu(A);
    const RealMatrix N = lu.kernel();
    const int r = lu.rank() == m ? 0 : static_cast<int>(N.cols());

    ConicProblem reduced;
    reduced.numVariables = r;
    reduced.objective = r > 0 ? RealVector(N.transpose() * problem.objective) : RealVector(0);
    reduced.objectiveConstant = problem.objective.dot(y0) + problem.objectiveConstant;
    for (std::size_t b = 0; b < problem.cones.size(); ++b) {
        const auto& cone = problem.cones[b];
        ConeBlock nc;
        nc.kind = cone.kind;
        nc.size = cone.size;
        nc.label = cone.label;
        nc.constant = problem.evaluateBlock(b, y0);
        for (int j = 0; j < r; ++j) {
            ComplexMatrix dense = ComplexMatrix::Zero(cone.size, cone.size);
            for (int i = 0; i < m; ++i) {
                const double w = N(i, j);
                if (w == 0.0) continue;
                for (const auto& e : cone.coefficients[static_cast<std::size_t>(i)]) dense(e.row, e.col) += w * e.value;
            }
            SparseHermitian entries;
            for (int c = 0; c < cone.size; ++c)
                for (int rr = 0; rr < cone.size; ++rr)
                    if (std::abs(dense(rr, c)) > 1e-15) entries.push_back({rr, c, dense(rr, c)});
            nc.coefficients.push_back(std::move(entries));
        }
        reduced.cones.push_back(std::move(nc));
    }
    SolveResult inner = solveInequalityForm(reduced, settings);
    result = inner;
    result.y = r > 0 ? RealVector(y0 + N * inner.y) : y0;
    result.value = problem.evaluateObjective(result.y);
    return result;
}

} // namespace posmap::conic
