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

#include "posmap/generators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "posmap/certificates.hpp"
#include "posmap/errors.hpp"

namespace posmap {

namespace {

ComplexMatrix gaussianComplex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = g(rng);
            m(i, j) = Complex(re, g(rng));
        }
    return m;
}

// Real and imaginary parts side by side, for Adam.
RealMatrix pack(const ComplexMatrix& m) {
    RealMatrix r(m.rows(), 2 * m.cols());
    r.leftCols(m.cols()) = m.real();
    r.rightCols(m.cols()) = m.imag();
    return r;
}

ComplexMatrix unpack(const RealMatrix& r) {
    const Eigen::Index c = r.cols() / 2;
    ComplexMatrix m(r.rows(), c);
    m.real() = r.leftCols(c);
    m.imag() = r.rightCols(c);
    return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double secondsSince(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

DilationParams DilationParams::zero(int systemDim, int ancillaDim) {
    if (systemDim < 1 || ancillaDim < 1) throw DimensionError("dilation dimensions must be positive");
    return {ComplexMatrix::Zero(systemDim * ancillaDim, systemDim * ancillaDim), ancillaDim};
}

DilationParams DilationParams::random(int systemDim, int ancillaDim, std::mt19937_64& rng, double scale) {
    DilationParams d = zero(systemDim, ancillaDim);
    d.A = gaussianComplex(d.A.rows(), d.A.cols(), rng, scale);
    return d;
}

ComplexMatrix dilationUnitary(const DilationParams& d) {
    if (d.A.rows() != d.A.cols()) throw DimensionError("dilation generator must be square");
    return matrixExp(d.A - d.A.adjoint());
}

KrausSet krausFromDilation(const DilationParams& d, int systemDim) {
    const int a = d.ancillaDim;
    if (systemDim < 1 || a < 1 || d.A.rows() != static_cast<Eigen::Index>(systemDim) * a || d.A.cols() != d.A.rows()) {
        throw InputError("krausFromDilation: generator is not (system·ancilla) square");
    }
    const ComplexMatrix u = dilationUnitary(d);
    KrausSet k;
    for (int j = 0; j < a; ++j) {
        ComplexMatrix e(systemDim, systemDim);
        for (int s = 0; s < systemDim; ++s)
            for (int t = 0; t < systemDim; ++t) e(s, t) = u(s * a + j, t * a);
        k.ops.push_back(std::move(e));
    }
    return k;
}

ComplexMatrix dilationGradient(const DilationParams& d, int systemDim, const ComplexMatrix& g) {
    const int a = d.ancillaDim;
    const int n = systemDim * a;
    const ComplexMatrix b = d.A - d.A.adjoint();
    const ComplexMatrix u = matrixExp(b);
    // C[(i,x),(j,y)] = Σ_k U(xa+k, ia) conj(U(ya+k, ja)).
    ComplexMatrix gu = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < systemDim; ++i)
        for (int x = 0; x < systemDim; ++x)
            for (int k = 0; k < a; ++k) {
                Complex acc(0.0, 0.0);
                for (int j = 0; j < systemDim; ++j)
                    for (int y = 0; y < systemDim; ++y) acc += g(i * systemDim + x, j * systemDim + y) * u(y * a + k, j * a);
                gu(x * a + k, i * a) = 2.0 * acc;
            }
    const ComplexMatrix gb = matrixExpDerivative(b.adjoint(), gu);
    return gb - gb.adjoint();
}

double DecomposableSpec::p() const { return sigmoid(pLogit); }

DecomposableSpec DecomposableSpec::withWeight(double p, DilationParams d1, DilationParams d2) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("mixing weight must lie in [0,1]");
    DecomposableSpec s;
    const double pc = std::clamp(p, 1e-300, 1.0 - 1e-16);
    s.pLogit = p == 1.0 ? 40.0 : (p == 0.0 ? -800.0 : std::log(pc / (1.0 - pc)));
    s.dilation1 = std::move(d1);
    s.dilation2 = std::move(d2);
    return s;
}

ChoiMatrix decomposableChoi(const DecomposableSpec& spec, int systemDim) {
    const double p = spec.p();
    const ChoiMatrix c1 = choiFromKraus(krausFromDilation(spec.dilation1, systemDim));
    const ChoiMatrix c2 = precomposeTransposition(choiFromKraus(krausFromDilation(spec.dilation2, systemDim)));
    return ChoiMatrix(systemDim, systemDim, HermitianOperator(p * c1.matrix() + (1.0 - p) * c2.matrix()),
                      ChoiFlags{true, false});
}

DecomposableRun trainNonCPDecomposable(const DecomposableGenConfig& gen, const TrainConfig& train) {
    train.validate();
    const int d = gen.systemDim;
    const int a = gen.ancillaDim > 0 ? gen.ancillaDim : d;
    std::mt19937_64 rng(train.seed);
    DecomposableRun run;
    run.spec.dilation1 = DilationParams::random(d, a, rng, gen.initScale);
    run.spec.dilation2 = DilationParams::random(d, a, rng, gen.initScale);
    run.spec.pLogit = std::normal_distribution<double>(0.0, 1.0)(rng);
    if (gen.initialP) run.spec.pLogit = DecomposableSpec::withWeight(*gen.initialP, {}, {}).pLogit;
    run.record.seed = train.seed;

    AdamState s1, s2, sp;
    const auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= train.maxEpochs; ++epoch) {
        const double p = run.spec.p();
        const ChoiMatrix c1 = choiFromKraus(krausFromDilation(run.spec.dilation1, d));
        const ChoiMatrix c2t = precomposeTransposition(choiFromKraus(krausFromDilation(run.spec.dilation2, d)));
        const ComplexMatrix c = p * c1.matrix() + (1.0 - p) * c2t.matrix();
        const HermitianEigen eh = eigH(c);
        const double lmin = eh.values(0);
        const double loss = relu(lmin);
        run.record.finalChoi = ChoiMatrix(d, d, HermitianOperator(c), ChoiFlags{true, false});
        run.record.rows.push_back({epoch, loss, kNaN, kNaN, kNaN, secondsSince(t0)});
        if (loss == 0.0) {
            run.record.outcome = RunOutcome::Success;
            run.record.successEpoch = epoch;
            return run;
        }
        const ComplexVector v = eh.vectors.col(0);
        const ComplexMatrix g = v * v.adjoint();
        const ComplexMatrix g2 = partialTranspose(g, SubsystemDims({d, d}), {0});
        const RealMatrix gA1 = pack(dilationGradient(run.spec.dilation1, d, p * g));
        const RealMatrix gA2 = pack(dilationGradient(run.spec.dilation2, d, (1.0 - p) * g2));
        RealMatrix gp(1, 1);
        gp(0, 0) = realInner(g, c1.matrix() - c2t.matrix()) * p * (1.0 - p);

        RealMatrix x1 = pack(run.spec.dilation1.A), x2 = pack(run.spec.dilation2.A), xp(1, 1);
        xp(0, 0) = run.spec.pLogit;
        adamStep(x1, gA1, s1, train);
        adamStep(x2, gA2, s2, train);
        adamStep(xp, gp, sp, train);
        run.spec.dilation1.A = unpack(x1);
        run.spec.dilation2.A = unpack(x2);
        run.spec.pLogit = xp(0, 0);
    }
    run.record.outcome = RunOutcome::Exhausted;
    return run;
}

PptMapSpec PptMapSpec::random(int dIn, int dOut, std::mt19937_64& rng, double scale) {
    if (dIn < 1 || dOut < 1) throw DimensionError("PPT map dimensions must be positive");
    const int n = dIn * dOut;
    return {gaussianComplex(n, n, rng, scale), dIn, dOut};
}

ChoiMatrix pptChoi(const PptMapSpec& spec) {
    const int n = spec.dIn * spec.dOut;
    if (spec.A.rows() != n) throw DimensionError("PPT factor must have dIn·dOut rows");
    return ChoiMatrix(spec.dIn, spec.dOut, HermitianOperator(spec.A * spec.A.adjoint()));
}

double pptPenalty(const PptMapSpec& spec) {
    const ChoiMatrix c = pptChoi(spec);
    const HermitianEigen eh = eigH(partialTranspose(c.matrix(), c.dims(), {1}));
    double s = 0.0;
    for (Eigen::Index i = 0; i < eh.values.size(); ++i) s += relu(-eh.values(i));
    return s;
}

ComplexMatrix pptPenaltyGradient(const PptMapSpec& spec) {
    const ChoiMatrix c = pptChoi(spec);
    const HermitianEigen eh = eigH(partialTranspose(c.matrix(), c.dims(), {1}));
    const Eigen::Index n = c.matrix().rows();
    ComplexMatrix gpt = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < eh.values.size(); ++i) {
        if (eh.values(i) < 0.0) gpt -= eh.vectors.col(i) * eh.vectors.col(i).adjoint();
    }
    const ComplexMatrix g = partialTranspose(gpt, c.dims(), {1});
    return 2.0 * g * spec.A;
}

PptSquareResult pptSquareRun(const PptSquareConfig& cfg, const TrainConfig& train, const LossConfig& loss) {
    train.validate();
    loss.validate();
    if (cfg.dimOuter < 1 || cfg.dimInner < 1) throw InputError("pptSquareRun: dimensions must be positive");
    std::mt19937_64 rng(train.seed);
    ChoiParams t1 = ChoiParams::random(cfg.dimOuter, cfg.dimInner, ChoiFlags{}, std::nullopt, rng);
    t1.X *= cfg.initScale;
    t1.normalize();
    PptMapSpec t2 = PptMapSpec::random(cfg.dimInner, cfg.dimOuter, rng, cfg.initScale / (cfg.dimInner * cfg.dimOuter));

    PptSquareResult res;
    res.record.seed = train.seed;
    AdamState s1, s2;
    const auto t0 = std::chrono::steady_clock::now();
    const int total = train.maxEpochs + cfg.repairEpochs;
    for (int epoch = 1; epoch <= total; ++epoch) {
        const bool repair = epoch > train.maxEpochs;
        const ChoiMatrix c1 = buildChoi(t1);
        const ChoiMatrix c2 = pptChoi(t2);
        const ChoiMatrix c12 = composeChoi(c1, c2);
        Certificate z1, zk;
        try {
            z1 = zeta1(c12, train.solver);
            zk = zetaK(c1, loss.k, train.solver);
        } catch (const SolverError& e) {
            res.record.message = e.what();
            z1.status = CertStatus::Failed;
        }
        if (!z1.usable() || !zk.usable()) {
            res.record.outcome = RunOutcome::SolverFailed;
            return res;
        }
        const double pen = pptPenalty(t2);
        const double posPen = relu(-zk.value);
        const double hinge = relu(loss.epsilon + z1.value);
        const double l = (repair ? 0.0 : hinge) + loss.gamma * posPen + cfg.pptWeight * pen;
        res.record.rows.push_back({epoch, l, z1.value, zk.value, kNaN, secondsSince(t0)});
        res.compositionZeta1 = z1.value;
        res.positivityPenalty = posPen;
        res.pptPenaltyValue = pen;
        res.t1 = c1;
        res.t2 = c2;
        res.record.finalChoi = c12;
        res.penaltiesMet = posPen <= cfg.penaltyTol && pen <= cfg.penaltyTol;
        if (l == 0.0 && (repair || hinge == 0.0)) break;
        if (repair && res.penaltiesMet) break;

        ComplexMatrix g12 = ComplexMatrix::Zero(c12.matrix().rows(), c12.matrix().cols());
        if (!repair && hinge > 0.0) g12 = z1.witness.matrix();
        auto [g1, g2] = composeChoiAdjoint(g12, c1, c2);
        if (posPen > 0.0) g1 -= loss.gamma * zk.witness.matrix();
        const RealMatrix gx = choiParamGradient(t1, g1);
        const ComplexMatrix ga = 2.0 * g2 * t2.A + cfg.pptWeight * pptPenaltyGradient(t2);
        adamStep(t1, gx, s1, train);
        RealMatrix xa = pack(t2.A);
        adamStep(xa, pack(ga), s2, train);
        t2.A = unpack(xa);
    }
    res.violation = res.penaltiesMet && res.compositionZeta1 < -train.solver.certTol;
    res.record.outcome = res.violation ? RunOutcome::Success : RunOutcome::Exhausted;
    return res;
}

} // namespace posmap
