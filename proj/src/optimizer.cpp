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

#include "posmap/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "posmap/errors.hpp"

namespace posmap {

const char* toString(LossMode m) {
    switch (m) {
        case LossMode::Main: return "main";
        case LossMode::Bound: return "bound";
        case LossMode::PptSquare: return "pptSquare";
        case LossMode::DecomposableGen: return "decomposableGen";
    }
    return "main";
}

LossMode lossModeFromString(const std::string& s) {
    if (s == "main") return LossMode::Main;
    if (s == "bound") return LossMode::Bound;
    if (s == "pptSquare") return LossMode::PptSquare;
    if (s == "decomposableGen") return LossMode::DecomposableGen;
    throw InputError("unknown loss mode '" + s + "'");
}

const char* toString(RunOutcome o) {
    switch (o) {
        case RunOutcome::Success: return "success";
        case RunOutcome::Exhausted: return "exhausted";
        case RunOutcome::SolverFailed: return "solverFailed";
    }
    return "exhausted";
}

void LossConfig::validate() const {
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    if (!(delta >= 0.0) || !(omega >= 0.0) || !(nu >= 0.0)) throw InputError("delta, omega and nu must be nonnegative");
    if (k < 2) throw InputError("hierarchy level k must be at least 2");
}

void TrainConfig::validate() const {
    if (!(learningRate > 0.0)) throw InputError("learning rate must be positive");
    if (maxEpochs < 1) throw InputError("maxEpochs must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw InputError("Adam betas must lie in [0,1)");
    if (!(adamEps > 0.0)) throw InputError("adamEps must be positive");
}

XiResult xi(const ChoiMatrix& c, bool withGradient) {
    if (c.dIn() != c.dOut()) throw InputError("xi requires a map with equal input and output dimension");
    const int d = c.dIn();
    XiResult r;
    const ComplexVector psi = maxEntVector(d);
    r.traceMap = (psi.adjoint() * c.matrix() * psi)(0, 0).real();
    const GeneralEigen eg = eigGeneral(reshuffle(c.matrix(), d, d));
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < eg.values.size(); ++i) {
        if (eg.values(i).real() < eg.values(best).real()) best = i;
    }
    const Complex lam = eg.values(best);
    r.minReal = lam.real();
    r.value = -r.traceMap + d * r.minReal + static_cast<double>(d * d - d);

    // A conjugate partner shares the real part and the same Re-derivative.
    int near = 0;
    bool partner = false;
    for (Eigen::Index i = 0; i < eg.values.size(); ++i) {
        if (i == best || std::abs(eg.values(i).real() - lam.real()) >= 1e-9) continue;
        ++near;
        if (std::abs(lam.imag()) > 1e-9 && std::abs(eg.values(i) - std::conj(lam)) < 1e-7) partner = true;
    }
    r.degenerate = near > 1 || (near == 1 && !partner);

    if (withGradient) {
        const ComplexVector v = eg.right.col(best);
        const ComplexVector u = eg.left.col(best);
        const Complex uv = u.dot(v);
        const ComplexMatrix w = (v * u.adjoint()) / uv;
        ComplexMatrix glam = unreshuffle(w.transpose(), d, d).transpose();
        glam = ((glam + glam.adjoint()) * 0.5).eval();
        r.gradient = -psi * psi.adjoint() + static_cast<double>(d) * glam;
    }
    return r;
}

double mainHinge(double zeta1, double zetaK, const LossConfig& cfg) {
    return relu(cfg.epsilon + zeta1) + cfg.gamma * relu(-zetaK);
}

double boundHinge(double zeta1, double zetaK, double xiValue, const LossConfig& cfg) {
    return relu(cfg.epsilon + zeta1) + cfg.gamma * relu(cfg.delta - zetaK) + cfg.omega * relu(cfg.nu + xiValue);
}

namespace {

void solveBoth(const ChoiMatrix& c, const LossConfig& cfg, const SolverOptions& opts, LossValue& v) {
    v.cert1 = zeta1(c, opts);
    if (!v.cert1.usable()) throw SolverError("zeta1 solve failed");
    v.certK = zetaK(c, cfg.k, opts);
    if (!v.certK.usable()) throw SolverError("zetaK solve failed");
    v.zeta1 = v.cert1.value;
    v.zetaK = v.certK.value;
}

} // namespace

LossValue lossMain(const ChoiMatrix& c, const LossConfig& cfg, const SolverOptions& opts) {
    LossValue v;
    solveBoth(c, cfg, opts, v);
    v.xi = std::numeric_limits<double>::quiet_NaN();
    v.loss = mainHinge(v.zeta1, v.zetaK, cfg);
    return v;
}

LossValue lossBound(const ChoiMatrix& c, const LossConfig& cfg, const SolverOptions& opts) {
    if (c.dIn() != c.dOut()) throw InputError("bound loss requires a map with equal input and output dimension");
    LossValue v;
    solveBoth(c, cfg, opts, v);
    const XiResult x = xi(c, true);
    v.usesXi = true;
    v.xi = x.value;
    v.degenerate = x.degenerate;
    v.xiGradient = x.gradient;
    v.loss = boundHinge(v.zeta1, v.zetaK, v.xi, cfg);
    return v;
}

ComplexMatrix lossGradientChoi(const LossValue& v, const LossConfig& cfg) {
    const Eigen::Index n = v.cert1.witness.dim();
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    if (cfg.epsilon + v.zeta1 > 0.0) g += v.cert1.witness.matrix();
    const double kMargin = v.usesXi ? cfg.delta : 0.0;
    if (kMargin - v.zetaK > 0.0) g -= cfg.gamma * v.certK.witness.matrix();
    if (v.usesXi && cfg.nu + v.xi > 0.0) g += cfg.omega * v.xiGradient;
    return g;
}

RealMatrix subgradient(const ChoiParams& params, const LossValue& v, const LossConfig& cfg) {
    return choiParamGradient(params, lossGradientChoi(v, cfg));
}

void adamStep(RealMatrix& x, const RealMatrix& grad, AdamState& state, const TrainConfig& cfg,
              const RealMatrix* frozen) {
    if (grad.rows() != x.rows() || grad.cols() != x.cols()) throw DimensionError("adamStep: gradient shape mismatch");
    if (frozen && (frozen->rows() != x.rows() || frozen->cols() != x.cols())) {
        throw DimensionError("adamStep: frozen mask shape mismatch");
    }
    if (state.t == 0) {
        state.m = RealMatrix::Zero(x.rows(), x.cols());
        state.v = RealMatrix::Zero(x.rows(), x.cols());
    }
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, state.t);
    const double c2 = 1.0 - std::pow(cfg.beta2, state.t);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (frozen && (*frozen)(i, j) != 0.0) continue;
            const double g = grad(i, j);
            state.m(i, j) = cfg.beta1 * state.m(i, j) + (1.0 - cfg.beta1) * g;
            state.v(i, j) = cfg.beta2 * state.v(i, j) + (1.0 - cfg.beta2) * g * g;
            const double mh = state.m(i, j) / c1;
            const double vh = state.v(i, j) / c2;
            x(i, j) -= cfg.learningRate * mh / (std::sqrt(vh) + cfg.adamEps);
        }
    }
}

RealMatrix frozenSlots(const ChoiParams& params) {
    const int n = params.size();
    RealMatrix f = RealMatrix::Zero(n, n);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if ((params.mask && !params.mask->keeps(p, q)) || params.isDependentSlot(p, q)) f(p, q) = 1.0;
        }
    }
    return f;
}

void adamStep(ChoiParams& params, const RealMatrix& grad, AdamState& state, const TrainConfig& cfg) {
    const RealMatrix frozen = frozenSlots(params);
    adamStep(params.X, grad, state, cfg, &frozen);
    params.normalize();
}

RunRecord trainLoop(const ChoiParams& init, const LossConfig& lossCfg, const TrainConfig& trainCfg) {
    lossCfg.validate();
    trainCfg.validate();
    init.validate();
    if (lossCfg.mode != LossMode::Main && lossCfg.mode != LossMode::Bound) {
        throw InputError("trainLoop handles the main and bound losses only");
    }
    ChoiParams params = init;
    params.normalize();
    AdamState adam;
    RunRecord rec;
    rec.seed = trainCfg.seed;
    const auto start = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= trainCfg.maxEpochs; ++epoch) {
        const ChoiMatrix c = buildChoi(params);
        rec.finalChoi = c;
        LossValue v;
        try {
            v = lossCfg.mode == LossMode::Main ? lossMain(c, lossCfg, trainCfg.solver)
                                               : lossBound(c, lossCfg, trainCfg.solver);
        } catch (const SolverError& e) {
            rec.outcome = RunOutcome::SolverFailed;
            rec.message = e.what();
            return rec;
        }
        if (v.degenerate) ++rec.degenerateEigenEpochs;
        EpochRow row;
        row.epoch = epoch;
        row.loss = v.loss;
        row.zeta1 = v.zeta1;
        row.zetaK = v.zetaK;
        row.xi = v.xi;
        row.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.rows.push_back(row);
        if (v.loss == 0.0) {
            rec.outcome = RunOutcome::Success;
            rec.successEpoch = epoch;
            return rec;
        }
        adamStep(params, subgradient(params, v, lossCfg), adam, trainCfg);
    }
    rec.outcome = RunOutcome::Exhausted;
    return rec;
}

} // namespace posmap
