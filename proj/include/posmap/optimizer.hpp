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

// optimizer.hpp: hinge losses built from the certificates, their
// subgradients with respect to the Choi parameters, Adam, and the
// training loop.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posmap/certificates.hpp"
#include "posmap/choi.hpp"

namespace posmap {

enum class LossMode { Main, Bound, PptSquare, DecomposableGen };

const char* toString(LossMode m);
LossMode lossModeFromString(const std::string& s);

struct LossConfig {
    double epsilon = 0.05;
    double gamma = 2.0;
    double delta = 0.01; // bound mode margin on ζ_k
    double omega = 1.0;  // weight of the ξ hinge
    double nu = 0.01;    // margin on ξ
    int k = 2;
    LossMode mode = LossMode::Main;

    void validate() const;
};

struct TrainConfig {
    double learningRate = 0.01;
    int maxEpochs = 2000;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adamEps = 1e-8;
    SolverOptions solver;

    void validate() const;
};

struct EpochRow {
    int epoch = 0;
    double loss = 0.0;
    double zeta1 = 0.0;
    double zetaK = 0.0;
    double xi = 0.0; // NaN when the loss does not use ξ
    double wallSeconds = 0.0;
};

enum class RunOutcome { Success, Exhausted, SolverFailed };

const char* toString(RunOutcome o);

struct RunRecord {
    std::vector<EpochRow> rows;
    RunOutcome outcome = RunOutcome::Exhausted;
    std::optional<int> successEpoch;
    ChoiMatrix finalChoi;
    std::uint64_t seed = 0;
    int degenerateEigenEpochs = 0; // epochs where the ξ subgradient was a choice
    std::string message;

    double totalSeconds() const { return rows.empty() ? 0.0 : rows.back().wallSeconds; }
};

/// max(0, x) with the convention that the hinge at exactly 0 is inactive.
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

struct XiResult {
    double traceMap = 0.0;  // Tr Φ = ⟨ψ|C|ψ⟩
    double minReal = 0.0;   // min Re over the transfer-matrix spectrum
    double value = 0.0;     // −Tr Φ + d·minReal + d² − d
    ComplexMatrix gradient; // Hermitian G with dξ = Re Tr(G dC)
    bool degenerate = false;
};

/// ξ(C) for a map on d×d matrices; ξ < 0 means the trace bound is violated.
/// Throws InputError if dIn != dOut.
XiResult xi(const ChoiMatrix& c, bool withGradient = true);

struct LossValue {
    double loss = 0.0;
    double zeta1 = 0.0;
    double zetaK = 0.0;
    double xi = 0.0;
    bool usesXi = false;
    bool degenerate = false;
    Certificate cert1;
    Certificate certK;
    ComplexMatrix xiGradient;
};

/// Arithmetic of the main loss: max(0, ε + ζ₁) + γ·max(0, −ζ_k).
double mainHinge(double zeta1, double zetaK, const LossConfig& cfg);
/// Bound loss: max(0, ε + ζ₁) + γ·max(0, δ − ζ_k) + ω·max(0, ν + ξ).
double boundHinge(double zeta1, double zetaK, double xiValue, const LossConfig& cfg);

/// Solves both certificates and evaluates the main loss. Throws SolverError
/// if a certificate is unusable.
LossValue lossMain(const ChoiMatrix& c, const LossConfig& cfg, const SolverOptions& opts = {});
/// Main loss plus the ξ hinge with ζ_k shifted by δ. Throws InputError for
/// non-square maps.
LossValue lossBound(const ChoiMatrix& c, const LossConfig& cfg, const SolverOptions& opts = {});

/// Hermitian G with dL = Re Tr(G dC), assembled from the active hinges.
ComplexMatrix lossGradientChoi(const LossValue& v, const LossConfig& cfg);

/// ∂L/∂X for a ChoiParams, from the Choi-level gradient.
RealMatrix subgradient(const ChoiParams& params, const LossValue& v, const LossConfig& cfg);

struct AdamState {
    RealMatrix m;
    RealMatrix v;
    int t = 0;
};

/// One bias-corrected Adam step on x. Entries with frozen(i,j) != 0 are
/// never touched.
void adamStep(RealMatrix& x, const RealMatrix& grad, AdamState& state, const TrainConfig& cfg,
              const RealMatrix* frozen = nullptr);

/// Adam on ChoiParams: masked and TP-dependent slots are frozen and the
/// parametrization is re-normalized afterwards.
void adamStep(ChoiParams& params, const RealMatrix& grad, AdamState& state, const TrainConfig& cfg);

/// 1 at masked and TP-dependent slots.
RealMatrix frozenSlots(const ChoiParams& params);

/// Runs Adam from `init` until the loss vanishes or maxEpochs is reached.
/// Epochs count from 1 and the certificates are evaluated before each
/// update, so an initial point that already has zero loss succeeds at 1.
RunRecord trainLoop(const ChoiParams& init, const LossConfig& lossCfg, const TrainConfig& trainCfg);

} // namespace posmap
