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

// campaigns.hpp: seeded batches of training runs, their statistics and
// artifacts, and validation of found maps.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "posmap/choi.hpp"
#include "posmap/io.hpp"
#include "posmap/optimizer.hpp"

namespace posmap {

struct CampaignSpec {
    std::string experiment = "campaign";
    int dIn = 3;
    int dOut = 3;
    int k = 2;
    int runs = 20;
    std::vector<double> epsilons{0.05};
    std::vector<double> gammas{2.0};
    LossConfig lossTemplate;   // epsilon/gamma overridden per cell
    TrainConfig trainTemplate; // seed overridden per run
    std::uint64_t baseSeed = 0;
    ChoiFlags flags;
    std::vector<std::optional<ChoiMask>> masks{std::nullopt};
    double initStd = 1.0;
    int jobs = 1;
    std::optional<std::filesystem::path> outDir; // artifacts under outDir/<experiment>/<seed>/

    void validate() const;
};

CampaignSpec campaignSpecFromJson(const io::Json& j);
io::Json campaignSpecToJson(const CampaignSpec& s);

struct CellSummary {
    int dIn = 0;
    int dOut = 0;
    int k = 0;
    double epsilon = 0.0;
    double gamma = 0.0;
    int maskIndex = 0;
    std::string extendSide;
    int runs = 0;
    int successes = 0;
    int solverFailures = 0;
    double successRate = 0.0; // percent
    double aseMean = 0.0;     // NaN without successes
    double aseStdDev = 0.0;
    double aseMedian = 0.0;
    double meanWallSeconds = 0.0;
    double ciLow = 0.0; // Wilson 95% interval, percent
    double ciHigh = 0.0;
};

struct CampaignSummary {
    std::string experiment;
    std::vector<CellSummary> cells;

    std::string toCsv() const;
};

struct CellRuns {
    double epsilon = 0.0;
    double gamma = 0.0;
    int maskIndex = 0;
    std::vector<RunRecord> records;
};

struct CampaignResult {
    CampaignSummary summary;
    std::vector<CellRuns> cells;
};

/// Wilson score interval for a binomial proportion, as fractions.
std::pair<double, double> wilsonInterval(int successes, int n, double z = 1.959963984540054);

CellSummary summarizeCell(const std::vector<RunRecord>& records);

/// Runs every (mask, ε, γ) cell with seeds baseSeed + 0..runs−1.
CampaignResult runCampaign(const CampaignSpec& spec);

/// Directory name used for a cell when the grid has more than one cell.
std::string cellTag(const CampaignSpec& spec, double epsilon, double gamma, int maskIndex);

struct ValidationConfig {
    int k = 2;
    double epsilon = 0.05;
    double certTol = 1e-7;
    double zeta1Slack = 1e-6;
    double probeTol = 1e-6;
    double tpTol = 1e-12;
    int probeSamples = 10000;
    int seesawIterations = 20;
    std::uint64_t probeSeed = 1;
    SolverOptions solver;
};

struct ValidationReport {
    double zeta1 = 0.0;
    double margin = 0.0; // −ζ₁
    double zetaK = 0.0;
    int k = 2;
    double lambdaMin = 0.0;
    double lambdaMinPT = 0.0; // partial transpose on the output factor
    double probeMin = 0.0;
    double tpResidual = 0.0;  // NaN unless the tp flag is set
    double maskResidual = 0.0; // max |C_pq| over masked entries, 0 without mask
    double maxAbsImag = 0.0;

    bool nonDecomposable = false;  // ζ₁ ≤ −ε + slack
    bool positiveRelaxation = false; // ζ_k ≥ −certTol
    bool notCP = false;
    bool notPPT = false;
    bool probeNonNegative = false;
    bool tpOk = true;
    bool maskOk = true;

    /// All of the above hold.
    bool passes() const;
    io::Json toJson() const;
};

ValidationReport validateFoundMap(const ChoiMatrix& c, const ValidationConfig& cfg,
                                  const std::optional<ChoiMask>& mask = std::nullopt);

/// Main-mode real campaign on 2⊗m. Rejects m < 4 because every positive
/// map on those dimensions is decomposable.
CampaignResult realMapCampaign(int m, int runs, const std::vector<std::optional<ChoiMask>>& masks,
                               const CampaignSpec& base);

struct PlotBundle {
    std::string lossTraces;  // experiment,epsilon,gamma,seed,epoch,loss
    std::string zetaTraces;  // experiment,epsilon,gamma,seed,epoch,zeta1,zetak
    std::string diagnostics; // per run: first ζ_k ≥ 0 epoch, last ζ₁ ≤ −ε epoch
};

PlotBundle exportPlotData(const std::string& experiment, const std::vector<CellRuns>& cells);
void writePlotData(const std::filesystem::path& dir, const PlotBundle& b);

/// Re-reads record.csv and config.json under dir/<seed>/ and recomputes the
/// cell summary.
CellSummary summarizeFromDisk(const std::filesystem::path& dir);

} // namespace posmap
