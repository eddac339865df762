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

#include "posmap/campaigns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "posmap/errors.hpp"
#include "posmap/tensor.hpp"

namespace posmap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) { return io::formatReal(x); }

std::vector<double> realList(const io::Json& j, const char* key, std::vector<double> dflt) {
    if (!j.contains(key)) return dflt;
    if (j[key].is_number()) return {j[key].get<double>()};
    return j[key].get<std::vector<double>>();
}

} // namespace

void CampaignSpec::validate() const {
    if (runs < 1) throw InputError("campaign run count must be at least 1");
    if (epsilons.empty() || gammas.empty() || masks.empty()) throw InputError("campaign grids must be non-empty");
    if (dIn < 1 || dOut < 1) throw InputError("campaign dimensions must be positive");
    if (jobs < 1) throw InputError("jobs must be at least 1");
    if (!(initStd > 0.0)) throw InputError("initStd must be positive");
    trainTemplate.validate();
    for (double e : epsilons)
        for (double g : gammas) {
            LossConfig lc = lossTemplate;
            lc.epsilon = e;
            lc.gamma = g;
            lc.k = k;
            lc.validate();
        }
    for (const auto& m : masks) {
        if (!m) continue;
        if (m->dIn() != dIn || m->dOut() != dOut) throw InputError("mask dimensions do not match the campaign");
        m->validate();
    }
}

CampaignSpec campaignSpecFromJson(const io::Json& j) {
    if (!j.is_object()) throw InputError("campaign spec must be a JSON object");
    try {
        CampaignSpec s;
        s.experiment = j.value("experiment", s.experiment);
        s.dIn = j.value("d_in", s.dIn);
        s.dOut = j.value("d_out", s.dOut);
        s.k = j.value("k", s.k);
        s.runs = j.value("runs", s.runs);
        s.epsilons = realList(j, "epsilon", s.epsilons);
        s.gammas = realList(j, "gamma", s.gammas);
        s.lossTemplate.mode = lossModeFromString(j.value("mode", std::string("main")));
        s.lossTemplate.delta = j.value("delta", s.lossTemplate.delta);
        s.lossTemplate.omega = j.value("omega", s.lossTemplate.omega);
        s.lossTemplate.nu = j.value("nu", s.lossTemplate.nu);
        s.trainTemplate.learningRate = j.value("learning_rate", s.trainTemplate.learningRate);
        s.trainTemplate.maxEpochs = j.value("max_epochs", s.trainTemplate.maxEpochs);
        s.trainTemplate.solver.extendSide =
            extendSideFromString(j.value("extend_side", std::string(toString(s.trainTemplate.solver.extendSide))));
        s.baseSeed = j.value("base_seed", s.baseSeed);
        s.flags.tp = j.value("tp", false);
        s.flags.real = j.value("real", false);
        s.initStd = j.value("init_std", s.initStd);
        s.jobs = j.value("jobs", s.jobs);
        if (j.contains("masks")) {
            s.masks.clear();
            for (const auto& m : j["masks"]) {
                if (m.is_null()) s.masks.emplace_back(std::nullopt);
                else if (m.is_string()) s.masks.emplace_back(io::readMaskFile(m.get<std::string>()));
                else s.masks.emplace_back(io::maskFromJson(m));
            }
        }
        if (j.contains("out_dir")) s.outDir = std::filesystem::path(j["out_dir"].get<std::string>());
        s.validate();
        return s;
    } catch (const io::Json::exception& e) {
        throw InputError(std::string("malformed campaign spec: ") + e.what());
    }
}

io::Json campaignSpecToJson(const CampaignSpec& s) {
    io::Json masks = io::Json::array();
    for (const auto& m : s.masks) masks.push_back(m ? io::maskToJson(*m) : io::Json(nullptr));
    io::Json j = {{"experiment", s.experiment},
                  {"d_in", s.dIn},
                  {"d_out", s.dOut},
                  {"k", s.k},
                  {"runs", s.runs},
                  {"epsilon", s.epsilons},
                  {"gamma", s.gammas},
                  {"mode", toString(s.lossTemplate.mode)},
                  {"delta", s.lossTemplate.delta},
                  {"omega", s.lossTemplate.omega},
                  {"nu", s.lossTemplate.nu},
                  {"learning_rate", s.trainTemplate.learningRate},
                  {"max_epochs", s.trainTemplate.maxEpochs},
                  {"extend_side", toString(s.trainTemplate.solver.extendSide)},
                  {"base_seed", s.baseSeed},
                  {"tp", s.flags.tp},
                  {"real", s.flags.real},
                  {"init_std", s.initStd},
                  {"jobs", s.jobs},
                  {"masks", masks}};
    if (s.outDir) j["out_dir"] = s.outDir->string();
    return j;
}

std::pair<double, double> wilsonInterval(int successes, int n, double z) {
    if (n <= 0) return {0.0, 1.0};
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

CellSummary summarizeCell(const std::vector<RunRecord>& records) {
    CellSummary c;
    c.runs = static_cast<int>(records.size());
    std::vector<double> epochs;
    double wall = 0.0;
    for (const auto& r : records) {
        if (r.outcome == RunOutcome::Success && r.successEpoch) epochs.push_back(*r.successEpoch);
        if (r.outcome == RunOutcome::SolverFailed) ++c.solverFailures;
        wall += r.totalSeconds();
    }
    c.successes = static_cast<int>(epochs.size());
    c.successRate = c.runs ? 100.0 * c.successes / c.runs : 0.0;
    c.meanWallSeconds = c.runs ? wall / c.runs : 0.0;
    const auto [lo, hi] = wilsonInterval(c.successes, c.runs);
    c.ciLow = 100.0 * lo;
    c.ciHigh = 100.0 * hi;
    if (epochs.empty()) {
        c.aseMean = c.aseStdDev = c.aseMedian = kNaN;
        return c;
    }
    double sum = 0.0;
    for (double e : epochs) sum += e;
    c.aseMean = sum / epochs.size();
    double ss = 0.0;
    for (double e : epochs) ss += (e - c.aseMean) * (e - c.aseMean);
    c.aseStdDev = epochs.size() > 1 ? std::sqrt(ss / (epochs.size() - 1)) : 0.0;
    std::sort(epochs.begin(), epochs.end());
    const std::size_t n = epochs.size();
    c.aseMedian = n % 2 ? epochs[n / 2] : 0.5 * (epochs[n / 2 - 1] + epochs[n / 2]);
    return c;
}

std::string CampaignSummary::toCsv() const {
    std::ostringstream os;
    os << "experiment,d,d_out,k,epsilon,gamma,mask,extend_side,runs,successes,success_rate,ase_mean,ase_std,"
          "ase_median,mean_wall_s,ci_low,ci_high,solver_failures\n";
    for (const auto& c : cells) {
        os << experiment << ',' << c.dIn << ',' << c.dOut << ',' << c.k << ',' << fmt(c.epsilon) << ',' << fmt(c.gamma)
           << ',' << c.maskIndex << ',' << c.extendSide << ',' << c.runs << ',' << c.successes << ','
           << fmt(c.successRate) << ',' << fmt(c.aseMean) << ',' << fmt(c.aseStdDev) << ',' << fmt(c.aseMedian) << ','
           << fmt(c.meanWallSeconds) << ',' << fmt(c.ciLow) << ',' << fmt(c.ciHigh) << ',' << c.solverFailures << '\n';
    }
    return os.str();
}

std::string cellTag(const CampaignSpec& spec, double epsilon, double gamma, int maskIndex) {
    const bool grid = spec.epsilons.size() * spec.gammas.size() * spec.masks.size() > 1;
    if (!grid) return spec.experiment;
    std::ostringstream os;
    os << spec.experiment << "_eps" << epsilon << "_gamma" << gamma;
    if (spec.masks.size() > 1) os << "_mask" << maskIndex;
    return os.str();
}

namespace {

void persistRun(const std::filesystem::path& dir, const RunRecord& r, const LossConfig& lc, const TrainConfig& tc,
                const CampaignSpec& spec, int maskIndex) {
    std::filesystem::create_directories(dir);
    io::writeRecordCsv(dir / "record.csv", r.rows);
    io::Json side = io::recordSidecar(r, lc, tc);
    side["d_in"] = spec.dIn;
    side["d_out"] = spec.dOut;
    side["flags"] = {{"tp", spec.flags.tp}, {"real", spec.flags.real}};
    side["mask_index"] = maskIndex;
    side["init_std"] = spec.initStd;
    if (spec.masks[static_cast<std::size_t>(maskIndex)]) {
        side["mask"] = io::maskToJson(*spec.masks[static_cast<std::size_t>(maskIndex)]);
    }
    io::writeJsonFile(dir / "config.json", side);
    if (r.finalChoi.dIn() > 0) io::writeChoiFile(dir / "choi.json", r.finalChoi);
}

RunRecord runOne(const CampaignSpec& spec, const LossConfig& lc, std::uint64_t seed, int maskIndex) {
    TrainConfig tc = spec.trainTemplate;
    tc.seed = seed;
    std::mt19937_64 rng(seed);
    const ChoiParams init = ChoiParams::random(spec.dIn, spec.dOut, spec.flags,
                                               spec.masks[static_cast<std::size_t>(maskIndex)], rng, spec.initStd);
    return trainLoop(init, lc, tc);
}

} // namespace

CampaignResult runCampaign(const CampaignSpec& spec) {
    spec.validate();
    struct Job {
        std::size_t cell;
        int run;
    };
    CampaignResult result;
    result.summary.experiment = spec.experiment;
    std::vector<LossConfig> cellLoss;
    for (std::size_t mi = 0; mi < spec.masks.size(); ++mi)
        for (double e : spec.epsilons)
            for (double g : spec.gammas) {
                CellRuns cr;
                cr.epsilon = e;
                cr.gamma = g;
                cr.maskIndex = static_cast<int>(mi);
                cr.records.resize(static_cast<std::size_t>(spec.runs));
                result.cells.push_back(std::move(cr));
                LossConfig lc = spec.lossTemplate;
                lc.epsilon = e;
                lc.gamma = g;
                lc.k = spec.k;
                cellLoss.push_back(lc);
            }
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        for (int r = 0; r < spec.runs; ++r) jobs.push_back({c, r});

    std::atomic<std::size_t> next{0};
    std::mutex errMutex;
    std::string firstError;
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const Job job = jobs[idx];
            CellRuns& cell = result.cells[job.cell];
            const std::uint64_t seed = spec.baseSeed + static_cast<std::uint64_t>(job.run);
            try {
                RunRecord r = runOne(spec, cellLoss[job.cell], seed, cell.maskIndex);
                if (spec.outDir) {
                    TrainConfig tc = spec.trainTemplate;
                    tc.seed = seed;
                    persistRun(*spec.outDir / cellTag(spec, cell.epsilon, cell.gamma, cell.maskIndex) /
                                   std::to_string(seed),
                               r, cellLoss[job.cell], tc, spec, cell.maskIndex);
                }
                cell.records[static_cast<std::size_t>(job.run)] = std::move(r);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(errMutex);
                if (firstError.empty()) firstError = e.what();
            }
        }
    };
    const int nThreads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
    if (nThreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nThreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!firstError.empty()) throw InputError("campaign run failed: " + firstError);

    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        CellSummary s = summarizeCell(result.cells[c].records);
        s.dIn = spec.dIn;
        s.dOut = spec.dOut;
        s.k = spec.k;
        s.epsilon = result.cells[c].epsilon;
        s.gamma = result.cells[c].gamma;
        s.maskIndex = result.cells[c].maskIndex;
        s.extendSide = toString(spec.trainTemplate.solver.extendSide);
        result.summary.cells.push_back(s);
    }
    if (spec.outDir) {
        std::filesystem::create_directories(*spec.outDir);
        std::ofstream(*spec.outDir / (spec.experiment + "_summary.csv")) << result.summary.toCsv();
        io::writeJsonFile(*spec.outDir / (spec.experiment + "_spec.json"), campaignSpecToJson(spec));
    }
    return result;
}

bool ValidationReport::passes() const {
    return nonDecomposable && positiveRelaxation && notCP && notPPT && probeNonNegative && tpOk && maskOk;
}

io::Json ValidationReport::toJson() const {
    auto num = [](double x) { return std::isfinite(x) ? io::Json(x) : io::Json(nullptr); };
    return {{"zeta1", num(zeta1)},
            {"margin", num(margin)},
            {"zetak", num(zetaK)},
            {"k", k},
            {"lambda_min", num(lambdaMin)},
            {"lambda_min_pt", num(lambdaMinPT)},
            {"probe_min", num(probeMin)},
            {"tp_residual", num(tpResidual)},
            {"mask_residual", num(maskResidual)},
            {"max_abs_imag", num(maxAbsImag)},
            {"non_decomposable", nonDecomposable},
            {"positive_relaxation", positiveRelaxation},
            {"not_cp", notCP},
            {"not_ppt", notPPT},
            {"probe_nonnegative", probeNonNegative},
            {"tp_ok", tpOk},
            {"mask_ok", maskOk},
            {"passes", passes()}};
}

ValidationReport validateFoundMap(const ChoiMatrix& c, const ValidationConfig& cfg, const std::optional<ChoiMask>& mask) {
    ValidationReport r;
    r.k = cfg.k;
    const Certificate z1 = zeta1(c, cfg.solver);
    const Certificate zk = zetaK(c, cfg.k, cfg.solver);
    if (!z1.usable() || !zk.usable()) throw SolverError("certificate solve failed during validation");
    r.zeta1 = z1.value;
    r.margin = -z1.value;
    r.zetaK = zk.value;
    r.lambdaMin = minEigenvalue(c.matrix());
    r.lambdaMinPT = minEigenvalue(partialTranspose(c.matrix(), c.dims(), {1}));
    r.probeMin = blockPositivityProbe(c, cfg.probeSamples, cfg.seesawIterations, cfg.probeSeed).minValue;
    r.tpResidual = c.flags().tp ? c.tpResidual() : kNaN;
    r.maxAbsImag = c.maxAbsImag();
    if (mask) {
        if (mask->dIn() != c.dIn() || mask->dOut() != c.dOut()) throw DimensionError("mask does not match the Choi matrix");
        for (int p = 0; p < mask->size(); ++p)
            for (int q = 0; q < mask->size(); ++q)
                if (!mask->keeps(p, q)) r.maskResidual = std::max(r.maskResidual, std::abs(c.matrix()(p, q)));
    }
    r.nonDecomposable = r.zeta1 <= -cfg.epsilon + cfg.zeta1Slack;
    r.positiveRelaxation = r.zetaK >= -cfg.certTol;
    r.notCP = r.lambdaMin < 0.0;
    r.notPPT = r.lambdaMinPT < 0.0;
    r.probeNonNegative = r.probeMin >= -cfg.probeTol;
    r.tpOk = !c.flags().tp || r.tpResidual <= cfg.tpTol;
    r.maskOk = r.maskResidual == 0.0;
    return r;
}

CampaignResult realMapCampaign(int m, int runs, const std::vector<std::optional<ChoiMask>>& masks,
                               const CampaignSpec& base) {
    if (m < 4) {
        throw InputError("real-map campaign needs m >= 4: every positive map on 2x" + std::to_string(m) +
                         " is decomposable, so no non-decomposable map exists there");
    }
    CampaignSpec spec = base;
    spec.dIn = 2;
    spec.dOut = m;
    spec.runs = runs;
    spec.flags.real = true;
    spec.masks = masks.empty() ? std::vector<std::optional<ChoiMask>>{std::nullopt} : masks;
    return runCampaign(spec);
}

PlotBundle exportPlotData(const std::string& experiment, const std::vector<CellRuns>& cells) {
    std::ostringstream loss, zeta, diag;
    loss << "experiment,epsilon,gamma,seed,epoch,loss\n";
    zeta << "experiment,epsilon,gamma,seed,epoch,zeta1,zetak\n";
    diag << "experiment,epsilon,gamma,seed,outcome,success_epoch,first_zetak_nonneg_epoch,last_zeta1_below_eps_epoch\n";
    for (const auto& cell : cells) {
        const std::string key = experiment + "," + fmt(cell.epsilon) + "," + fmt(cell.gamma) + ",";
        for (const auto& r : cell.records) {
            int firstK = -1, lastZ1 = -1;
            for (const auto& row : r.rows) {
                loss << key << r.seed << ',' << row.epoch << ',' << fmt(row.loss) << '\n';
                zeta << key << r.seed << ',' << row.epoch << ',' << fmt(row.zeta1) << ',' << fmt(row.zetaK) << '\n';
                if (firstK < 0 && row.zetaK >= 0.0) firstK = row.epoch;
                if (row.zeta1 <= -cell.epsilon) lastZ1 = row.epoch;
            }
            diag << key << r.seed << ',' << toString(r.outcome) << ',' << (r.successEpoch ? std::to_string(*r.successEpoch) : "")
                 << ',' << (firstK >= 0 ? std::to_string(firstK) : "") << ',' << (lastZ1 >= 0 ? std::to_string(lastZ1) : "")
                 << '\n';
        }
    }
    return {loss.str(), zeta.str(), diag.str()};
}

void writePlotData(const std::filesystem::path& dir, const PlotBundle& b) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "loss_traces.csv") << b.lossTraces;
    std::ofstream(dir / "zeta_traces.csv") << b.zetaTraces;
    std::ofstream(dir / "diagnostics.csv") << b.diagnostics;
}

CellSummary summarizeFromDisk(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> runDirs;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_directory() && std::filesystem::exists(e.path() / "config.json")) runDirs.push_back(e.path());
    }
    std::sort(runDirs.begin(), runDirs.end());
    std::vector<RunRecord> records;
    CellSummary meta;
    for (const auto& rd : runDirs) {
        const io::Json cfg = io::readJsonFile(rd / "config.json");
        RunRecord r;
        r.rows = io::readRecordCsv(rd / "record.csv");
        const std::string outcome = cfg.value("outcome", std::string("exhausted"));
        r.outcome = outcome == "success" ? RunOutcome::Success
                                         : (outcome == "solverFailed" ? RunOutcome::SolverFailed : RunOutcome::Exhausted);
        if (cfg.contains("success_epoch") && !cfg["success_epoch"].is_null()) r.successEpoch = cfg["success_epoch"].get<int>();
        r.seed = cfg.value("seed", std::uint64_t{0});
        records.push_back(std::move(r));
        meta.dIn = cfg.value("d_in", 0);
        meta.dOut = cfg.value("d_out", 0);
        meta.k = cfg["loss"].value("k", 0);
        meta.epsilon = cfg["loss"].value("epsilon", 0.0);
        meta.gamma = cfg["loss"].value("gamma", 0.0);
        meta.maskIndex = cfg.value("mask_index", 0);
        meta.extendSide = cfg["train"]["solver"].value("extend_side", std::string());
    }
    CellSummary s = summarizeCell(records);
    s.dIn = meta.dIn;
    s.dOut = meta.dOut;
    s.k = meta.k;
    s.epsilon = meta.epsilon;
    s.gamma = meta.gamma;
    s.maskIndex = meta.maskIndex;
    s.extendSide = meta.extendSide;
    return s;
}

} // namespace posmap
