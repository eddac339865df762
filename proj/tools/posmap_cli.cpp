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

// posmap command-line front end.

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>

#include "posmap/campaigns.hpp"
#include "posmap/certificates.hpp"
#include "posmap/choi.hpp"
#include "posmap/errors.hpp"
#include "posmap/generators.hpp"
#include "posmap/io.hpp"
#include "posmap/optimizer.hpp"
#include "posmap/version.hpp"

namespace fs = std::filesystem;
using posmap::io::Json;

namespace {

enum Exit { kOk = 0, kInput = 1, kExhausted = 2, kSolver = 3 };

struct Global {
    std::string format = "text";
    int jobs = 1;
    bool json() const { return format == "json"; }
};

std::string configHash(const Json& cfg) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(cfg.dump());
    return os.str();
}

Json header(const std::string& command, std::uint64_t seed, const Json& cfg) {
    return {{"tool", "posmap"}, {"version", posmap::kVersion}, {"command", command}, {"seed", seed},
            {"config_hash", configHash(cfg)}};
}

void printHeader(const Global& g, const Json& h) {
    if (g.json()) return;
    std::cout << "# posmap " << h["version"].get<std::string>() << " command=" << h["command"].get<std::string>()
              << " seed=" << h["seed"].get<std::uint64_t>() << " config=" << h["config_hash"].get<std::string>() << '\n';
}

void emit(const Global& g, const Json& h, Json body) {
    if (!g.json()) return;
    body["header"] = h;
    std::cout << body.dump(2) << '\n';
}

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

/// Accepts "re", "re+imj", "re-imj", "imj".
posmap::Complex parseComplex(const std::string& s) {
    static const std::regex full(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*j)?\s*$)");
    static const std::regex imag(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*j\s*$)");
    std::smatch m;
    if (std::regex_match(s, m, full)) {
        const double re = std::stod(m[1]);
        double im = 0.0;
        if (m[2].matched) {
            im = m[3].matched ? std::stod(m[3]) : 1.0;
            if (m[2] == "-") im = -im;
        }
        return {re, im};
    }
    if (std::regex_match(s, m, imag)) {
        if (!m[1].matched || m[1] == "+") return {0.0, 1.0};
        if (m[1] == "-") return {0.0, -1.0};
        return {0.0, std::stod(m[1])};
    }
    throw posmap::InputError("cannot parse complex value '" + s + "' (use re or re+imj)");
}

posmap::ValidationConfig validationFrom(int k, double eps, int samples, int seesaw) {
    posmap::ValidationConfig vc;
    vc.k = k;
    vc.epsilon = eps;
    vc.probeSamples = samples;
    vc.seesawIterations = seesaw;
    return vc;
}

void printReport(const Global& g, const Json& h, const posmap::ValidationReport& r, bool full) {
    if (g.json()) {
        emit(g, h, {{"report", r.toJson()}});
        return;
    }
    std::cout << "zeta1            " << num(r.zeta1) << '\n'
              << "zeta" << r.k << "            " << num(r.zetaK) << '\n'
              << "lambda_min(C)    " << num(r.lambdaMin) << '\n'
              << "lambda_min(C^TB) " << num(r.lambdaMinPT) << '\n'
              << "probe_min        " << num(r.probeMin) << '\n';
    if (full) {
        std::cout << "tp_residual      " << num(r.tpResidual) << '\n'
                  << "mask_residual    " << num(r.maskResidual) << '\n'
                  << "max_abs_imag     " << num(r.maxAbsImag) << '\n'
                  << "non_decomposable " << (r.nonDecomposable ? "yes" : "no") << '\n'
                  << "positive (k)     " << (r.positiveRelaxation ? "yes" : "no") << '\n'
                  << "verdict          " << (r.passes() ? "PASS" : "FAIL") << '\n';
    }
}

int writeRunArtifacts(const fs::path& out, const posmap::RunRecord& r, const posmap::LossConfig& lc,
                      const posmap::TrainConfig& tc, const Json& extra) {
    fs::create_directories(out);
    posmap::io::writeRecordCsv(out / "record.csv", r.rows);
    Json side = posmap::io::recordSidecar(r, lc, tc);
    for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
    posmap::io::writeJsonFile(out / "config.json", side);
    if (r.finalChoi.dIn() > 0) posmap::io::writeChoiFile(out / "choi.json", r.finalChoi);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"posmap: generate and certify positive non-decomposable maps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(posmap::kVersion));
    Global g;
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    app.add_option("--jobs", g.jobs, "Concurrent runs for campaign commands")->check(CLI::PositiveNumber)->capture_default_str();

    // generate
    auto* gen = app.add_subcommand("generate", "Train a Choi matrix until both certificates hold");
    int gd = 3, gdOut = 3, gk = 2, gEpochs = 2000;
    double gEps = 0.05, gGamma = 2.0, gLr = 0.01, gInit = 1.0, gDelta = 0.01, gOmega = 1.0, gNu = 0.01;
    std::uint64_t gSeed = 0;
    bool gTp = false, gReal = false;
    std::string gMask, gOut = "runs/generate", gMode = "main", gSide = "second";
    gen->add_option("--d", gd, "Input dimension")->capture_default_str();
    gen->add_option("--d-out", gdOut, "Output dimension")->capture_default_str();
    gen->add_option("--k", gk, "Extension level of the positivity certificate")->capture_default_str();
    gen->add_option("--epsilon", gEps, "Margin for zeta1")->capture_default_str();
    gen->add_option("--gamma", gGamma, "Weight of the positivity hinge")->capture_default_str();
    gen->add_option("--lr", gLr, "Adam learning rate")->capture_default_str();
    gen->add_option("--epochs", gEpochs, "Maximum number of epochs")->capture_default_str();
    gen->add_option("--seed", gSeed, "Random seed")->capture_default_str();
    gen->add_flag("--tp", gTp, "Impose trace preservation");
    gen->add_flag("--real", gReal, "Restrict to real Choi matrices");
    gen->add_option("--mask", gMask, "Mask JSON file");
    gen->add_option("--out", gOut, "Artifact directory")->capture_default_str();
    gen->add_option("--init-std", gInit, "Standard deviation of the initial parameters")->capture_default_str();
    gen->add_option("--mode", gMode, "Loss: main or bound")->check(CLI::IsMember({"main", "bound"}))->capture_default_str();
    gen->add_option("--delta", gDelta, "Bound mode margin on zeta_k")->capture_default_str();
    gen->add_option("--omega", gOmega, "Bound mode weight of the xi hinge")->capture_default_str();
    gen->add_option("--nu", gNu, "Bound mode margin on xi")->capture_default_str();
    gen->add_option("--extend-side", gSide, "Extended factor: first, second or auto")
        ->check(CLI::IsMember({"first", "second", "auto"}))
        ->capture_default_str();

    // certify / validate
    auto* cert = app.add_subcommand("certify", "Print certificates and spectral data of a Choi file");
    auto* val = app.add_subcommand("validate", "Validate a found map (Choi file or run directory)");
    std::string cPath, vPath;
    int ck = 2, cSamples = 10000, cSeesaw = 20, vk = 2, vSamples = 10000, vSeesaw = 20;
    double vEps = 0.05;
    cert->add_option("path", cPath, "Choi JSON file")->required();
    cert->add_option("--k", ck, "Extension level")->capture_default_str();
    cert->add_option("--probe-samples", cSamples, "Random starts of the block-positivity probe")->capture_default_str();
    cert->add_option("--seesaw", cSeesaw, "See-saw refinements per start")->capture_default_str();
    val->add_option("path", vPath, "Choi JSON file or run directory")->required();
    val->add_option("--k", vk, "Extension level")->capture_default_str();
    val->add_option("--epsilon", vEps, "Required zeta1 margin")->capture_default_str();
    val->add_option("--probe-samples", vSamples, "Random starts of the block-positivity probe")->capture_default_str();
    val->add_option("--seesaw", vSeesaw, "See-saw refinements per start")->capture_default_str();

    // family
    auto* fam = app.add_subcommand("family", "Write the masked 3x3 family Choi matrix");
    double fa = 1.0, fb = 0.0, fc = 0.0;
    std::string fw = "0", fz = "0", fOut = "family.json";
    fam->add_option("--a", fa, "Diagonal a")->capture_default_str();
    fam->add_option("--b", fb, "Diagonal b")->capture_default_str();
    fam->add_option("--c", fc, "Diagonal c")->capture_default_str();
    fam->add_option("--w", fw, "Off-diagonal w (re or re+imj)")->capture_default_str();
    fam->add_option("--z", fz, "Off-diagonal z (re or re+imj)")->capture_default_str();
    fam->add_option("--out", fOut, "Output Choi JSON")->capture_default_str();

    // bound
    auto* bnd = app.add_subcommand("bound", "Check the trace bound Tr Phi <= d min Re spec(Phi) + d^2 - d");
    std::string bPath;
    double bTol = 1e-9;
    bnd->add_option("path", bPath, "Choi JSON file")->required();
    bnd->add_option("--tol", bTol, "xi below -tol counts as a violation")->capture_default_str();

    // compose
    auto* cmp = app.add_subcommand("compose", "Choi matrix of T1 o T2 (T2 applied first)");
    std::string p1, p2, cmpOut = "compose.json";
    cmp->add_option("t1", p1, "Choi JSON of T1")->required();
    cmp->add_option("t2", p2, "Choi JSON of T2")->required();
    cmp->add_option("--out", cmpOut, "Output Choi JSON")->capture_default_str();

    // decomposable
    auto* dec = app.add_subcommand("decomposable", "Train a decomposable map that is not CP");
    int dd = 3, dAnc = 0, dEpochs = 500;
    double dLr = 0.01, dInit = 1.0;
    std::uint64_t dSeed = 0;
    std::string dOut = "runs/decomposable";
    dec->add_option("--d", dd, "System dimension")->capture_default_str();
    dec->add_option("--ancilla", dAnc, "Ancilla dimension (0 means d)")->capture_default_str();
    dec->add_option("--epochs", dEpochs, "Maximum number of epochs")->capture_default_str();
    dec->add_option("--lr", dLr, "Adam learning rate")->capture_default_str();
    dec->add_option("--init-std", dInit, "Standard deviation of the generators")->capture_default_str();
    dec->add_option("--seed", dSeed, "Random seed")->capture_default_str();
    dec->add_option("--out", dOut, "Artifact directory")->capture_default_str();

    // pptsq
    auto* pps = app.add_subcommand("pptsq", "Search for a positive T1 and PPT T2 with non-decomposable T1 o T2");
    int pOuter = 2, pInner = 4, pk = 2, pEpochs = 200, pRepair = 500, pRuns = 1;
    double pEps = 0.05, pGamma = 2.0, pLr = 0.01, pWeight = 10.0;
    std::uint64_t pSeed = 0;
    std::string pOut = "runs/pptsq", pSide = "auto";
    pps->add_option("--outer", pOuter, "Dimension of T1's input and T2's output")->capture_default_str();
    pps->add_option("--inner", pInner, "Dimension of T1's output and T2's input")->capture_default_str();
    pps->add_option("--k", pk, "Extension level for T1's positivity")->capture_default_str();
    pps->add_option("--epochs", pEpochs, "Epochs of the joint phase")->capture_default_str();
    pps->add_option("--repair-epochs", pRepair, "Epochs allowed to restore the penalties")->capture_default_str();
    pps->add_option("--runs", pRuns, "Number of seeds")->capture_default_str();
    pps->add_option("--epsilon", pEps, "Margin for zeta1 of the composition")->capture_default_str();
    pps->add_option("--gamma", pGamma, "Weight of T1's positivity hinge")->capture_default_str();
    pps->add_option("--ppt-weight", pWeight, "Weight of T2's PPT penalty")->capture_default_str();
    pps->add_option("--lr", pLr, "Adam learning rate")->capture_default_str();
    pps->add_option("--seed", pSeed, "Base seed")->capture_default_str();
    pps->add_option("--extend-side", pSide, "Extended factor of T1: first, second or auto")
        ->check(CLI::IsMember({"first", "second", "auto"}))
        ->capture_default_str();
    pps->add_option("--out", pOut, "Artifact directory")->capture_default_str();

    // sweep
    auto* swp = app.add_subcommand("sweep", "Run a campaign described by a JSON spec");
    std::string sPath, sOut = "runs";
    swp->add_option("spec", sPath, "Campaign spec JSON")->required();
    swp->add_option("--out", sOut, "Artifact root")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    try {
        if (*gen) {
            posmap::LossConfig lc;
            lc.epsilon = gEps;
            lc.gamma = gGamma;
            lc.k = gk;
            lc.delta = gDelta;
            lc.omega = gOmega;
            lc.nu = gNu;
            lc.mode = posmap::lossModeFromString(gMode);
            posmap::TrainConfig tc;
            tc.learningRate = gLr;
            tc.maxEpochs = gEpochs;
            tc.seed = gSeed;
            tc.solver.extendSide = posmap::extendSideFromString(gSide);
            if (gd < 1 || gdOut < 1) throw posmap::InputError("dimensions must be positive");
            std::optional<posmap::ChoiMask> mask;
            if (!gMask.empty()) mask = posmap::io::readMaskFile(gMask);
            const Json cfg = {{"loss", posmap::io::lossConfigToJson(lc)},
                              {"train", posmap::io::trainConfigToJson(tc)},
                              {"d_in", gd},
                              {"d_out", gdOut},
                              {"tp", gTp},
                              {"real", gReal},
                              {"init_std", gInit},
                              {"mask", gMask}};
            const Json h = header("generate", gSeed, cfg);
            printHeader(g, h);
            std::mt19937_64 rng(gSeed);
            const auto init = posmap::ChoiParams::random(gd, gdOut, {gTp, gReal}, mask, rng, gInit);
            const auto rec = posmap::trainLoop(init, lc, tc);
            Json extra = {{"d_in", gd}, {"d_out", gdOut}, {"flags", {{"tp", gTp}, {"real", gReal}}}, {"init_std", gInit}};
            if (mask) extra["mask"] = posmap::io::maskToJson(*mask);
            writeRunArtifacts(gOut, rec, lc, tc, extra);
            const auto& last = rec.rows.back();
            if (g.json()) {
                emit(g, h,
                     {{"outcome", posmap::toString(rec.outcome)},
                      {"success_epoch", rec.successEpoch ? Json(*rec.successEpoch) : Json(nullptr)},
                      {"epochs", rec.rows.size()},
                      {"zeta1", jnum(last.zeta1)},
                      {"zetak", jnum(last.zetaK)},
                      {"loss", jnum(last.loss)},
                      {"out", gOut}});
            } else {
                std::cout << "outcome " << posmap::toString(rec.outcome) << " epochs " << rec.rows.size() << " zeta1 "
                          << num(last.zeta1) << " zeta" << gk << ' ' << num(last.zetaK) << " -> " << gOut << '\n';
            }
            if (rec.outcome == posmap::RunOutcome::Success) return kOk;
            return rec.outcome == posmap::RunOutcome::Exhausted ? kExhausted : kSolver;
        }
        if (*cert) {
            const auto c = posmap::io::readChoiFile(cPath);
            const Json h = header("certify", 0, {{"path", cPath}, {"k", ck}});
            printHeader(g, h);
            const auto r = posmap::validateFoundMap(c, validationFrom(ck, 0.0, cSamples, cSeesaw));
            printReport(g, h, r, false);
            return kOk;
        }
        if (*val) {
            fs::path choiPath = vPath;
            std::optional<posmap::ChoiMask> mask;
            int k = vk;
            double eps = vEps;
            if (fs::is_directory(choiPath)) {
                const fs::path cfgPath = choiPath / "config.json";
                if (fs::exists(cfgPath)) {
                    const Json cfg = posmap::io::readJsonFile(cfgPath);
                    if (cfg.contains("loss")) {
                        k = cfg["loss"].value("k", k);
                        eps = cfg["loss"].value("epsilon", eps);
                    }
                    if (cfg.contains("mask") && cfg["mask"].is_object()) mask = posmap::io::maskFromJson(cfg["mask"]);
                }
                choiPath /= "choi.json";
            }
            const auto c = posmap::io::readChoiFile(choiPath);
            const Json h = header("validate", 0, {{"path", vPath}, {"k", k}, {"epsilon", eps}});
            printHeader(g, h);
            const auto r = posmap::validateFoundMap(c, validationFrom(k, eps, vSamples, vSeesaw), mask);
            printReport(g, h, r, true);
            return kOk;
        }
        if (*fam) {
            posmap::FamilyParams fp{fa, fb, fc, parseComplex(fw), parseComplex(fz)};
            const auto c = posmap::familyChoi(fp);
            posmap::io::writeChoiFile(fOut, c);
            const Json h = header("family", 0, {{"a", fa}, {"b", fb}, {"c", fc}, {"w", fw}, {"z", fz}});
            printHeader(g, h);
            if (g.json()) emit(g, h, {{"out", fOut}});
            else std::cout << "wrote " << fOut << '\n';
            return kOk;
        }
        if (*bnd) {
            const auto c = posmap::io::readChoiFile(bPath);
            const Json h = header("bound", 0, {{"path", bPath}});
            printHeader(g, h);
            const auto x = posmap::xi(c, false);
            const bool violated = x.value < -bTol;
            if (g.json()) {
                emit(g, h,
                     {{"trace_phi", x.traceMap},
                      {"min_re_spectrum", x.minReal},
                      {"xi", x.value},
                      {"verdict", violated ? "VIOLATED" : "SATISFIED"}});
            } else {
                std::cout << "trace_phi        " << num(x.traceMap) << '\n'
                          << "min_re_spectrum  " << num(x.minReal) << '\n'
                          << "xi               " << num(x.value) << '\n'
                          << (violated ? "VIOLATED" : "SATISFIED") << '\n';
            }
            return kOk;
        }
        if (*cmp) {
            const auto c = posmap::composeChoi(posmap::io::readChoiFile(p1), posmap::io::readChoiFile(p2));
            posmap::io::writeChoiFile(cmpOut, c);
            const Json h = header("compose", 0, {{"t1", p1}, {"t2", p2}});
            printHeader(g, h);
            if (g.json()) emit(g, h, {{"out", cmpOut}, {"d_in", c.dIn()}, {"d_out", c.dOut()}});
            else std::cout << "wrote " << cmpOut << " (" << c.dIn() << " -> " << c.dOut() << ")\n";
            return kOk;
        }
        if (*dec) {
            posmap::DecomposableGenConfig gc;
            gc.systemDim = dd;
            gc.ancillaDim = dAnc;
            gc.initScale = dInit;
            posmap::TrainConfig tc;
            tc.learningRate = dLr;
            tc.maxEpochs = dEpochs;
            tc.seed = dSeed;
            if (dd < 1 || dAnc < 0) throw posmap::InputError("dimensions must be positive");
            const Json cfg = {{"d", dd}, {"ancilla", dAnc}, {"train", posmap::io::trainConfigToJson(tc)}, {"init_std", dInit}};
            const Json h = header("decomposable", dSeed, cfg);
            printHeader(g, h);
            const auto run = posmap::trainNonCPDecomposable(gc, tc);
            posmap::LossConfig lc;
            lc.mode = posmap::LossMode::DecomposableGen;
            writeRunArtifacts(dOut, run.record, lc, tc, {{"p", run.spec.p()}, {"d", dd}});
            const double lmin = posmap::minEigenvalue(run.record.finalChoi.matrix());
            if (g.json()) {
                emit(g, h,
                     {{"outcome", posmap::toString(run.record.outcome)},
                      {"epochs", run.record.rows.size()},
                      {"lambda_min", lmin},
                      {"p", run.spec.p()},
                      {"tp_residual", run.record.finalChoi.tpResidual()},
                      {"out", dOut}});
            } else {
                std::cout << "outcome " << posmap::toString(run.record.outcome) << " epochs " << run.record.rows.size()
                          << " lambda_min " << num(lmin) << " p " << num(run.spec.p()) << " -> " << dOut << '\n';
            }
            return run.record.outcome == posmap::RunOutcome::Success ? kOk : kExhausted;
        }
        if (*pps) {
            posmap::PptSquareConfig pc;
            pc.dimOuter = pOuter;
            pc.dimInner = pInner;
            pc.pptWeight = pWeight;
            pc.repairEpochs = pRepair;
            posmap::LossConfig lc;
            lc.epsilon = pEps;
            lc.gamma = pGamma;
            lc.k = pk;
            lc.mode = posmap::LossMode::PptSquare;
            posmap::TrainConfig tc;
            tc.learningRate = pLr;
            tc.maxEpochs = pEpochs;
            tc.solver.extendSide = posmap::extendSideFromString(pSide);
            if (pRuns < 1) throw posmap::InputError("runs must be at least 1");
            const Json cfg = {{"outer", pOuter}, {"inner", pInner}, {"loss", posmap::io::lossConfigToJson(lc)},
                              {"train", posmap::io::trainConfigToJson(tc)}, {"ppt_weight", pWeight}, {"runs", pRuns}};
            const Json h = header("pptsq", pSeed, cfg);
            printHeader(g, h);
            Json runs = Json::array();
            bool failed = false;
            for (int r = 0; r < pRuns; ++r) {
                tc.seed = pSeed + static_cast<std::uint64_t>(r);
                const auto res = posmap::pptSquareRun(pc, tc, lc);
                const fs::path dir = fs::path(pOut) / std::to_string(tc.seed);
                writeRunArtifacts(dir, res.record, lc, tc,
                                  {{"composition_zeta1", jnum(res.compositionZeta1)},
                                   {"positivity_penalty", res.positivityPenalty},
                                   {"ppt_penalty", res.pptPenaltyValue},
                                   {"penalties_met", res.penaltiesMet},
                                   {"flagged_for_review", res.violation}});
                if (res.t1.dIn() > 0) {
                    posmap::io::writeChoiFile(dir / "t1.json", res.t1);
                    posmap::io::writeChoiFile(dir / "t2.json", res.t2);
                }
                failed = failed || res.record.outcome == posmap::RunOutcome::SolverFailed;
                runs.push_back({{"seed", tc.seed},
                                {"composition_zeta1", jnum(res.compositionZeta1)},
                                {"penalties_met", res.penaltiesMet},
                                {"flagged_for_review", res.violation}});
                if (!g.json()) {
                    std::cout << "seed " << tc.seed << " zeta1(T1oT2) " << num(res.compositionZeta1) << " penalties "
                              << (res.penaltiesMet ? "met" : "open") << (res.violation ? " FLAGGED FOR REVIEW" : "")
                              << '\n';
                }
            }
            if (g.json()) emit(g, h, {{"runs", runs}});
            return failed ? kSolver : kOk;
        }
        if (*swp) {
            posmap::CampaignSpec spec = posmap::campaignSpecFromJson(posmap::io::readJsonFile(sPath));
            spec.jobs = g.jobs;
            spec.outDir = fs::path(sOut);
            const Json h = header("sweep", spec.baseSeed, posmap::campaignSpecToJson(spec));
            printHeader(g, h);
            const auto res = posmap::runCampaign(spec);
            posmap::writePlotData(fs::path(sOut) / (spec.experiment + "_plots"),
                                  posmap::exportPlotData(spec.experiment, res.cells));
            if (g.json()) {
                Json cells = Json::array();
                for (const auto& c : res.summary.cells) {
                    cells.push_back({{"epsilon", c.epsilon},
                                     {"gamma", c.gamma},
                                     {"mask", c.maskIndex},
                                     {"runs", c.runs},
                                     {"successes", c.successes},
                                     {"success_rate", c.successRate},
                                     {"ase_mean", jnum(c.aseMean)},
                                     {"ase_std", jnum(c.aseStdDev)},
                                     {"ase_median", jnum(c.aseMedian)},
                                     {"ci_low", c.ciLow},
                                     {"ci_high", c.ciHigh}});
                }
                emit(g, h, {{"cells", cells}, {"out", sOut}});
            } else {
                std::cout << res.summary.toCsv();
            }
            return kOk;
        }
    } catch (const posmap::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const posmap::CapacityError& e) {
        std::cerr << "capacity: " << e.what() << '\n';
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    }
    return kOk;
}
