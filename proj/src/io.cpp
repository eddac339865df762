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

#include "posmap/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "posmap/errors.hpp"

namespace posmap::io {

namespace {

int requireInt(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer()) throw InputError(std::string("missing integer field '") + key + "'");
    return j[key].get<int>();
}

RealMatrix readGrid(const Json& j, const char* key, int n) {
    if (!j.contains(key) || !j[key].is_array() || static_cast<int>(j[key].size()) != n) {
        throw InputError(std::string("field '") + key + "' must be an array of " + std::to_string(n) + " rows");
    }
    RealMatrix m(n, n);
    for (int r = 0; r < n; ++r) {
        const Json& row = j[key][static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            throw InputError(std::string("row ") + std::to_string(r) + " of '" + key + "' has the wrong length");
        }
        for (int c = 0; c < n; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number()) throw InputError(std::string("non-numeric entry in '") + key + "'");
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

Json grid(const RealMatrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

double jsonReal(double x) { return std::isfinite(x) ? x : std::numeric_limits<double>::quiet_NaN(); }

} // namespace

Json choiToJson(const ChoiMatrix& c) {
    Json j;
    j["d_in"] = c.dIn();
    j["d_out"] = c.dOut();
    j["re"] = grid(c.matrix().real());
    j["im"] = grid(c.matrix().imag());
    j["flags"] = {{"tp", c.flags().tp}, {"real", c.flags().real}};
    return j;
}

ChoiMatrix choiFromJson(const Json& j) {
    if (!j.is_object()) throw InputError("Choi document must be a JSON object");
    const int dIn = requireInt(j, "d_in");
    const int dOut = requireInt(j, "d_out");
    if (dIn < 1 || dOut < 1) throw InputError("dimensions must be positive");
    const int n = dIn * dOut;
    const RealMatrix re = readGrid(j, "re", n);
    const RealMatrix im = j.contains("im") ? readGrid(j, "im", n) : RealMatrix::Zero(n, n);
    ChoiFlags flags;
    if (j.contains("flags")) {
        flags.tp = j["flags"].value("tp", false);
        flags.real = j["flags"].value("real", false);
    }
    ComplexMatrix m(n, n);
    m.real() = re;
    m.imag() = im;
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff())) {
        throw InputError("Choi matrix is not Hermitian");
    }
    return ChoiMatrix(dIn, dOut, HermitianOperator(m), flags);
}

Json maskToJson(const ChoiMask& m) {
    Json j;
    j["d_in"] = m.dIn();
    j["d_out"] = m.dOut();
    Json keep = Json::array();
    for (int r = 0; r < m.size(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.size(); ++c) row.push_back(m.keeps(r, c) ? 1 : 0);
        keep.push_back(std::move(row));
    }
    j["keep"] = std::move(keep);
    return j;
}

ChoiMask maskFromJson(const Json& j) {
    if (!j.is_object()) throw InputError("mask document must be a JSON object");
    if (j.contains("builtin")) {
        return builtinMask(j["builtin"].get<std::string>(), j.value("d_in", 3), j.value("d_out", 3),
                           j.value("density", 0.3), j.value("seed", std::uint64_t{0}));
    }
    const int dIn = requireInt(j, "d_in");
    const int dOut = requireInt(j, "d_out");
    const RealMatrix keep = readGrid(j, "keep", dIn * dOut);
    std::vector<std::uint8_t> flat;
    for (int r = 0; r < dIn * dOut; ++r)
        for (int c = 0; c < dIn * dOut; ++c) flat.push_back(keep(r, c) != 0.0 ? 1 : 0);
    ChoiMask m(dIn, dOut, std::move(flat));
    m.validate();
    return m;
}

Json readJsonFile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw InputError("cannot parse " + path.string() + ": " + e.what());
    }
}

void writeJsonFile(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

ChoiMatrix readChoiFile(const std::filesystem::path& path) {
    try {
        return choiFromJson(readJsonFile(path));
    } catch (const Json::exception& e) {
        throw InputError("malformed Choi file " + path.string() + ": " + e.what());
    }
}

void writeChoiFile(const std::filesystem::path& path, const ChoiMatrix& c) { writeJsonFile(path, choiToJson(c)); }

ChoiMask readMaskFile(const std::filesystem::path& path) {
    try {
        return maskFromJson(readJsonFile(path));
    } catch (const Json::exception& e) {
        throw InputError("malformed mask file " + path.string() + ": " + e.what());
    }
}

std::string formatReal(double x) {
    if (std::isnan(x)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void writeRecordCsv(const std::filesystem::path& path, const std::vector<EpochRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << kRecordHeader << '\n';
    for (const auto& r : rows) {
        out << r.epoch << ',' << formatReal(r.loss) << ',' << formatReal(r.zeta1) << ',' << formatReal(r.zetaK) << ','
            << formatReal(r.xi) << ',' << formatReal(r.wallSeconds) << '\n';
    }
}

std::vector<EpochRow> readRecordCsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kRecordHeader) throw InputError("unexpected record header in " + path.string());
    std::vector<EpochRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ls, field, ',')) f.push_back(field);
        if (f.size() != 6) throw InputError("malformed record row in " + path.string());
        auto num = [](const std::string& s) { return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); };
        EpochRow r;
        r.epoch = std::stoi(f[0]);
        r.loss = num(f[1]);
        r.zeta1 = num(f[2]);
        r.zetaK = num(f[3]);
        r.xi = num(f[4]);
        r.wallSeconds = num(f[5]);
        rows.push_back(r);
    }
    return rows;
}

Json lossConfigToJson(const LossConfig& c) {
    return {{"mode", toString(c.mode)}, {"epsilon", c.epsilon}, {"gamma", c.gamma}, {"delta", c.delta},
            {"omega", c.omega}, {"nu", c.nu}, {"k", c.k}};
}

Json trainConfigToJson(const TrainConfig& c) {
    return {{"learning_rate", c.learningRate},
            {"max_epochs", c.maxEpochs},
            {"seed", c.seed},
            {"adam_betas", {c.beta1, c.beta2}},
            {"adam_eps", c.adamEps},
            {"solver",
             {{"feasibility_tol", c.solver.feasibilityTol},
              {"duality_gap_tol", c.solver.dualityGapTol},
              {"max_iterations", c.solver.maxIterations},
              {"extend_side", toString(c.solver.extendSide)}}}};
}

Json recordSidecar(const RunRecord& r, const LossConfig& lc, const TrainConfig& tc) {
    Json j;
    j["loss"] = lossConfigToJson(lc);
    j["train"] = trainConfigToJson(tc);
    j["seed"] = r.seed;
    j["outcome"] = toString(r.outcome);
    j["success_epoch"] = r.successEpoch ? Json(*r.successEpoch) : Json(nullptr);
    j["epochs_run"] = r.rows.size();
    j["degenerate_eigen_epochs"] = r.degenerateEigenEpochs;
    if (!r.rows.empty()) {
        j["final_zeta1"] = jsonReal(r.rows.back().zeta1);
        j["final_zetak"] = jsonReal(r.rows.back().zetaK);
    }
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

} // namespace posmap::io
