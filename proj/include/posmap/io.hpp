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

// io.hpp: JSON and CSV persistence for Choi matrices, masks and run records.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "posmap/choi.hpp"
#include "posmap/optimizer.hpp"

namespace posmap::io {

using Json = nlohmann::json;

/// {"d_in", "d_out", "re": [[...]], "im": [[...]], "flags": {"tp", "real"}}
Json choiToJson(const ChoiMatrix& c);
/// Throws InputError on malformed documents or violated flags.
ChoiMatrix choiFromJson(const Json& j);

/// {"d_in", "d_out", "keep": [[0|1, ...], ...]} or {"builtin": name, ...}.
Json maskToJson(const ChoiMask& m);
ChoiMask maskFromJson(const Json& j);

Json readJsonFile(const std::filesystem::path& path);
void writeJsonFile(const std::filesystem::path& path, const Json& j);

ChoiMatrix readChoiFile(const std::filesystem::path& path);
void writeChoiFile(const std::filesystem::path& path, const ChoiMatrix& c);
ChoiMask readMaskFile(const std::filesystem::path& path);

inline constexpr const char* kRecordHeader = "epoch,loss,zeta1,zetak,xi,wall_s";

void writeRecordCsv(const std::filesystem::path& path, const std::vector<EpochRow>& rows);
std::vector<EpochRow> readRecordCsv(const std::filesystem::path& path);

Json lossConfigToJson(const LossConfig& c);
Json trainConfigToJson(const TrainConfig& c);
Json recordSidecar(const RunRecord& r, const LossConfig& lc, const TrainConfig& tc);

/// Formats a double with enough digits to round-trip.
std::string formatReal(double x);

} // namespace posmap::io
