// Copyright 2026 The Creakbench Authors
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

#include "creakbench/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "creakbench/error.hpp"

namespace creakbench {

using nlohmann::json;

std::optional<Gender> parse_gender(const std::string& s) {
  if (s == "male" || s == "m") return Gender::kMale;
  if (s == "female" || s == "f") return Gender::kFemale;
  return std::nullopt;
}

std::string gender_name(Gender g) { return g == Gender::kMale ? "male" : "female"; }

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("read_manifest: cannot open " + path);
  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError("read_manifest: " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    ManifestRow row;
    if (!j.contains("id") || !j.contains("audio_path")) {
      throw InputError("read_manifest: " + path + ":" + std::to_string(lineno) +
                       ": missing id/audio_path");
    }
    row.id = j.at("id").get<std::string>();
    row.audio_path = j.at("audio_path").get<std::string>();
    row.speaker_id = j.value("speaker_id", std::string{});
    if (j.contains("gender")) row.gender = parse_gender(j.at("gender").get<std::string>());
    if (j.contains("creak_prob")) row.creak_prob = j.at("creak_prob").get<double>();
    if (j.contains("mean_pitch_hz")) row.mean_pitch_hz = j.at("mean_pitch_hz").get<double>();
    if (j.contains("attrs")) {
      const auto& a = j.at("attrs");
      if (!a.is_array() || a.size() != 6) {
        throw InputError("read_manifest: attrs must hold 6 floats (line " +
                         std::to_string(lineno) + ")");
      }
      std::array<double, 6> attrs{};
      for (std::size_t i = 0; i < 6; ++i) attrs[i] = a[i].get<double>();
      row.attrs = attrs;
    }
    if (j.contains("delta_semitones")) row.delta_semitones = j.at("delta_semitones").get<double>();
    if (j.contains("noise_u")) row.noise_u = j.at("noise_u").get<double>();
    if (j.contains("adapted_path")) row.adapted_path = j.at("adapted_path").get<std::string>();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("write_manifest: cannot write " + path);
  for (const auto& row : rows) {
    json j;
    j["id"] = row.id;
    j["audio_path"] = row.audio_path;
    if (!row.speaker_id.empty()) j["speaker_id"] = row.speaker_id;
    if (row.gender) j["gender"] = gender_name(*row.gender);
    if (row.creak_prob) j["creak_prob"] = *row.creak_prob;
    if (row.mean_pitch_hz) j["mean_pitch_hz"] = *row.mean_pitch_hz;
    if (row.attrs) j["attrs"] = *row.attrs;
    if (row.delta_semitones) j["delta_semitones"] = *row.delta_semitones;
    if (row.noise_u) j["noise_u"] = *row.noise_u;
    if (row.adapted_path) j["adapted_path"] = *row.adapted_path;
    os << j.dump() << "\n";
  }
  if (!os) throw InputError("write_manifest: write failed: " + path);
}

}  // namespace creakbench
