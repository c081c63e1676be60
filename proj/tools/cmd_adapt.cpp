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

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "creakbench/adapt.hpp"
#include "creakbench/manifest.hpp"
#include "cli_util.hpp"

namespace creakbench::cli {

int run_adapt(const std::string& manifest_path, const std::string& out_dir, double b,
              std::uint64_t seed, int workers, bool preset_stats,
              const std::string& calib_path) {
  namespace fs = std::filesystem;
  std::vector<ManifestRow> rows;
  CreakCalibration calib = CreakCalibration::defaults();
  try {
    rows = read_manifest(manifest_path);
    if (!calib_path.empty()) calib = load_calibration(calib_path);
  } catch (const InputError& e) {
    std::fprintf(stderr, "adapt: %s\n", e.what());
    return kExitInput;
  }

  bool any_gender = rows.empty();
  for (const auto& row : rows) any_gender = any_gender || row.gender.has_value();
  if (!any_gender) {
    std::fprintf(stderr, "adapt: no row carries a gender label\n");
    return kExitInput;
  }

  AdaptParams params;
  params.b = b;
  params.global_seed = seed;
  params.workers = workers;

  try {
    fs::create_directories(out_dir);
    const std::string audio_dir = (fs::path(out_dir) / "adapted").string();
    const CorpusResult result =
        adapt_corpus(rows, preset_stats ? std::make_optional(GenderStats::preset()) : std::nullopt,
                     params, audio_dir, calib);
    write_manifest(result.manifest, (fs::path(out_dir) / "manifest.jsonl").string());

    // AdaptRecord sidecar, one JSON object per input row.
    std::ostringstream records;
    for (const auto& rec : result.records) {
      nlohmann::json j;
      j["id"] = rec.id;
      if (rec.skipped) {
        j["skipped"] = true;
        j["reason"] = rec.skip_reason;
      } else {
        j["delta_semitones"] = rec.delta_semitones;
        j["noise_u"] = rec.noise_u;
        j["old_mean_hz"] = rec.old_mean_hz;
        j["new_mean_hz"] = rec.new_mean_hz;
        j["old_creak"] = rec.old_creak;
        j["new_creak"] = rec.new_creak;
        if (rec.ratio_clamped) j["ratio_clamped"] = true;
      }
      records << j.dump() << "\n";
    }
    write_text_file((fs::path(out_dir) / "records.jsonl").string(), records.str());

    std::size_t skipped = 0;
    for (const auto& rec : result.records) skipped += rec.skipped ? 1u : 0u;
    std::fprintf(stderr, "adapt: %zu adapted, %zu skipped; gender means %.2f/%.2f Hz\n",
                 result.manifest.size(), skipped, result.stats_used.male_mean_hz,
                 result.stats_used.female_mean_hz);
  } catch (const InputError& e) {
    std::fprintf(stderr, "adapt: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace creakbench::cli
