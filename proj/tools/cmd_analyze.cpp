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

#include <cstdio>
#include <optional>
#include <sstream>

#include "creakbench/acoustics.hpp"
#include "creakbench/audio.hpp"
#include "creakbench/creak.hpp"
#include "creakbench/manifest.hpp"
#include "creakbench/parallel.hpp"
#include "creakbench/textio.hpp"
#include "cli_util.hpp"

namespace creakbench::cli {

int run_analyze(const std::string& manifest_path, const std::string& out_csv,
                const std::string& calib_path, int workers) {
  std::vector<ManifestRow> rows;
  CreakCalibration calib = CreakCalibration::defaults();
  try {
    rows = read_manifest(manifest_path);
    if (!calib_path.empty()) calib = load_calibration(calib_path);
  } catch (const InputError& e) {
    std::fprintf(stderr, "analyze: %s\n", e.what());
    return kExitInput;
  }

  struct RowResult {
    bool ok = false;
    std::string line;
    std::string error;
  };
  std::vector<RowResult> results(rows.size());

  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const ManifestRow& row = rows[i];
    RowResult& res = results[i];
    try {
      const AudioClip clip = read_wav(row.audio_path);
      const FeatureBundle fb = extract_features_with_jitter(clip);
      double prob;
      std::string source;
      if (row.creak_prob) {
        prob = *row.creak_prob;
        source = "external";
      } else {
        prob = proxy_creak_prob(CreakFeatures::from(fb.features, fb.jitter_pct), calib).prob;
        source = "proxy";
      }
      std::ostringstream os;
      os << row.id << "," << row.speaker_id << ","
         << (row.gender ? gender_name(*row.gender) : "") << ","
         << format_double(fb.features.mean_pitch_hz) << ","
         << format_double(fb.features.h1h2_db) << "," << format_double(fb.features.hnr_db)
         << "," << format_double(fb.features.cpp_db) << ","
         << format_double(fb.features.voiced_fraction) << "," << format_double(fb.jitter_pct)
         << "," << format_double(prob) << "," << source << ",";
      if (row.gender) os << (classify_creak(prob, *row.gender) ? "1" : "0");
      os << "\n";
      res.line = os.str();
      res.ok = true;
    } catch (const InputError& e) {
      res.error = e.what();
    }
  });

  std::ostringstream csv;
  csv << "id,speaker_id,gender,mean_pitch_hz,h1h2_db,hnr_db,cpp_db,voiced_fraction,"
         "jitter_pct,creak_prob,creak_source,creak_label\n";
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok) {
      csv << results[i].line;
    } else {
      ++skipped;
      std::fprintf(stderr, "analyze: skipping %s: %s\n", rows[i].id.c_str(),
                   results[i].error.c_str());
    }
  }
  try {
    write_text_file(out_csv, csv.str());
  } catch (const InputError& e) {
    std::fprintf(stderr, "analyze: %s\n", e.what());
    return kExitInput;
  }
  if (skipped > 0) {
    std::fprintf(stderr, "analyze: skipped %zu of %zu rows\n", skipped, rows.size());
  }
  return kExitOk;
}

}  // namespace creakbench::cli
