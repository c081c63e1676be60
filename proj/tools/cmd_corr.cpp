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
#include <fstream>

#include "creakbench/manifest.hpp"
#include "creakbench/stats.hpp"
#include "creakbench/textio.hpp"
#include "cli_util.hpp"

namespace creakbench::cli {

int run_corr(const std::string& features_csv, const std::string& out_csv,
             const std::string& group_by) {
  std::ifstream in(features_csv);
  if (!in) {
    std::fprintf(stderr, "corr: cannot open %s\n", features_csv.c_str());
    return kExitInput;
  }
  std::string header;
  if (!std::getline(in, header)) {
    std::fprintf(stderr, "corr: empty file %s\n", features_csv.c_str());
    return kExitInput;
  }
  const std::vector<std::string> cols = split_csv_line(header);
  int pitch_col = -1, creak_col = -1, gender_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "mean_pitch_hz" || cols[i] == "mean_pitch") {
      pitch_col = static_cast<int>(i);
    } else if (cols[i] == "creak_prob") {
      creak_col = static_cast<int>(i);
    } else if (cols[i] == "gender") {
      gender_col = static_cast<int>(i);
    }
  }
  if (pitch_col < 0 || creak_col < 0) {
    std::fprintf(stderr, "corr: need mean_pitch_hz and creak_prob columns in %s\n",
                 features_csv.c_str());
    return kExitInput;
  }

  const GroupBy grouping = group_by == "gender" ? GroupBy::kGender : GroupBy::kOverall;
  if (grouping == GroupBy::kGender && gender_col < 0) {
    std::fprintf(stderr, "corr: --group-by gender needs a gender column\n");
    return kExitInput;
  }

  std::vector<PitchCreakRow> rows;
  std::string line;
  std::size_t lineno = 1;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      const std::size_t need = static_cast<std::size_t>(std::max(pitch_col, creak_col)) + 1;
      if (fields.size() < need) {
        throw InputError("corr: short row at line " + std::to_string(lineno));
      }
      PitchCreakRow row;
      row.mean_pitch_hz = parse_double(fields[static_cast<std::size_t>(pitch_col)]);
      row.creak_prob = parse_double(fields[static_cast<std::size_t>(creak_col)]);
      if (gender_col >= 0 && static_cast<std::size_t>(gender_col) < fields.size()) {
        row.gender = parse_gender(fields[static_cast<std::size_t>(gender_col)]);
      }
      rows.push_back(row);
    }
    const auto reports = creak_pitch_report(rows, grouping);
    write_text_file(out_csv, correlation_reports_csv(reports));
  } catch (const InputError& e) {
    std::fprintf(stderr, "corr: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace creakbench::cli
