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
#include <map>
#include <sstream>

#include "creakbench/textio.hpp"
#include "creakbench/verify.hpp"
#include "cli_util.hpp"

namespace creakbench::cli {

namespace {

std::string eer_csv_header() { return "beta,eer,threshold,n_target,n_nontarget\n"; }

void append_eer_row(std::ostringstream& os, double beta, const verify::EerResult& r) {
  os << format_double(beta) << "," << format_double(r.eer) << "," << format_double(r.threshold)
     << "," << r.n_target << "," << r.n_nontarget << "\n";
}

}  // namespace

int run_eer_trials(const std::string& trials_csv, const std::string& out_csv) {
  std::ifstream in(trials_csv);
  if (!in) {
    std::fprintf(stderr, "eer: cannot open %s\n", trials_csv.c_str());
    return kExitInput;
  }
  std::string header;
  if (!std::getline(in, header)) {
    std::fprintf(stderr, "eer: empty file %s\n", trials_csv.c_str());
    return kExitInput;
  }
  const std::vector<std::string> cols = split_csv_line(header);
  int label_col = -1, score_col = -1, beta_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "label") label_col = static_cast<int>(i);
    if (cols[i] == "score") score_col = static_cast<int>(i);
    if (cols[i] == "beta") beta_col = static_cast<int>(i);
  }
  if (label_col < 0 || score_col < 0) {
    std::fprintf(stderr, "eer: need label and score columns in %s\n", trials_csv.c_str());
    return kExitInput;
  }

  std::map<double, std::vector<verify::TrialScore>> by_beta;
  std::string line;
  std::size_t lineno = 1;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (static_cast<int>(fields.size()) <= std::max(label_col, score_col)) {
        throw InputError("short row at line " + std::to_string(lineno));
      }
      verify::TrialScore trial;
      const std::string& label = fields[static_cast<std::size_t>(label_col)];
      if (label == "target" || label == "1") {
        trial.same_speaker = true;
      } else if (label == "nontarget" || label == "0") {
        trial.same_speaker = false;
      } else {
        throw InputError("bad label '" + label + "' at line " + std::to_string(lineno));
      }
      trial.score = parse_double(fields[static_cast<std::size_t>(score_col)]);
      const double beta =
          beta_col >= 0 && static_cast<std::size_t>(beta_col) < fields.size()
              ? parse_double(fields[static_cast<std::size_t>(beta_col)])
              : 0.0;
      by_beta[beta].push_back(trial);
    }
    std::ostringstream os;
    os << eer_csv_header();
    for (const auto& [beta, trials] : by_beta) {
      append_eer_row(os, beta, verify::eer(trials));
    }
    write_text_file(out_csv, os.str());
  } catch (const InputError& e) {
    std::fprintf(stderr, "eer: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}

int run_eer_embeddings(const std::string& originals_path,
                       const std::vector<std::string>& manipulated_paths,
                       const std::vector<double>& betas, const std::string& out_csv,
                       const std::string& policy_name, std::size_t max_trials,
                       std::uint64_t seed) {
  if (manipulated_paths.size() != betas.size()) {
    std::fprintf(stderr, "eer: need one --beta per --manipulated file\n");
    return kExitInput;
  }
  try {
    const std::vector<EmbeddingRow> orig_rows = read_embeddings(originals_path);
    std::vector<verify::EmbeddingRecord> originals;
    originals.reserve(orig_rows.size());
    for (const auto& row : orig_rows) {
      originals.push_back({row.id, row.speaker, row.embedding});
    }

    verify::PairingPolicy policy;
    if (policy_name == "sampled") {
      policy.kind = verify::PairingPolicy::Kind::kSampled;
    } else if (policy_name != "exhaustive") {
      throw InputError("unknown policy '" + policy_name + "' (use exhaustive|sampled)");
    }
    policy.max_trials = max_trials;
    policy.seed = seed;

    std::ostringstream os;
    os << eer_csv_header();
    for (std::size_t i = 0; i < manipulated_paths.size(); ++i) {
      const std::vector<EmbeddingRow> manip_rows = read_embeddings(manipulated_paths[i]);
      std::vector<std::pair<std::string, Eigen::VectorXd>> manipulated;
      manipulated.reserve(manip_rows.size());
      for (const auto& row : manip_rows) manipulated.push_back({row.id, row.embedding});
      const auto trials = verify::build_trials(originals, manipulated, policy);
      append_eer_row(os, betas[i], verify::eer(trials));
    }
    write_text_file(out_csv, os.str());
  } catch (const InputError& e) {
    std::fprintf(stderr, "eer: %s\n", e.what());
    return kExitInput;
  }
  return kExitOk;
}

}  // namespace creakbench::cli
