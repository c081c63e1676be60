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

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "creakbench/error.hpp"
#include "creakbench/flow.hpp"

namespace creakbench::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Default seed: CREAKBENCH_SEED when set, otherwise 0.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("CREAKBENCH_SEED");
  if (env == nullptr || *env == '\0') return 0;
  return std::strtoull(env, nullptr, 10);
}

/// One line of a simple CSV (double quotes guard embedded commas).
std::vector<std::string> split_csv_line(const std::string& line);

/// Embedding datasets on disk: JSON Lines, one object per line with keys
/// id, [speaker], embedding (d floats), attrs (6 floats).
struct EmbeddingRow {
  std::string id;
  std::string speaker;
  Eigen::VectorXd embedding;
  flow::AttributeVector attrs;
};

std::vector<EmbeddingRow> read_embeddings(const std::string& path);
void write_embeddings(const std::vector<EmbeddingRow>& rows, const std::string& path);

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write " + path);
  os << content;
  if (!os) throw InputError("write failed: " + path);
}

// Subcommand entry points; each returns an exit code and reports errors on
// stderr.
int run_analyze(const std::string& manifest_path, const std::string& out_csv,
                const std::string& calib_path, int workers);
int run_adapt(const std::string& manifest_path, const std::string& out_dir, double b,
              std::uint64_t seed, int workers, bool preset_stats,
              const std::string& calib_path);
int run_corr(const std::string& features_csv, const std::string& out_csv,
             const std::string& group_by);
int run_flow_train(const std::string& data_path, const std::string& model_path,
                   const std::vector<int>& hidden, int steps, const std::string& trace,
                   int probes, int batch, double lr, int epochs, std::uint64_t seed);
int run_flow_manipulate(const std::string& model_path, const std::string& data_path,
                        double beta, const std::string& out_path);
int run_flow_loglik(const std::string& model_path, const std::string& data_path);
int run_eer_trials(const std::string& trials_csv, const std::string& out_csv);
int run_eer_embeddings(const std::string& originals_path,
                       const std::vector<std::string>& manipulated_paths,
                       const std::vector<double>& betas, const std::string& out_csv,
                       const std::string& policy, std::size_t max_trials, std::uint64_t seed);
int run_synthexp(const std::string& out_dir, std::uint64_t seed, int speakers, int utts, int d,
                 double rho, const std::vector<int>& hidden, int steps,
                 const std::string& trace, int probes, int epochs, double lr, int batch,
                 const std::vector<double>& beta_grid);

}  // namespace creakbench::cli
