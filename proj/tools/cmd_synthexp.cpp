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
#include <filesystem>

#include "creakbench/synthexp.hpp"
#include "cli_util.hpp"

namespace creakbench::cli {

int run_synthexp(const std::string& out_dir, std::uint64_t seed, int speakers, int utts, int d,
                 double rho, const std::vector<int>& hidden, int steps,
                 const std::string& trace, int probes, int epochs, double lr, int batch,
                 const std::vector<double>& beta_grid) {
  namespace fs = std::filesystem;
  try {
    synthexp::ExperimentConfig config;
    config.corpus.seed = seed;
    config.corpus.n_speakers = speakers;
    config.corpus.utterances_per_speaker = utts;
    config.corpus.d = d;
    config.corpus.creak_pitch_correlation = rho;
    config.hyper.seed = seed;
    config.hyper.max_epochs = epochs;
    config.hyper.learning_rate = lr;
    config.hyper.batch_size = batch;
    config.solver.steps = steps;
    config.arch.hidden = hidden;
    if (trace == "hutchinson") {
      config.arch.trace = flow::TraceMethod::kHutchinson;
    } else if (trace != "exact") {
      throw InputError("unknown trace method '" + trace + "' (use exact|hutchinson)");
    }
    config.arch.hutchinson_probes = probes;
    if (!beta_grid.empty()) config.beta_grid = beta_grid;

    const synthexp::ExperimentReport report = synthexp::run_experiment(config);
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "report.csv").string(), report.to_csv());
    write_text_file((fs::path(out_dir) / "summary.json").string(), report.to_json());

    bool any_failed = false;
    for (const auto& sys : report.systems) {
      any_failed = any_failed || sys.failed;
      std::fprintf(stderr, "synthexp: %s final_nll %.4f pitch_slope %.4f%s\n",
                   sys.name.c_str(), sys.final_nll, sys.pitch_slope_alpha,
                   sys.failed ? " (FAILED)" : "");
    }
    std::fprintf(stderr, "synthexp: paper_pattern %s\n",
                 report.paper_pattern ? "true" : "false");
    if (any_failed) return kExitNumerical;
  } catch (const InputError& e) {
    std::fprintf(stderr, "synthexp: %s\n", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "synthexp: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace creakbench::cli
