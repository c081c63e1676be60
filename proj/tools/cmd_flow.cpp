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
#include <sstream>

#include "creakbench/flow.hpp"
#include "creakbench/textio.hpp"
#include "cli_util.hpp"

namespace creakbench::cli {

namespace {

flow::TraceMethod parse_trace(const std::string& name) {
  if (name == "exact") return flow::TraceMethod::kExact;
  if (name == "hutchinson") return flow::TraceMethod::kHutchinson;
  throw InputError("unknown trace method '" + name + "' (use exact|hutchinson)");
}

}  // namespace

int run_flow_train(const std::string& data_path, const std::string& model_path,
                   const std::vector<int>& hidden, int steps, const std::string& trace,
                   int probes, int batch, double lr, int epochs, std::uint64_t seed) {
  try {
    const std::vector<EmbeddingRow> rows = read_embeddings(data_path);
    std::vector<std::pair<Eigen::VectorXd, flow::AttributeVector>> data;
    data.reserve(rows.size());
    for (const auto& row : rows) data.push_back({row.embedding, row.attrs});

    flow::TrainHyper hyper;
    hyper.batch_size = batch;
    hyper.learning_rate = lr;
    hyper.max_epochs = epochs;
    hyper.seed = seed;
    flow::SolverConfig solver;
    solver.steps = steps;
    flow::FlowArch arch;
    arch.hidden = hidden;
    arch.trace = parse_trace(trace);
    arch.hutchinson_probes = probes;

    const flow::FlowModel model = flow::train(data, hyper, solver, arch);
    flow::save_flow_model(model, model_path);
    std::printf("final_nll %s\n", format_double(model.final_nll).c_str());
  } catch (const InputError& e) {
    std::fprintf(stderr, "flow train: %s\n", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "flow train: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}

int run_flow_manipulate(const std::string& model_path, const std::string& data_path, double beta,
                        const std::string& out_path) {
  try {
    const flow::FlowModel model = flow::load_flow_model(model_path);
    std::vector<EmbeddingRow> rows = read_embeddings(data_path);
    for (auto& row : rows) {
      if (row.embedding.size() != model.net.state_dim()) {
        throw InputError("embedding dimension mismatch for id '" + row.id + "'");
      }
      const flow::AttributeVector shifted = flow::shift_creak(row.attrs, beta);
      row.embedding = flow::manipulate(model, row.embedding, row.attrs, shifted);
      row.attrs = shifted;
    }
    write_embeddings(rows, out_path);
  } catch (const InputError& e) {
    std::fprintf(stderr, "flow manipulate: %s\n", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "flow manipulate: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}

int run_flow_loglik(const std::string& model_path, const std::string& data_path) {
  try {
    const flow::FlowModel model = flow::load_flow_model(model_path);
    const std::vector<EmbeddingRow> rows = read_embeddings(data_path);
    if (rows.empty()) throw InputError("no embeddings in " + data_path);

    Eigen::MatrixXd s(model.net.state_dim(), static_cast<Eigen::Index>(rows.size()));
    std::vector<flow::AttributeVector> attrs;
    attrs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].embedding.size() != model.net.state_dim()) {
        throw InputError("embedding dimension mismatch for id '" + rows[i].id + "'");
      }
      s.col(static_cast<Eigen::Index>(i)) = rows[i].embedding;
      attrs.push_back(rows[i].attrs);
    }
    const Eigen::VectorXd ll = flow::log_likelihood_batch(model, s, attrs);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::printf("%s %s\n", rows[i].id.c_str(),
                  format_double(ll(static_cast<Eigen::Index>(i))).c_str());
    }
    std::printf("mean_nll %s\n", format_double(-ll.mean()).c_str());
    std::printf("model_final_nll %s\n", format_double(model.final_nll).c_str());
  } catch (const InputError& e) {
    std::fprintf(stderr, "flow loglik: %s\n", e.what());
    return kExitInput;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "flow loglik: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace creakbench::cli
