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

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace creakbench::flow {

inline constexpr int kAttributeDim = 6;
inline constexpr int kCreakIndex = 5;

/// Conditioning vector: six voice-quality strengths. Creak manipulation
/// shifts only the creak coordinate.
struct AttributeVector {
  double breathiness = 0.0;
  double roughness = 0.0;
  double resonance = 0.0;
  double weight = 0.0;
  double mean_pitch_norm = 0.0;
  double creak_prob = 0.0;

  std::array<double, kAttributeDim> to_array() const {
    return {breathiness, roughness, resonance, weight, mean_pitch_norm, creak_prob};
  }
  static AttributeVector from_array(const std::array<double, kAttributeDim>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

/// Copy of `a` with creak_prob + beta. No clamping: shifts may leave [0, 1].
AttributeVector shift_creak(const AttributeVector& a, double beta);

enum class SolverMethod { kFixedRk4, kAdaptiveRk45 };

/// Integration runs between t=1 (data end) and t=0 (latent end).
struct SolverConfig {
  SolverMethod method = SolverMethod::kFixedRk4;
  int steps = 20;  // fixed-rk4
  double rel_tol = 1e-5;
  double abs_tol = 1e-7;  // adaptive-rk45
};

inline constexpr double kTimeData = 1.0;
inline constexpr double kTimeLatent = 0.0;

enum class TraceMethod { kExact, kHutchinson };

/// Fully connected dynamics g(z, t, a): input [z; t; a], tanh hidden layers,
/// linear output of dimension state_dim. Hidden layers may be empty, in
/// which case g is affine (useful for closed-form checks). The final layer
/// is zero-initialized so a fresh net is the identity flow.
class DynamicsNet {
 public:
  DynamicsNet() = default;
  DynamicsNet(int state_dim, std::vector<int> hidden_widths, std::uint64_t init_seed);

  int state_dim() const { return state_dim_; }
  int input_dim() const { return state_dim_ + 1 + kAttributeDim; }
  const std::vector<int>& hidden_widths() const { return hidden_; }
  int layer_count() const { return static_cast<int>(weights_.size()); }

  const Eigen::MatrixXd& weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
  const Eigen::VectorXd& bias(int i) const { return biases_[static_cast<std::size_t>(i)]; }
  Eigen::MatrixXd& weight(int i) { return weights_[static_cast<std::size_t>(i)]; }
  Eigen::VectorXd& bias(int i) { return biases_[static_cast<std::size_t>(i)]; }

  std::size_t param_count() const;
  Eigen::VectorXd params_flat() const;
  void set_params_flat(const Eigen::VectorXd& flat);

  /// g for a batch: z is d x B, attrs is 6 x B (already normalized), t is
  /// shared across the batch. Returns d x B.
  Eigen::MatrixXd eval(const Eigen::MatrixXd& z, double t, const Eigen::MatrixXd& attrs) const;

 private:
  int state_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Per-attribute normalization applied before conditioning the net.
struct AttrStats {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kAttributeDim);
  Eigen::VectorXd stddev = Eigen::VectorXd::Ones(kAttributeDim);

  Eigen::VectorXd normalize(const AttributeVector& a) const;
};

struct FlowModel {
  DynamicsNet net;
  SolverConfig solver;
  TraceMethod trace = TraceMethod::kExact;
  int hutchinson_probes = 8;
  std::uint64_t training_seed = 0;
  AttrStats attr_stats;
  double final_nll = std::numeric_limits<double>::quiet_NaN();
  int format_version = 1;
};

struct TrainHyper {
  int batch_size = 200;
  double learning_rate = 1e-4;
  int max_epochs = 100;
  std::uint64_t seed = 0;
};

struct FlowArch {
  std::vector<int> hidden = {64, 64};
  TraceMethod trace = TraceMethod::kExact;
  int hutchinson_probes = 8;
};

/// Solves dz/dt = g(z, t, a) from from_t to to_t for one state vector
/// (`attr` in net space, i.e. normalized). Throws NumericalError when the
/// state leaves the finite range.
Eigen::VectorXd integrate(const DynamicsNet& net, const Eigen::VectorXd& z_start,
                          const Eigen::VectorXd& attr, double from_t, double to_t,
                          const SolverConfig& cfg);

/// Batched fixed-RK4 integration (columns are independent states).
Eigen::MatrixXd integrate_batch(const DynamicsNet& net, const Eigen::MatrixXd& z_start,
                                const Eigen::MatrixXd& attrs, double from_t, double to_t,
                                int steps);

/// Exact Jacobian trace tr(dg/dz) at one point (attr in net space).
double jacobian_trace(const DynamicsNet& net, const Eigen::VectorXd& z, double t,
                      const Eigen::VectorXd& attr);

/// Per-probe Hutchinson samples v^T (dg/dz) v with Rademacher v; their mean
/// estimates the trace.
std::vector<double> hutchinson_trace_samples(const DynamicsNet& net, const Eigen::VectorXd& z,
                                             double t, const Eigen::VectorXd& attr, int n_probes,
                                             std::uint64_t seed);

/// log p(s | a): standard-normal log-density at z(t0) plus the integrated
/// Jacobian trace along the transport from t=1 to t=0.
double log_likelihood(const FlowModel& model, const Eigen::VectorXd& s,
                      const AttributeVector& a);
Eigen::VectorXd log_likelihood_batch(const FlowModel& model, const Eigen::MatrixXd& s,
                                     const std::vector<AttributeVector>& attrs);

/// Mean NLL over the batch and its exact gradient with respect to the
/// flattened parameters, obtained by reverse-mode differentiation through
/// the fixed-step RK4 solver. Exposed so tests can check the gradients
/// against finite differences. attrs are in net space (normalized).
struct NllResult {
  double nll = 0.0;
  Eigen::VectorXd grad;
};
NllResult nll_with_gradient(const DynamicsNet& net, const Eigen::MatrixXd& s,
                            const Eigen::MatrixXd& attrs, int rk4_steps, TraceMethod trace,
                            int hutchinson_probes, std::uint64_t probe_seed);
double nll_value(const DynamicsNet& net, const Eigen::MatrixXd& s, const Eigen::MatrixXd& attrs,
                 int rk4_steps, TraceMethod trace, int hutchinson_probes,
                 std::uint64_t probe_seed);

/// Maximizes the mean log-likelihood with Adam over mini-batches drawn in a
/// seed-fixed order (wrap-around when batch_size exceeds the dataset).
/// Deterministic for a fixed seed; parameters are quantized to float32 at
/// the end and final_nll is computed on the quantized model. Training
/// always uses the fixed-step solver. Throws NumericalError when the loss
/// turns non-finite.
FlowModel train(const std::vector<std::pair<Eigen::VectorXd, AttributeVector>>& data,
                const TrainHyper& hyper, const SolverConfig& solver, const FlowArch& arch);

/// Creak manipulation: encode s under a (t: 1 -> 0), decode under a_target
/// (t: 0 -> 1).
Eigen::VectorXd manipulate(const FlowModel& model, const Eigen::VectorXd& s,
                           const AttributeVector& a, const AttributeVector& a_target);

/// Versioned container: text header plus a little-endian float32 parameter
/// blob. Files written here load back bit-exactly and re-serialize to
/// identical bytes.
void save_flow_model(const FlowModel& model, const std::string& path);
FlowModel load_flow_model(const std::string& path);

}  // namespace creakbench::flow
