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

#include "creakbench/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "creakbench/error.hpp"
#include "creakbench/rng.hpp"
#include "creakbench/textio.hpp"

namespace creakbench::flow {
namespace {

constexpr const char* kModelMagic = "creakbench-flow v1";

struct TraceSpec {
  TraceMethod method = TraceMethod::kExact;
  int probes = 8;
  std::uint64_t seed = 0;
};

// Activations of one dynamics evaluation, kept for the backward pass.
struct EvalCache {
  Eigen::MatrixXd u;               // input [z; t; a], m x B
  std::vector<Eigen::MatrixXd> h;  // hidden activations, H_i x B
  Eigen::MatrixXd g;               // output, d x B
};

// JVP intermediates of the trace estimator, kept for the backward pass.
// q[k][i] = W_i r_{i-1}^(k), r[k][i] = tanh'(p_i) .* q[k][i].
struct TraceCache {
  Eigen::MatrixXd probes;  // d x K, columns v_k
  double scale = 1.0;      // 1 exact, 1/K Hutchinson
  std::vector<std::vector<Eigen::MatrixXd>> q;
  std::vector<std::vector<Eigen::MatrixXd>> r;
  Eigen::RowVectorXd trace;  // 1 x B
};

// Parameter gradient accumulator, same shapes as the net.
struct ParamGrads {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  explicit ParamGrads(const DynamicsNet& net) {
    for (int i = 0; i < net.layer_count(); ++i) {
      dw.push_back(Eigen::MatrixXd::Zero(net.weight(i).rows(), net.weight(i).cols()));
      db.push_back(Eigen::VectorXd::Zero(net.bias(i).size()));
    }
  }

  Eigen::VectorXd flat() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < dw.size(); ++i) {
      total += static_cast<std::size_t>(dw[i].size()) + static_cast<std::size_t>(db[i].size());
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(total));
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < dw.size(); ++i) {
      std::copy(dw[i].data(), dw[i].data() + dw[i].size(), out.data() + at);
      at += dw[i].size();
      std::copy(db[i].data(), db[i].data() + db[i].size(), out.data() + at);
      at += db[i].size();
    }
    return out;
  }
};

void forward_eval(const DynamicsNet& net, const Eigen::MatrixXd& z, double t,
                  const Eigen::MatrixXd& attrs, EvalCache* cache) {
  const int d = net.state_dim();
  const Eigen::Index batch = z.cols();
  const int layers = net.layer_count();

  Eigen::MatrixXd u(net.input_dim(), batch);
  u.topRows(d) = z;
  u.row(d).setConstant(t);
  u.bottomRows(kAttributeDim) = attrs;

  cache->u = std::move(u);
  cache->h.clear();
  const Eigen::MatrixXd* in = &cache->u;
  for (int i = 0; i < layers - 1; ++i) {
    Eigen::MatrixXd p = (net.weight(i) * (*in)).colwise() + net.bias(i);
    cache->h.push_back(p.array().tanh().matrix());
    in = &cache->h.back();
  }
  cache->g = (net.weight(layers - 1) * (*in)).colwise() + net.bias(layers - 1);
}

// Trace of dg/dz via JVPs along the probe directions. Exact when probes are
// the standard basis.
void forward_trace(const DynamicsNet& net, const EvalCache& ec, Eigen::MatrixXd probes,
                   double scale, TraceCache* tc) {
  const int d = net.state_dim();
  const Eigen::Index batch = ec.u.cols();
  const int hidden_layers = net.layer_count() - 1;
  const Eigen::Index n_probes = probes.cols();

  tc->probes = std::move(probes);
  tc->scale = scale;
  tc->q.assign(static_cast<std::size_t>(n_probes), {});
  tc->r.assign(static_cast<std::size_t>(n_probes), {});
  tc->trace = Eigen::RowVectorXd::Zero(batch);

  const Eigen::MatrixXd w0z = net.weight(0).leftCols(d);
  const Eigen::MatrixXd& w_out = net.weight(net.layer_count() - 1);

  for (Eigen::Index k = 0; k < n_probes; ++k) {
    const Eigen::VectorXd v = tc->probes.col(k);
    if (hidden_layers == 0) {
      // Affine net: trace contribution is constant across the batch.
      const double c = v.dot(w0z * v);
      tc->trace.array() += scale * c;
      continue;
    }
    auto& qk = tc->q[static_cast<std::size_t>(k)];
    auto& rk = tc->r[static_cast<std::size_t>(k)];
    qk.reserve(static_cast<std::size_t>(hidden_layers));
    rk.reserve(static_cast<std::size_t>(hidden_layers));

    const Eigen::VectorXd q0 = w0z * v;  // H_0 x 1, batch-independent
    qk.push_back(q0.replicate(1, batch));
    rk.push_back(((1.0 - ec.h[0].array().square()) * qk[0].array()).matrix());
    for (int i = 1; i < hidden_layers; ++i) {
      qk.push_back(net.weight(i) * rk[static_cast<std::size_t>(i - 1)]);
      rk.push_back(((1.0 - ec.h[static_cast<std::size_t>(i)].array().square()) *
                    qk[static_cast<std::size_t>(i)].array())
                       .matrix());
    }
    // c_k(b) = v_k^T W_out r_{L-1}(:, b)
    tc->trace.noalias() +=
        scale * (w_out.transpose() * v).transpose() * rk[static_cast<std::size_t>(hidden_layers - 1)];
  }
}

// Reverse-mode through one dynamics evaluation (and its trace estimate).
// Seeds: lambda_g on the output, lambda_tau on the trace estimate. Adds the
// input-state adjoint into *lambda_z and parameter gradients into *grads.
void backward_stage(const DynamicsNet& net, const EvalCache& ec, const TraceCache* tc,
                    const Eigen::MatrixXd& lambda_g, const Eigen::RowVectorXd& lambda_tau,
                    ParamGrads* grads, Eigen::MatrixXd* lambda_z) {
  const int d = net.state_dim();
  const int layers = net.layer_count();
  const int hidden_layers = layers - 1;
  const Eigen::Index batch = ec.u.cols();

  // Activation-derivative adjoints contributed by the trace path.
  std::vector<Eigen::MatrixXd> extra(static_cast<std::size_t>(hidden_layers));
  for (int i = 0; i < hidden_layers; ++i) {
    extra[static_cast<std::size_t>(i)] =
        Eigen::MatrixXd::Zero(ec.h[static_cast<std::size_t>(i)].rows(), batch);
  }

  if (tc != nullptr) {
    const Eigen::MatrixXd& w_out = net.weight(layers - 1);
    for (Eigen::Index k = 0; k < tc->probes.cols(); ++k) {
      const Eigen::VectorXd v = tc->probes.col(k);
      if (hidden_layers == 0) {
        grads->dw[0].block(0, 0, d, d).noalias() +=
            (tc->scale * lambda_tau.sum()) * (v * v.transpose());
        continue;
      }
      const auto& qk = tc->q[static_cast<std::size_t>(k)];
      const auto& rk = tc->r[static_cast<std::size_t>(k)];
      const int last = hidden_layers - 1;

      // dW_out += scale * v (r_{last} lambda_tau^T)^T
      grads->dw[static_cast<std::size_t>(layers - 1)].noalias() +=
          v * (rk[static_cast<std::size_t>(last)] * (tc->scale * lambda_tau.transpose()))
                  .transpose();

      Eigen::MatrixXd lam_r = (w_out.transpose() * v) * (tc->scale * lambda_tau);
      for (int i = last; i >= 0; --i) {
        const Eigen::MatrixXd& h = ec.h[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd& q = qk[static_cast<std::size_t>(i)];
        extra[static_cast<std::size_t>(i)].array() +=
            -2.0 * h.array() * (lam_r.array() * q.array());
        const Eigen::MatrixXd lam_q =
            (lam_r.array() * (1.0 - h.array().square())).matrix();
        if (i == 0) {
          grads->dw[0].leftCols(d).noalias() += lam_q.rowwise().sum() * v.transpose();
        } else {
          grads->dw[static_cast<std::size_t>(i)].noalias() +=
              lam_q * rk[static_cast<std::size_t>(i - 1)].transpose();
          lam_r.noalias() = net.weight(i).transpose() * lam_q;
        }
      }
    }
  }

  // Main path.
  if (hidden_layers == 0) {
    grads->dw[0].noalias() += lambda_g * ec.u.transpose();
    grads->db[0].noalias() += lambda_g.rowwise().sum();
    lambda_z->noalias() += net.weight(0).leftCols(d).transpose() * lambda_g;
    return;
  }

  grads->dw[static_cast<std::size_t>(layers - 1)].noalias() +=
      lambda_g * ec.h[static_cast<std::size_t>(hidden_layers - 1)].transpose();
  grads->db[static_cast<std::size_t>(layers - 1)].noalias() += lambda_g.rowwise().sum();

  Eigen::MatrixXd lam_h = net.weight(layers - 1).transpose() * lambda_g +
                          extra[static_cast<std::size_t>(hidden_layers - 1)];
  for (int i = hidden_layers - 1; i >= 0; --i) {
    const Eigen::MatrixXd& h = ec.h[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd lam_p = (lam_h.array() * (1.0 - h.array().square())).matrix();
    const Eigen::MatrixXd& in = i == 0 ? ec.u : ec.h[static_cast<std::size_t>(i - 1)];
    grads->dw[static_cast<std::size_t>(i)].noalias() += lam_p * in.transpose();
    grads->db[static_cast<std::size_t>(i)].noalias() += lam_p.rowwise().sum();
    if (i > 0) {
      lam_h = net.weight(i).transpose() * lam_p + extra[static_cast<std::size_t>(i - 1)];
    } else {
      lambda_z->noalias() += net.weight(0).leftCols(d).transpose() * lam_p;
    }
  }
}

Eigen::MatrixXd draw_probes(int d, const TraceSpec& spec, int step, int stage) {
  if (spec.method == TraceMethod::kExact) {
    return Eigen::MatrixXd::Identity(d, d);
  }
  Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(step) * 4ULL + static_cast<std::uint64_t>(stage)));
  Eigen::MatrixXd v(d, spec.probes);
  for (int k = 0; k < spec.probes; ++k) {
    for (int i = 0; i < d; ++i) v(i, k) = rng.rademacher();
  }
  return v;
}

double trace_scale(int d, const TraceSpec& spec) {
  return spec.method == TraceMethod::kExact ? 1.0 : 1.0 / static_cast<double>(spec.probes);
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": state diverged (non-finite values)");
  }
}

// One RK4 step of the augmented system (state + accumulated trace).
struct StageEval {
  EvalCache ec;
  TraceCache tc;
};

void rk4_step(const DynamicsNet& net, const Eigen::MatrixXd& attrs, const TraceSpec* trace,
              int step, double t, double h, Eigen::MatrixXd* z, Eigen::RowVectorXd* ell,
              StageEval stages[4]) {
  static constexpr double kOffsets[4] = {0.0, 0.5, 0.5, 1.0};
  const int d = net.state_dim();
  Eigen::MatrixXd k_prev;
  Eigen::MatrixXd z_acc = *z;
  Eigen::RowVectorXd ell_acc =
      ell != nullptr ? *ell : Eigen::RowVectorXd::Zero(z->cols());

  for (int s = 0; s < 4; ++s) {
    Eigen::MatrixXd zs = *z;
    if (s > 0) zs.noalias() += (h * kOffsets[s]) * k_prev;
    forward_eval(net, zs, t + h * kOffsets[s], attrs, &stages[s].ec);
    if (trace != nullptr) {
      forward_trace(net, stages[s].ec, draw_probes(d, *trace, step, s),
                    trace_scale(d, *trace), &stages[s].tc);
    }
    const double w = (s == 0 || s == 3) ? h / 6.0 : h / 3.0;
    z_acc.noalias() += w * stages[s].ec.g;
    if (trace != nullptr) ell_acc.noalias() += w * stages[s].tc.trace;
    k_prev = stages[s].ec.g;
  }
  *z = std::move(z_acc);
  if (ell != nullptr) *ell = std::move(ell_acc);
}

// Fixed-RK4 transport; optionally accumulates the trace integral and stores
// per-step checkpoints for the backward pass.
void rk4_forward(const DynamicsNet& net, const Eigen::MatrixXd& attrs, double t_from,
                 double t_to, int steps, const TraceSpec* trace, Eigen::MatrixXd* z,
                 Eigen::RowVectorXd* ell, std::vector<Eigen::MatrixXd>* checkpoints) {
  if (steps < 4) throw InputError("rk4: need at least 4 steps");
  const double h = (t_to - t_from) / steps;
  StageEval stages[4];
  for (int n = 0; n < steps; ++n) {
    if (checkpoints != nullptr) checkpoints->push_back(*z);
    rk4_step(net, attrs, trace, n, t_from + n * h, h, z, ell, stages);
    check_finite(*z, "rk4");
  }
}

// Reverse sweep: recomputes each step's stages from its checkpoint, then
// accumulates parameter gradients. lambda_ell is constant along the way
// because the trace accumulator never feeds back into the dynamics.
void rk4_backward(const DynamicsNet& net, const Eigen::MatrixXd& attrs, double t_from,
                  double t_to, int steps, const TraceSpec& trace,
                  const std::vector<Eigen::MatrixXd>& checkpoints, Eigen::MatrixXd lambda_z,
                  const Eigen::RowVectorXd& lambda_ell, ParamGrads* grads) {
  const double h = (t_to - t_from) / steps;
  const Eigen::Index batch = lambda_z.cols();
  StageEval stages[4];

  for (int n = steps - 1; n >= 0; --n) {
    Eigen::MatrixXd z = checkpoints[static_cast<std::size_t>(n)];
    Eigen::RowVectorXd ell = Eigen::RowVectorXd::Zero(batch);
    rk4_step(net, attrs, &trace, n, t_from + n * h, h, &z, &ell, stages);

    Eigen::MatrixXd lam_k[4];
    Eigen::RowVectorXd lam_tau[4];
    for (int s = 0; s < 4; ++s) {
      const double w = (s == 0 || s == 3) ? h / 6.0 : h / 3.0;
      lam_k[s] = w * lambda_z;
      lam_tau[s] = w * lambda_ell;
    }

    // Stage dependencies: z_s = z_n + c_s * h * k_{s-1}.
    static constexpr double kOffsets[4] = {0.0, 0.5, 0.5, 1.0};
    Eigen::MatrixXd lambda_z_next = lambda_z;
    for (int s = 3; s >= 1; --s) {
      Eigen::MatrixXd lam_zs = Eigen::MatrixXd::Zero(net.state_dim(), batch);
      backward_stage(net, stages[s].ec, &stages[s].tc, lam_k[s], lam_tau[s], grads, &lam_zs);
      lambda_z_next.noalias() += lam_zs;
      lam_k[s - 1].noalias() += (h * kOffsets[s]) * lam_zs;
    }
    Eigen::MatrixXd lam_z0 = Eigen::MatrixXd::Zero(net.state_dim(), batch);
    backward_stage(net, stages[0].ec, &stages[0].tc, lam_k[0], lam_tau[0], grads, &lam_z0);
    lambda_z_next.noalias() += lam_z0;

    lambda_z = std::move(lambda_z_next);
  }
}

double gaussian_log_density_sum(const Eigen::MatrixXd& z) {
  const double d = static_cast<double>(z.rows());
  const double n = static_cast<double>(z.cols());
  return -0.5 * z.squaredNorm() - 0.5 * d * n * std::log(2.0 * std::numbers::pi);
}

// Dormand-Prince 4(5) with standard step control, for one state vector.
template <typename Fn>
Eigen::VectorXd dopri5(const Fn& f, Eigen::VectorXd y, double t_from, double t_to,
                       double rel_tol, double abs_tol) {
  if (t_from == t_to) return y;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                          e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

  const double dir = t_to > t_from ? 1.0 : -1.0;
  double t = t_from;
  double h = dir * std::min(0.1, std::abs(t_to - t_from));
  int rejected_in_a_row = 0;

  for (int iter = 0; iter < 100000; ++iter) {
    if (dir * (t - t_to) >= 0.0) return y;
    if (dir * (t + h - t_to) > 0.0) h = t_to - t;

    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + h / 5, y + h * (a21 * k1));
    const Eigen::VectorXd k3 = f(t + 3 * h / 10, y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = f(t + 4 * h / 5, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 =
        f(t + 8 * h / 9, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 =
        f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXd k7 = f(t + h, y5);
    const Eigen::VectorXd y4 =
        y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    if (!y5.allFinite()) throw NumericalError("dopri5: state diverged");

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
      const double e = (y5(i) - y4(i)) / sc;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      t += h;
      y = y5;
      rejected_in_a_row = 0;
    } else if (++rejected_in_a_row > 60) {
      throw NumericalError("dopri5: step size underflow");
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= factor;
  }
  throw NumericalError("dopri5: iteration limit reached");
}

Eigen::MatrixXd attrs_matrix(const AttrStats& stats, const std::vector<AttributeVector>& attrs) {
  Eigen::MatrixXd out(kAttributeDim, static_cast<Eigen::Index>(attrs.size()));
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = stats.normalize(attrs[i]);
  }
  return out;
}

}  // namespace

AttributeVector shift_creak(const AttributeVector& a, double beta) {
  AttributeVector out = a;
  out.creak_prob += beta;
  return out;
}

DynamicsNet::DynamicsNet(int state_dim, std::vector<int> hidden_widths, std::uint64_t init_seed)
    : state_dim_(state_dim), hidden_(std::move(hidden_widths)) {
  if (state_dim <= 0) throw InputError("DynamicsNet: state_dim must be positive");
  for (int w : hidden_) {
    if (w <= 0) throw InputError("DynamicsNet: hidden widths must be positive");
  }
  Rng rng(init_seed);
  int in = input_dim();
  for (int width : hidden_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    Eigen::MatrixXd w(width, in);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = scale * rng.normal();
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(width));
    in = width;
  }
  // Zero output layer: a fresh net is the identity flow.
  weights_.push_back(Eigen::MatrixXd::Zero(state_dim_, in));
  biases_.push_back(Eigen::VectorXd::Zero(state_dim_));
}

std::size_t DynamicsNet::param_count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    total += static_cast<std::size_t>(weights_[i].size()) +
             static_cast<std::size_t>(biases_[i].size());
  }
  return total;
}

Eigen::VectorXd DynamicsNet::params_flat() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(param_count()));
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    std::copy(weights_[i].data(), weights_[i].data() + weights_[i].size(), out.data() + at);
    at += weights_[i].size();
    std::copy(biases_[i].data(), biases_[i].data() + biases_[i].size(), out.data() + at);
    at += biases_[i].size();
  }
  return out;
}

void DynamicsNet::set_params_flat(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != param_count()) {
    throw InputError("set_params_flat: size mismatch");
  }
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    std::copy(flat.data() + at, flat.data() + at + weights_[i].size(), weights_[i].data());
    at += weights_[i].size();
    std::copy(flat.data() + at, flat.data() + at + biases_[i].size(), biases_[i].data());
    at += biases_[i].size();
  }
}

Eigen::MatrixXd DynamicsNet::eval(const Eigen::MatrixXd& z, double t,
                                  const Eigen::MatrixXd& attrs) const {
  EvalCache cache;
  forward_eval(*this, z, t, attrs, &cache);
  return std::move(cache.g);
}

Eigen::VectorXd AttrStats::normalize(const AttributeVector& a) const {
  const auto raw = a.to_array();
  Eigen::VectorXd out(kAttributeDim);
  for (int i = 0; i < kAttributeDim; ++i) out(i) = (raw[static_cast<std::size_t>(i)] - mean(i)) / stddev(i);
  return out;
}

Eigen::VectorXd integrate(const DynamicsNet& net, const Eigen::VectorXd& z_start,
                          const Eigen::VectorXd& attr, double from_t, double to_t,
                          const SolverConfig& cfg) {
  if (z_start.size() != net.state_dim() || attr.size() != kAttributeDim) {
    throw InputError("integrate: dimension mismatch");
  }
  if (!z_start.allFinite()) throw InputError("integrate: non-finite start state");
  if (cfg.method == SolverMethod::kAdaptiveRk45) {
    const Eigen::MatrixXd a = attr;
    auto f = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
      return net.eval(y, t, a);
    };
    return dopri5(f, z_start, from_t, to_t, cfg.rel_tol, cfg.abs_tol);
  }
  Eigen::MatrixXd z = z_start;
  rk4_forward(net, attr, from_t, to_t, cfg.steps, nullptr, &z, nullptr, nullptr);
  return z.col(0);
}

Eigen::MatrixXd integrate_batch(const DynamicsNet& net, const Eigen::MatrixXd& z_start,
                                const Eigen::MatrixXd& attrs, double from_t, double to_t,
                                int steps) {
  Eigen::MatrixXd z = z_start;
  rk4_forward(net, attrs, from_t, to_t, steps, nullptr, &z, nullptr, nullptr);
  return z;
}

double jacobian_trace(const DynamicsNet& net, const Eigen::VectorXd& z, double t,
                      const Eigen::VectorXd& attr) {
  EvalCache ec;
  forward_eval(net, z, t, attr, &ec);
  TraceCache tc;
  forward_trace(net, ec, Eigen::MatrixXd::Identity(net.state_dim(), net.state_dim()), 1.0, &tc);
  return tc.trace(0);
}

std::vector<double> hutchinson_trace_samples(const DynamicsNet& net, const Eigen::VectorXd& z,
                                             double t, const Eigen::VectorXd& attr, int n_probes,
                                             std::uint64_t seed) {
  EvalCache ec;
  forward_eval(net, z, t, attr, &ec);
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_probes));
  for (int k = 0; k < n_probes; ++k) {
    Eigen::MatrixXd v(net.state_dim(), 1);
    for (int i = 0; i < net.state_dim(); ++i) v(i, 0) = rng.rademacher();
    TraceCache tc;
    forward_trace(net, ec, v, 1.0, &tc);
    out.push_back(tc.trace(0));
  }
  return out;
}

double log_likelihood(const FlowModel& model, const Eigen::VectorXd& s,
                      const AttributeVector& a) {
  return log_likelihood_batch(model, s, {a})(0);
}

Eigen::VectorXd log_likelihood_batch(const FlowModel& model, const Eigen::MatrixXd& s,
                                     const std::vector<AttributeVector>& attrs) {
  const int d = model.net.state_dim();
  if (s.rows() != d) throw InputError("log_likelihood: embedding dimension mismatch");
  if (static_cast<std::size_t>(s.cols()) != attrs.size()) {
    throw InputError("log_likelihood: attribute count mismatch");
  }
  const Eigen::MatrixXd a = attrs_matrix(model.attr_stats, attrs);

  if (model.solver.method == SolverMethod::kAdaptiveRk45) {
    // Augmented state [z; ell], integrated per sample.
    Eigen::VectorXd out(s.cols());
    for (Eigen::Index b = 0; b < s.cols(); ++b) {
      const Eigen::VectorXd attr = a.col(b);
      auto f = [&](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        Eigen::VectorXd dy(d + 1);
        const Eigen::VectorXd z = y.head(d);
        dy.head(d) = model.net.eval(z, t, attr);
        dy(d) = jacobian_trace(model.net, z, t, attr);
        return dy;
      };
      Eigen::VectorXd y0(d + 1);
      y0.head(d) = s.col(b);
      y0(d) = 0.0;
      const Eigen::VectorXd y = dopri5(f, y0, kTimeData, kTimeLatent, model.solver.rel_tol,
                                       model.solver.abs_tol);
      out(b) = -0.5 * y.head(d).squaredNorm() -
               0.5 * d * std::log(2.0 * std::numbers::pi) + y(d);
    }
    return out;
  }

  TraceSpec trace{model.trace, model.hutchinson_probes, model.training_seed};
  Eigen::MatrixXd z = s;
  Eigen::RowVectorXd ell = Eigen::RowVectorXd::Zero(s.cols());
  rk4_forward(model.net, a, kTimeData, kTimeLatent, model.solver.steps, &trace, &z, &ell,
              nullptr);
  Eigen::VectorXd out(s.cols());
  for (Eigen::Index b = 0; b < s.cols(); ++b) {
    out(b) = -0.5 * z.col(b).squaredNorm() - 0.5 * d * std::log(2.0 * std::numbers::pi) + ell(b);
  }
  return out;
}

NllResult nll_with_gradient(const DynamicsNet& net, const Eigen::MatrixXd& s,
                            const Eigen::MatrixXd& attrs, int rk4_steps, TraceMethod trace,
                            int hutchinson_probes, std::uint64_t probe_seed) {
  const Eigen::Index batch = s.cols();
  const TraceSpec spec{trace, hutchinson_probes, probe_seed};

  std::vector<Eigen::MatrixXd> checkpoints;
  checkpoints.reserve(static_cast<std::size_t>(rk4_steps));
  Eigen::MatrixXd z = s;
  Eigen::RowVectorXd ell = Eigen::RowVectorXd::Zero(batch);
  rk4_forward(net, attrs, kTimeData, kTimeLatent, rk4_steps, &spec, &z, &ell, &checkpoints);

  NllResult result;
  result.nll = -(gaussian_log_density_sum(z) + ell.sum()) / static_cast<double>(batch);

  ParamGrads grads(net);
  const Eigen::MatrixXd lambda_z = z / static_cast<double>(batch);
  const Eigen::RowVectorXd lambda_ell =
      Eigen::RowVectorXd::Constant(batch, -1.0 / static_cast<double>(batch));
  rk4_backward(net, attrs, kTimeData, kTimeLatent, rk4_steps, spec, checkpoints, lambda_z,
               lambda_ell, &grads);
  result.grad = grads.flat();
  return result;
}

double nll_value(const DynamicsNet& net, const Eigen::MatrixXd& s, const Eigen::MatrixXd& attrs,
                 int rk4_steps, TraceMethod trace, int hutchinson_probes,
                 std::uint64_t probe_seed) {
  const TraceSpec spec{trace, hutchinson_probes, probe_seed};
  Eigen::MatrixXd z = s;
  Eigen::RowVectorXd ell = Eigen::RowVectorXd::Zero(s.cols());
  rk4_forward(net, attrs, kTimeData, kTimeLatent, rk4_steps, &spec, &z, &ell, nullptr);
  return -(gaussian_log_density_sum(z) + ell.sum()) / static_cast<double>(s.cols());
}

FlowModel train(const std::vector<std::pair<Eigen::VectorXd, AttributeVector>>& data,
                const TrainHyper& hyper, const SolverConfig& solver, const FlowArch& arch) {
  if (data.empty()) throw InputError("train: empty dataset");
  const int d = static_cast<int>(data[0].first.size());
  const std::size_t n = data.size();
  if (n < static_cast<std::size_t>(10 * d)) {
    throw InputError("train: need at least 10*d samples");
  }
  if (hyper.batch_size <= 0) throw InputError("train: batch_size must be positive");

  FlowModel model;
  model.solver = solver;
  model.solver.method = SolverMethod::kFixedRk4;  // training differentiates the fixed solver
  model.trace = arch.trace;
  model.hutchinson_probes = arch.hutchinson_probes;
  model.training_seed = hyper.seed;

  // Attribute normalization stats from the training data.
  Eigen::MatrixXd raw(kAttributeDim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto arr = data[i].second.to_array();
    for (int j = 0; j < kAttributeDim; ++j) raw(j, static_cast<Eigen::Index>(i)) = arr[static_cast<std::size_t>(j)];
  }
  model.attr_stats.mean = raw.rowwise().mean();
  for (int j = 0; j < kAttributeDim; ++j) {
    const double var =
        (raw.row(j).array() - model.attr_stats.mean(j)).square().sum() / static_cast<double>(n);
    model.attr_stats.stddev(j) = var > 1e-16 ? std::sqrt(var) : 1.0;
  }

  Eigen::MatrixXd s(d, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd a(kAttributeDim, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (data[i].first.size() != d) throw InputError("train: inconsistent embedding dims");
    s.col(static_cast<Eigen::Index>(i)) = data[i].first;
    a.col(static_cast<Eigen::Index>(i)) = model.attr_stats.normalize(data[i].second);
  }

  model.net = DynamicsNet(d, arch.hidden, mix_seed(hyper.seed, 0x6e6574ULL));

  // Adam, fixed batch order from the seed.
  const std::size_t pcount = model.net.param_count();
  Eigen::VectorXd params = model.net.params_flat();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pcount));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pcount));
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long adam_t = 0;

  const std::size_t batch_size = static_cast<std::size_t>(hyper.batch_size);
  const std::size_t batches_per_epoch = std::max<std::size_t>(1, n / std::min(n, batch_size));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(hyper.seed, 0x10000ULL + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.below(i));
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      Eigen::MatrixXd sb(d, static_cast<Eigen::Index>(batch_size));
      Eigen::MatrixXd ab(kAttributeDim, static_cast<Eigen::Index>(batch_size));
      for (std::size_t j = 0; j < batch_size; ++j) {
        const std::size_t idx = order[(b * batch_size + j) % n];  // wrap-around
        sb.col(static_cast<Eigen::Index>(j)) = s.col(static_cast<Eigen::Index>(idx));
        ab.col(static_cast<Eigen::Index>(j)) = a.col(static_cast<Eigen::Index>(idx));
      }
      const std::uint64_t probe_seed =
          mix_seed(hyper.seed, 0x20000ULL + static_cast<std::uint64_t>(epoch) * 1000003ULL +
                                   static_cast<std::uint64_t>(b));
      const NllResult res = nll_with_gradient(model.net, sb, ab, model.solver.steps, model.trace,
                                              model.hutchinson_probes, probe_seed);
      if (!std::isfinite(res.nll)) {
        throw NumericalError("train: non-finite NLL at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(b));
      }
      ++adam_t;
      for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double g = res.grad(i);
        m(i) = kBeta1 * m(i) + (1.0 - kBeta1) * g;
        v(i) = kBeta2 * v(i) + (1.0 - kBeta2) * g * g;
        const double mhat = m(i) / (1.0 - std::pow(kBeta1, static_cast<double>(adam_t)));
        const double vhat = v(i) / (1.0 - std::pow(kBeta2, static_cast<double>(adam_t)));
        params(i) -= hyper.learning_rate * mhat / (std::sqrt(vhat) + kEps);
      }
      model.net.set_params_flat(params);
    }
  }

  // Quantize to the storage precision, then report the NLL of what will be
  // saved so the model file and later loglik runs agree.
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params(i) = static_cast<double>(static_cast<float>(params(i)));
  }
  model.net.set_params_flat(params);

  std::vector<AttributeVector> all_attrs;
  all_attrs.reserve(n);
  for (const auto& [emb, attr] : data) all_attrs.push_back(attr);
  model.final_nll = -log_likelihood_batch(model, s, all_attrs).mean();
  return model;
}

Eigen::VectorXd manipulate(const FlowModel& model, const Eigen::VectorXd& s,
                           const AttributeVector& a, const AttributeVector& a_target) {
  const Eigen::VectorXd attr_src = model.attr_stats.normalize(a);
  const Eigen::VectorXd attr_dst = model.attr_stats.normalize(a_target);
  const Eigen::VectorXd latent =
      integrate(model.net, s, attr_src, kTimeData, kTimeLatent, model.solver);
  return integrate(model.net, latent, attr_dst, kTimeLatent, kTimeData, model.solver);
}

void save_flow_model(const FlowModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("save_flow_model: cannot write " + path);
  os << kModelMagic << "\n";
  os << "state_dim " << model.net.state_dim() << "\n";
  os << "attr_dim " << kAttributeDim << "\n";
  os << "hidden";
  for (int w : model.net.hidden_widths()) os << " " << w;
  os << "\n";
  os << "solver "
     << (model.solver.method == SolverMethod::kFixedRk4 ? "fixed-rk4" : "adaptive-rk45") << "\n";
  os << "steps " << model.solver.steps << "\n";
  os << "rel_tol " << format_double(model.solver.rel_tol) << "\n";
  os << "abs_tol " << format_double(model.solver.abs_tol) << "\n";
  os << "trace " << (model.trace == TraceMethod::kExact ? "exact" : "hutchinson") << "\n";
  os << "hutchinson_probes " << model.hutchinson_probes << "\n";
  os << "seed " << model.training_seed << "\n";
  os << "final_nll " << format_double(model.final_nll) << "\n";
  os << "attr_mean";
  for (int i = 0; i < kAttributeDim; ++i) os << " " << format_double(model.attr_stats.mean(i));
  os << "\n";
  os << "attr_std";
  for (int i = 0; i < kAttributeDim; ++i) os << " " << format_double(model.attr_stats.stddev(i));
  os << "\n";

  const Eigen::VectorXd params = model.net.params_flat();
  os << "params " << params.size() << "\n";
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const float f = static_cast<float>(params(i));
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(bits & 0xFF), static_cast<unsigned char>((bits >> 8) & 0xFF),
        static_cast<unsigned char>((bits >> 16) & 0xFF),
        static_cast<unsigned char>((bits >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(bytes), 4);
  }
  if (!os) throw InputError("save_flow_model: write failed: " + path);
}

FlowModel load_flow_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_flow_model: cannot open " + path);
  std::string line;
  const auto next_line = [&in, &path](const std::string& key) {
    std::string l;
    if (!std::getline(in, l)) throw InputError("load_flow_model: truncated header in " + path);
    if (l.rfind(key, 0) != 0) {
      throw InputError("load_flow_model: expected '" + key + "' in " + path);
    }
    return l.size() > key.size() ? l.substr(key.size() + 1) : std::string{};
  };

  if (!std::getline(in, line) || line != kModelMagic) {
    throw InputError("load_flow_model: bad magic/version in " + path);
  }
  FlowModel model;
  const int d = static_cast<int>(parse_long(next_line("state_dim")));
  const int attr_dim = static_cast<int>(parse_long(next_line("attr_dim")));
  if (attr_dim != kAttributeDim) throw InputError("load_flow_model: unsupported attr_dim");

  std::vector<int> hidden;
  {
    std::istringstream hs(next_line("hidden"));
    int w;
    while (hs >> w) hidden.push_back(w);
  }
  const std::string solver = next_line("solver");
  if (solver == "fixed-rk4") {
    model.solver.method = SolverMethod::kFixedRk4;
  } else if (solver == "adaptive-rk45") {
    model.solver.method = SolverMethod::kAdaptiveRk45;
  } else {
    throw InputError("load_flow_model: unknown solver '" + solver + "'");
  }
  model.solver.steps = static_cast<int>(parse_long(next_line("steps")));
  model.solver.rel_tol = parse_double(next_line("rel_tol"));
  model.solver.abs_tol = parse_double(next_line("abs_tol"));
  const std::string trace = next_line("trace");
  if (trace == "exact") {
    model.trace = TraceMethod::kExact;
  } else if (trace == "hutchinson") {
    model.trace = TraceMethod::kHutchinson;
  } else {
    throw InputError("load_flow_model: unknown trace method '" + trace + "'");
  }
  model.hutchinson_probes = static_cast<int>(parse_long(next_line("hutchinson_probes")));
  model.training_seed = static_cast<std::uint64_t>(parse_long(next_line("seed")));
  model.final_nll = parse_double(next_line("final_nll"));
  {
    std::istringstream ms(next_line("attr_mean"));
    std::string tok;
    for (int i = 0; i < kAttributeDim; ++i) {
      if (!(ms >> tok)) throw InputError("load_flow_model: short attr_mean");
      model.attr_stats.mean(i) = parse_double(tok);
    }
  }
  {
    std::istringstream ss(next_line("attr_std"));
    std::string tok;
    for (int i = 0; i < kAttributeDim; ++i) {
      if (!(ss >> tok)) throw InputError("load_flow_model: short attr_std");
      model.attr_stats.stddev(i) = parse_double(tok);
    }
  }

  const long n_params = parse_long(next_line("params"));
  model.net = DynamicsNet(d, hidden, 0);
  if (static_cast<std::size_t>(n_params) != model.net.param_count()) {
    throw InputError("load_flow_model: parameter count mismatch in " + path);
  }
  Eigen::VectorXd params(n_params);
  for (long i = 0; i < n_params; ++i) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
      throw InputError("load_flow_model: truncated parameter blob in " + path);
    }
    std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                         (static_cast<std::uint32_t>(bytes[1]) << 8) |
                         (static_cast<std::uint32_t>(bytes[2]) << 16) |
                         (static_cast<std::uint32_t>(bytes[3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    params(i) = static_cast<double>(f);
  }
  model.net.set_params_flat(params);
  return model;
}

}  // namespace creakbench::flow
