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

#include "creakbench/synthexp.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "creakbench/error.hpp"
#include "creakbench/rng.hpp"
#include "creakbench/stats.hpp"
#include "creakbench/textio.hpp"
#include "creakbench/verify.hpp"

namespace creakbench::synthexp {
namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix the sign convention so the factorization is unique.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

SyntheticCorpus generate_corpus(const SyntheticCorpusSpec& spec) {
  if (spec.d < 3) throw InputError("generate_corpus: need d >= 3");
  if (std::abs(spec.creak_pitch_correlation) >= 1.0) {
    throw InputError("generate_corpus: |rho| must be < 1");
  }
  const int n = spec.n_speakers * spec.utterances_per_speaker;
  SyntheticCorpus corpus;
  corpus.spec = spec;

  Rng rng(mix_seed(spec.seed, 0x636f7270ULL));
  corpus.mixing = random_orthogonal(spec.d, rng);

  corpus.latents.resize(spec.d, n);
  corpus.embeddings.resize(spec.d, n);
  corpus.attrs.resize(static_cast<std::size_t>(n));
  corpus.utterance_ids.resize(static_cast<std::size_t>(n));
  corpus.speaker_ids.resize(static_cast<std::size_t>(spec.n_speakers));
  corpus.speaker_index.resize(static_cast<std::size_t>(n));

  const double rho = spec.creak_pitch_correlation;
  Eigen::Index col = 0;
  for (int s = 0; s < spec.n_speakers; ++s) {
    corpus.speaker_ids[static_cast<std::size_t>(s)] = "spk" + std::to_string(s);
    // (pitch, probit-creak) jointly Gaussian with correlation rho.
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    const double pitch_s = g1;
    const double creak_s = rho * g1 + std::sqrt(1.0 - rho * rho) * g2;
    Eigen::VectorXd nuisance(spec.d - 2);
    for (int i = 0; i < spec.d - 2; ++i) nuisance(i) = rng.normal();

    for (int u = 0; u < spec.utterances_per_speaker; ++u, ++col) {
      Eigen::VectorXd latent(spec.d);
      latent(0) = pitch_s + spec.within_speaker_noise * rng.normal();
      latent(1) = creak_s + spec.within_speaker_noise * rng.normal();
      for (int i = 0; i < spec.d - 2; ++i) {
        latent(2 + i) = nuisance(i) + spec.within_speaker_noise * rng.normal();
      }
      corpus.latents.col(col) = latent;
      corpus.embeddings.col(col) = corpus.mixing * latent;

      flow::AttributeVector a;
      a.mean_pitch_norm = latent(0) + spec.attribute_noise * rng.normal();
      a.creak_prob = std_normal_cdf(latent(1) + spec.attribute_noise * rng.normal());
      corpus.attrs[static_cast<std::size_t>(col)] = a;
      corpus.utterance_ids[static_cast<std::size_t>(col)] =
          "spk" + std::to_string(s) + "_u" + std::to_string(u);
      corpus.speaker_index[static_cast<std::size_t>(col)] = s;
    }
  }
  return corpus;
}

SyntheticCorpus decorrelate_corpus(const SyntheticCorpus& corpus, double b, std::uint64_t seed) {
  SyntheticCorpus out = corpus;
  const Eigen::Index n = corpus.size();
  const double pitch_mean = corpus.latents.row(0).mean();
  Rng rng(mix_seed(seed, 0x6465636fULL));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double new_pitch = pitch_mean + (b / 12.0) * rng.normal();
    out.latents(0, i) = new_pitch;
    out.embeddings.col(i) = corpus.mixing * out.latents.col(i);
    // Pitch is re-measured on the adapted audio; creak labels stay put.
    out.attrs[static_cast<std::size_t>(i)].mean_pitch_norm =
        new_pitch + corpus.spec.attribute_noise * rng.normal();
  }
  return out;
}

double implied_pitch(const Eigen::VectorXd& embedding, const Eigen::MatrixXd& mixing) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(mixing);
  if (!lu.isInvertible()) throw InputError("implied_pitch: singular mixing matrix");
  return lu.solve(embedding)(0);
}

double corpus_creak_pitch_r(const SyntheticCorpus& corpus) {
  std::vector<double> pitch, creak;
  pitch.reserve(static_cast<std::size_t>(corpus.size()));
  creak.reserve(static_cast<std::size_t>(corpus.size()));
  for (Eigen::Index i = 0; i < corpus.size(); ++i) {
    pitch.push_back(corpus.attrs[static_cast<std::size_t>(i)].mean_pitch_norm);
    creak.push_back(corpus.attrs[static_cast<std::size_t>(i)].creak_prob);
  }
  return pearson_r(pitch, creak);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  report.beta_grid = config.beta_grid;

  const SyntheticCorpus corpus = generate_corpus(config.corpus);

  // Speaker-disjoint split.
  const int n_speakers = config.corpus.n_speakers;
  std::vector<int> speakers(static_cast<std::size_t>(n_speakers));
  for (int i = 0; i < n_speakers; ++i) speakers[static_cast<std::size_t>(i)] = i;
  Rng split_rng(mix_seed(config.corpus.seed, 0x73706c69ULL));
  for (std::size_t i = speakers.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(split_rng.below(i + 1));
    std::swap(speakers[i], speakers[j]);
  }
  const int n_train_speakers =
      std::max(1, static_cast<int>(std::lround(config.train_fraction * n_speakers)));
  std::vector<bool> is_train_speaker(static_cast<std::size_t>(n_speakers), false);
  for (int i = 0; i < n_train_speakers; ++i) {
    is_train_speaker[static_cast<std::size_t>(speakers[static_cast<std::size_t>(i)])] = true;
  }

  std::vector<Eigen::Index> train_cols, test_cols;
  for (Eigen::Index i = 0; i < corpus.size(); ++i) {
    if (is_train_speaker[static_cast<std::size_t>(
            corpus.speaker_index[static_cast<std::size_t>(i)])]) {
      train_cols.push_back(i);
    } else {
      test_cols.push_back(i);
    }
  }
  if (test_cols.empty()) throw InputError("run_experiment: empty test split");

  // The adapted corpus re-draws the pitch latents of the training rows.
  const SyntheticCorpus adapted =
      decorrelate_corpus(corpus, config.adaptation_b, config.corpus.seed + 1);

  using Dataset = std::vector<std::pair<Eigen::VectorXd, flow::AttributeVector>>;
  const auto gather = [](const SyntheticCorpus& c, const std::vector<Eigen::Index>& cols) {
    Dataset data;
    data.reserve(cols.size());
    for (Eigen::Index i : cols) {
      data.push_back({c.embeddings.col(i), c.attrs[static_cast<std::size_t>(i)]});
    }
    return data;
  };

  const Dataset base_data = gather(corpus, train_cols);
  const Dataset adapted_data = gather(adapted, train_cols);
  Dataset combined_data = base_data;  // 1:1 union
  combined_data.insert(combined_data.end(), adapted_data.begin(), adapted_data.end());

  // Evaluation material: original (unmanipulated) test embeddings.
  std::vector<verify::EmbeddingRecord> originals;
  originals.reserve(test_cols.size());
  for (Eigen::Index i : test_cols) {
    verify::EmbeddingRecord rec;
    rec.id = corpus.utterance_ids[static_cast<std::size_t>(i)];
    rec.speaker = corpus.speaker_ids[static_cast<std::size_t>(
        corpus.speaker_index[static_cast<std::size_t>(i)])];
    rec.embedding = corpus.embeddings.col(i);
    originals.push_back(std::move(rec));
  }

  const std::vector<std::pair<std::string, const Dataset*>> systems = {
      {"base", &base_data}, {"adapted", &adapted_data}, {"combined", &combined_data}};

  for (const auto& [name, data] : systems) {
    SystemResult result;
    result.name = name;
    try {
      flow::TrainHyper hyper = config.hyper;
      hyper.seed = mix_seed(config.hyper.seed, fnv1a(name));
      const flow::FlowModel model = flow::train(*data, hyper, config.solver, config.arch);
      result.final_nll = model.final_nll;

      // Latent encodings at the original attributes are shared across betas.
      std::vector<std::pair<double, double>> pitch_deltas;
      std::vector<double> pitch_at_zero(test_cols.size());
      for (std::size_t j = 0; j < test_cols.size(); ++j) {
        const Eigen::Index i = test_cols[j];
        const flow::AttributeVector& a = corpus.attrs[static_cast<std::size_t>(i)];
        const Eigen::VectorXd manipulated =
            flow::manipulate(model, corpus.embeddings.col(i), a, a);
        pitch_at_zero[j] = implied_pitch(manipulated, corpus.mixing);
      }

      for (double beta : config.beta_grid) {
        std::vector<std::pair<std::string, Eigen::VectorXd>> manipulated;
        manipulated.reserve(test_cols.size());
        for (std::size_t j = 0; j < test_cols.size(); ++j) {
          const Eigen::Index i = test_cols[j];
          const flow::AttributeVector& a = corpus.attrs[static_cast<std::size_t>(i)];
          Eigen::VectorXd emb = flow::manipulate(model, corpus.embeddings.col(i), a,
                                                 flow::shift_creak(a, beta));
          pitch_deltas.push_back(
              {beta, implied_pitch(emb, corpus.mixing) - pitch_at_zero[j]});
          manipulated.push_back(
              {corpus.utterance_ids[static_cast<std::size_t>(i)], std::move(emb)});
        }
        const verify::EerResult eer_result =
            verify::eer(verify::build_trials(originals, manipulated));
        result.eer_per_beta.push_back(eer_result.eer);
      }

      const MetricSlope slope = metric_slope_vs_beta(pitch_deltas);
      result.pitch_slope_alpha = slope.alpha;
      result.pitch_slope_r = slope.r;
    } catch (const NumericalError&) {
      result.failed = true;
      result.eer_per_beta.assign(config.beta_grid.size(), 1.0);
    }
    report.systems.push_back(std::move(result));
  }

  // Headline pattern: the adapted flow preserves identity better at strong
  // shifts, the combined flow tracks it, and the base flow drags pitch.
  const auto& base = report.systems[0];
  const auto& adapt = report.systems[1];
  const auto& comb = report.systems[2];
  bool pattern = !base.failed && !adapt.failed && !comb.failed;
  for (std::size_t i = 0; i < config.beta_grid.size() && pattern; ++i) {
    const double beta = config.beta_grid[i];
    if (std::abs(beta) >= 0.75 && adapt.eer_per_beta[i] >= base.eer_per_beta[i]) {
      pattern = false;
    }
    if (std::abs(beta) >= 1.249 &&
        adapt.eer_per_beta[i] * 2.0 > base.eer_per_beta[i]) {
      pattern = false;
    }
    const double hi = std::max(comb.eer_per_beta[i], adapt.eer_per_beta[i]);
    const double lo = std::min(comb.eer_per_beta[i], adapt.eer_per_beta[i]);
    if (lo > 0.0 && hi / lo > 2.0) pattern = false;
    if (lo == 0.0 && hi > 0.02) pattern = false;
  }
  if (std::abs(base.pitch_slope_alpha) < 3.0 * std::abs(adapt.pitch_slope_alpha)) {
    pattern = false;
  }
  report.paper_pattern = pattern;
  return report;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "system,beta,eer,pitch_slope\n";
  for (const auto& sys : systems) {
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
      os << sys.name << "," << format_double(beta_grid[i]) << ","
         << format_double(sys.eer_per_beta[i]) << "," << format_double(sys.pitch_slope_alpha)
         << "\n";
    }
  }
  return os.str();
}

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["config"]["n_speakers"] = config.corpus.n_speakers;
  j["config"]["utterances_per_speaker"] = config.corpus.utterances_per_speaker;
  j["config"]["d"] = config.corpus.d;
  j["config"]["creak_pitch_correlation"] = config.corpus.creak_pitch_correlation;
  j["config"]["within_speaker_noise"] = config.corpus.within_speaker_noise;
  j["config"]["seed"] = config.corpus.seed;
  j["config"]["train_fraction"] = config.train_fraction;
  j["config"]["adaptation_b"] = config.adaptation_b;
  j["config"]["batch_size"] = config.hyper.batch_size;
  j["config"]["learning_rate"] = config.hyper.learning_rate;
  j["config"]["max_epochs"] = config.hyper.max_epochs;
  j["config"]["hyper_seed"] = config.hyper.seed;
  j["config"]["rk4_steps"] = config.solver.steps;
  j["config"]["hidden"] = config.arch.hidden;
  j["config"]["trace"] =
      config.arch.trace == flow::TraceMethod::kExact ? "exact" : "hutchinson";
  j["beta_grid"] = beta_grid;
  j["paper_pattern"] = paper_pattern;
  for (const auto& sys : systems) {
    nlohmann::json js;
    js["name"] = sys.name;
    js["eer_per_beta"] = sys.eer_per_beta;
    js["pitch_slope_alpha"] = sys.pitch_slope_alpha;
    js["pitch_slope_r"] = sys.pitch_slope_r;
    js["final_nll"] = sys.final_nll;
    js["failed"] = sys.failed;
    j["systems"].push_back(js);
  }
  return j.dump(2) + "\n";
}

}  // namespace creakbench::synthexp
