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

#include <cstdint>
#include <string>
#include <vector>

#include "creakbench/flow.hpp"

namespace creakbench::synthexp {

/// Synthetic speaker-embedding corpus with a controlled creak-to-pitch
/// correlation. Latents are [pitch, probit(creak), nuisance...]; speakers
/// own the nuisance offset and their (pitch, creak) pair; utterances add
/// within-speaker noise; embeddings mix the latents through a random
/// orthogonal matrix.
struct SyntheticCorpusSpec {
  int n_speakers = 200;
  int utterances_per_speaker = 5;
  int d = 8;
  double creak_pitch_correlation = -0.7;
  double within_speaker_noise = 0.05;
  /// Measurement noise on the extracted attributes (the labelers observe the
  /// latents imperfectly; this is what lets a correlated corpus teach the
  /// flow to read pitch off the creak label).
  double attribute_noise = 0.3;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  SyntheticCorpusSpec spec;
  Eigen::MatrixXd mixing;            // d x d orthogonal
  Eigen::MatrixXd latents;           // d x N (ground truth)
  Eigen::MatrixXd embeddings;        // d x N
  std::vector<flow::AttributeVector> attrs;
  std::vector<std::string> utterance_ids;
  std::vector<std::string> speaker_ids;
  std::vector<int> speaker_index;    // per utterance

  Eigen::Index size() const { return embeddings.cols(); }
};

SyntheticCorpus generate_corpus(const SyntheticCorpusSpec& spec);

/// Attribute-space analogue of the pitch-shift adaptation: the pitch latent
/// of every utterance is replaced by the corpus mean plus (b/12)-scaled
/// Gaussian noise, embeddings are recomputed through the mixing matrix, and
/// creak labels stay put.
SyntheticCorpus decorrelate_corpus(const SyntheticCorpus& corpus, double b = 2.0,
                                   std::uint64_t seed = 1);

/// Ground-truth pitch read-back: first latent coordinate of W^-1 e. The
/// speaker offset lives in the nuisance coordinates, so it cancels exactly.
double implied_pitch(const Eigen::VectorXd& embedding, const Eigen::MatrixXd& mixing);

/// Sample Pearson correlation between the creak probabilities and pitch
/// latents of a corpus (speaker-level).
double corpus_creak_pitch_r(const SyntheticCorpus& corpus);

struct ExperimentConfig {
  SyntheticCorpusSpec corpus;
  flow::TrainHyper hyper{200, 1e-3, 60, 0};
  flow::SolverConfig solver;
  flow::FlowArch arch;
  double train_fraction = 0.8;
  double adaptation_b = 2.0;
  std::vector<double> beta_grid = {-1.25, -1.0, -0.75, -0.5, -0.25, 0.0,
                                   0.25,  0.5,  0.75,  1.0,  1.25};
};

struct SystemResult {
  std::string name;
  std::vector<double> eer_per_beta;
  double pitch_slope_alpha = 0.0;
  double pitch_slope_r = 0.0;
  double final_nll = 0.0;
  bool failed = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<double> beta_grid;
  std::vector<SystemResult> systems;  // base, adapted, combined
  bool paper_pattern = false;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Trains the base flow on the correlated corpus, the adapted flow on the
/// decorrelated one and the combined flow on their 1:1 union; manipulates
/// held-out embeddings along the beta grid; reports EER against
/// unmanipulated embeddings and the implied-pitch slope per system.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace creakbench::synthexp
