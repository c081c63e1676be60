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

namespace creakbench::verify {

/// One verification trial: a manipulated (enroll) utterance scored against
/// an unmanipulated (test) utterance.
struct TrialScore {
  std::string enroll_id;
  std::string test_id;
  bool same_speaker = false;
  double score = 0.0;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  int n_target = 0;
  int n_nontarget = 0;
};

/// u . v / (|u| |v|). Throws InputError on zero vectors or dim mismatch.
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Equal error rate: thresholds sweep the sorted scores (accept when score
/// >= threshold); EER is linearly interpolated where FAR - FRR crosses zero.
/// Throws InputError when either trial class is empty.
EerResult eer(const std::vector<TrialScore>& trials);

struct PairingPolicy {
  enum class Kind { kExhaustive, kSampled } kind = Kind::kExhaustive;
  std::size_t max_trials = 1'000'000;  // kSampled cap, split evenly by class
  std::uint64_t seed = 0;
};

struct EmbeddingRecord {
  std::string id;
  std::string speaker;
  Eigen::VectorXd embedding;
};

/// Builds trials for manipulated embeddings against unmanipulated ones:
/// same-speaker trials pair a manipulated utterance with a *different*
/// utterance of that speaker; different-speaker trials pair it with other
/// speakers' utterances. Deterministic given the policy seed.
std::vector<TrialScore> build_trials(const std::vector<EmbeddingRecord>& originals,
                                     const std::vector<std::pair<std::string, Eigen::VectorXd>>& manipulated,
                                     const PairingPolicy& policy = {});

}  // namespace creakbench::verify
