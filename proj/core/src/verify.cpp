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

#include "creakbench/verify.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "creakbench/error.hpp"
#include "creakbench/rng.hpp"

namespace creakbench::verify {

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw InputError("cosine: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu <= 0.0 || nv <= 0.0) throw InputError("cosine: zero vector");
  return u.dot(v) / (nu * nv);
}

EerResult eer(const std::vector<TrialScore>& trials) {
  std::vector<double> targets, nontargets;
  for (const auto& t : trials) {
    (t.same_speaker ? targets : nontargets).push_back(t.score);
  }
  if (targets.empty() || nontargets.empty()) {
    throw InputError("eer: need at least one target and one non-target trial");
  }
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());
  const double nt = static_cast<double>(targets.size());
  const double nn = static_cast<double>(nontargets.size());

  // Candidate thresholds: every distinct score, plus +inf. At threshold v,
  // FAR = P(nontarget >= v) and FRR = P(target < v); FAR falls and FRR
  // rises as v sweeps upward.
  std::vector<double> thresholds;
  thresholds.reserve(trials.size() + 1);
  thresholds.insert(thresholds.end(), targets.begin(), targets.end());
  thresholds.insert(thresholds.end(), nontargets.begin(), nontargets.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const auto far_at = [&](double v) {
    const auto it = std::lower_bound(nontargets.begin(), nontargets.end(), v);
    return static_cast<double>(nontargets.end() - it) / nn;
  };
  const auto frr_at = [&](double v) {
    const auto it = std::lower_bound(targets.begin(), targets.end(), v);
    return static_cast<double>(it - targets.begin()) / nt;
  };

  EerResult result;
  result.n_target = static_cast<int>(targets.size());
  result.n_nontarget = static_cast<int>(nontargets.size());

  double prev_thresh = thresholds.front();
  double prev_far = far_at(prev_thresh);
  double prev_frr = frr_at(prev_thresh);
  if (prev_far <= prev_frr) {  // crossing sits below the lowest score
    result.eer = 0.5 * (prev_far + prev_frr);
    result.threshold = prev_thresh;
    return result;
  }
  for (std::size_t i = 1; i <= thresholds.size(); ++i) {
    const bool past_end = i == thresholds.size();
    const double v = past_end ? thresholds.back() + 1.0 : thresholds[i];
    const double far = far_at(v);
    const double frr = frr_at(v);
    if (far <= frr) {
      // Linear interpolation between the two operating points.
      const double denom = (far - prev_far) - (frr - prev_frr);
      double t = denom != 0.0 ? (prev_frr - prev_far) / denom : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      result.eer = prev_far + t * (far - prev_far);
      result.threshold = prev_thresh + t * (v - prev_thresh);
      return result;
    }
    prev_thresh = v;
    prev_far = far;
    prev_frr = frr;
  }
  result.eer = 0.5 * (prev_far + prev_frr);
  result.threshold = prev_thresh;
  return result;
}

std::vector<TrialScore> build_trials(
    const std::vector<EmbeddingRecord>& originals,
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& manipulated,
    const PairingPolicy& policy) {
  if (manipulated.empty()) throw InputError("build_trials: no manipulated embeddings");
  if (originals.empty()) throw InputError("build_trials: no original embeddings");

  std::unordered_map<std::string, const EmbeddingRecord*> by_id;
  for (const auto& rec : originals) by_id[rec.id] = &rec;

  std::vector<TrialScore> targets, nontargets;
  for (const auto& [id, emb] : manipulated) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw InputError("build_trials: manipulated id '" + id + "' has no original");
    }
    const std::string& speaker = it->second->speaker;
    for (const auto& other : originals) {
      if (other.id == id) continue;  // same utterance never scores itself
      TrialScore trial;
      trial.enroll_id = id;
      trial.test_id = other.id;
      trial.same_speaker = other.speaker == speaker;
      trial.score = cosine(emb, other.embedding);
      (trial.same_speaker ? targets : nontargets).push_back(std::move(trial));
    }
  }

  if (policy.kind == PairingPolicy::Kind::kSampled) {
    const std::size_t cap = policy.max_trials / 2;
    const auto subsample = [&policy](std::vector<TrialScore>& trials, std::size_t cap,
                                     std::uint64_t salt) {
      if (trials.size() <= cap) return;
      Rng rng(mix_seed(policy.seed, salt));
      for (std::size_t i = trials.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(trials[i], trials[j]);
      }
      trials.resize(cap);
    };
    subsample(targets, cap, 1);
    subsample(nontargets, cap, 2);
  }

  std::vector<TrialScore> all;
  all.reserve(targets.size() + nontargets.size());
  all.insert(all.end(), targets.begin(), targets.end());
  all.insert(all.end(), nontargets.begin(), nontargets.end());
  return all;
}

}  // namespace creakbench::verify
