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

#include <string>
#include <utility>
#include <vector>

#include "creakbench/acoustics.hpp"

namespace creakbench {

enum class Gender { kMale, kFemale };

/// Inputs of the creak labeler.
struct CreakFeatures {
  double pitch_hz = 0.0;
  double h1h2_db = 0.0;
  double hnr_db = 0.0;
  double cpp_db = 0.0;
  double jitter_pct = 0.0;

  static CreakFeatures from(const VoiceFeatures& f, double jitter_pct) {
    return {f.mean_pitch_hz, f.h1h2_db, f.hnr_db, f.cpp_db, jitter_pct};
  }
};

struct CreakLabel {
  double prob = 0.0;
  enum class Source { kExternal, kProxy } source = Source::kProxy;
};

struct FeatureStats {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Logistic creak model over z-scored features. The four correlate weights
/// are negative (creaky voice is low-pitched, low H1-H2, low HNR, low CPP)
/// and the jitter weight is positive.
struct CreakCalibration {
  FeatureStats pitch, h1h2, hnr, cpp, jitter;
  double w_pitch = 0.0, w_h1h2 = 0.0, w_hnr = 0.0, w_cpp = 0.0, w_jitter = 0.0;
  double bias = 0.0;

  /// Constants fitted once on the synthetic creakiness sweep.
  static CreakCalibration defaults();
};

/// logistic(bias + sum_i w_i * z_i).
CreakLabel proxy_creak_prob(const CreakFeatures& features, const CreakCalibration& calib);

/// Per-gender creak decision thresholds: 0.5 (male), 0.3 (female).
bool classify_creak(double prob, Gender gender);

/// Fits calibration from labeled samples: z-stats from the data, weights by
/// least squares of logit(prob) on the z-scored features. Requires >= 20
/// samples with non-degenerate labels.
CreakCalibration calibrate(const std::vector<std::pair<CreakFeatures, double>>& labeled);

/// Versioned key-value text format, decimal floats.
void save_calibration(const CreakCalibration& calib, const std::string& path);
CreakCalibration load_calibration(const std::string& path);

}  // namespace creakbench
