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

#include "creakbench/creak.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "creakbench/error.hpp"
#include "creakbench/textio.hpp"

namespace creakbench {
namespace {

constexpr const char* kCalibrationMagic = "creakbench-calibration v1";

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double zscore(double v, const FeatureStats& s) {
  return (v - s.mean) / s.stddev;
}

FeatureStats stats_of(const std::vector<double>& xs) {
  FeatureStats s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  var /= static_cast<double>(xs.size());
  s.stddev = std::max(std::sqrt(var), 1e-12);
  return s;
}

}  // namespace

CreakCalibration CreakCalibration::defaults() {
  // Normalization stats fitted on the synthetic creakiness sweep
  // (synth_glottal, creakiness in [0, 1]; f0, jitter, subharmonics and open
  // quotient varied jointly over six base pitches). Weights follow the
  // documented sign convention at magnitudes close to the unconstrained fit.
  CreakCalibration c;
  c.pitch = {134.0, 46.0};
  c.h1h2 = {-0.57, 4.46};
  c.hnr = {17.4, 10.2};
  c.cpp = {1.8, 0.64};
  c.jitter = {3.07, 3.8};
  c.w_pitch = -0.5;
  c.w_h1h2 = -0.4;
  c.w_hnr = -1.1;
  c.w_cpp = -0.4;
  c.w_jitter = 0.4;
  c.bias = -0.2;
  return c;
}

CreakLabel proxy_creak_prob(const CreakFeatures& f, const CreakCalibration& c) {
  const double score = c.bias + c.w_pitch * zscore(f.pitch_hz, c.pitch) +
                       c.w_h1h2 * zscore(f.h1h2_db, c.h1h2) + c.w_hnr * zscore(f.hnr_db, c.hnr) +
                       c.w_cpp * zscore(f.cpp_db, c.cpp) +
                       c.w_jitter * zscore(f.jitter_pct, c.jitter);
  return {logistic(score), CreakLabel::Source::kProxy};
}

bool classify_creak(double prob, Gender gender) {
  return gender == Gender::kMale ? prob >= 0.5 : prob >= 0.3;
}

CreakCalibration calibrate(const std::vector<std::pair<CreakFeatures, double>>& labeled) {
  const std::size_t n = labeled.size();
  if (n < 20) throw InputError("calibrate: need at least 20 samples");

  double label_mean = 0.0;
  for (const auto& [f, p] : labeled) label_mean += p;
  label_mean /= static_cast<double>(n);
  double label_var = 0.0;
  for (const auto& [f, p] : labeled) label_var += (p - label_mean) * (p - label_mean);
  if (label_var <= 0.0) throw InputError("calibrate: labels are constant");

  std::vector<double> pitch(n), h1h2(n), hnrv(n), cppv(n), jit(n);
  for (std::size_t i = 0; i < n; ++i) {
    pitch[i] = labeled[i].first.pitch_hz;
    h1h2[i] = labeled[i].first.h1h2_db;
    hnrv[i] = labeled[i].first.hnr_db;
    cppv[i] = labeled[i].first.cpp_db;
    jit[i] = labeled[i].first.jitter_pct;
  }

  CreakCalibration c;
  c.pitch = stats_of(pitch);
  c.h1h2 = stats_of(h1h2);
  c.hnr = stats_of(hnrv);
  c.cpp = stats_of(cppv);
  c.jitter = stats_of(jit);

  // Least squares of logit(prob) on the z-scored features plus a constant.
  Eigen::MatrixXd design(n, 6);
  Eigen::VectorXd target(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = zscore(pitch[i], c.pitch);
    design(i, 1) = zscore(h1h2[i], c.h1h2);
    design(i, 2) = zscore(hnrv[i], c.hnr);
    design(i, 3) = zscore(cppv[i], c.cpp);
    design(i, 4) = zscore(jit[i], c.jitter);
    design(i, 5) = 1.0;
    const double p = std::clamp(labeled[i].second, 1e-6, 1.0 - 1e-6);
    target(i) = std::log(p / (1.0 - p));
  }
  const Eigen::VectorXd w = design.colPivHouseholderQr().solve(target);
  c.w_pitch = w(0);
  c.w_h1h2 = w(1);
  c.w_hnr = w(2);
  c.w_cpp = w(3);
  c.w_jitter = w(4);
  c.bias = w(5);
  return c;
}

void save_calibration(const CreakCalibration& c, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("save_calibration: cannot write " + path);
  os << kCalibrationMagic << "\n";
  const auto kv = [&os](const char* key, double v) {
    os << key << " " << format_double(v) << "\n";
  };
  kv("pitch_mean", c.pitch.mean);
  kv("pitch_std", c.pitch.stddev);
  kv("h1h2_mean", c.h1h2.mean);
  kv("h1h2_std", c.h1h2.stddev);
  kv("hnr_mean", c.hnr.mean);
  kv("hnr_std", c.hnr.stddev);
  kv("cpp_mean", c.cpp.mean);
  kv("cpp_std", c.cpp.stddev);
  kv("jitter_mean", c.jitter.mean);
  kv("jitter_std", c.jitter.stddev);
  kv("w_pitch", c.w_pitch);
  kv("w_h1h2", c.w_h1h2);
  kv("w_hnr", c.w_hnr);
  kv("w_cpp", c.w_cpp);
  kv("w_jitter", c.w_jitter);
  kv("bias", c.bias);
}

CreakCalibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_calibration: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCalibrationMagic) {
    throw InputError("load_calibration: bad magic/version in " + path);
  }
  std::map<std::string, double> kv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) throw InputError("load_calibration: malformed line");
    kv[line.substr(0, space)] = parse_double(line.substr(space + 1));
  }
  const auto need = [&kv, &path](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InputError("load_calibration: missing key " + key + " in " + path);
    return it->second;
  };
  CreakCalibration c;
  c.pitch = {need("pitch_mean"), need("pitch_std")};
  c.h1h2 = {need("h1h2_mean"), need("h1h2_std")};
  c.hnr = {need("hnr_mean"), need("hnr_std")};
  c.cpp = {need("cpp_mean"), need("cpp_std")};
  c.jitter = {need("jitter_mean"), need("jitter_std")};
  c.w_pitch = need("w_pitch");
  c.w_h1h2 = need("w_h1h2");
  c.w_hnr = need("w_hnr");
  c.w_cpp = need("w_cpp");
  c.w_jitter = need("w_jitter");
  c.bias = need("bias");
  for (const auto& [key, value] : kv) {
    if (key.ends_with("_std") && value <= 0.0) {
      throw InputError("load_calibration: non-positive stddev for " + key);
    }
  }
  return c;
}

}  // namespace creakbench
