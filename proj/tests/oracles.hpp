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

// Test-only reference implementations. Everything here is deliberately
// independent of the library code paths it is used to check: naive DFT
// instead of the FFT, exhaustive sweeps instead of single-pass algorithms.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace creakbench::testing {

/// Naive DFT magnitude at an arbitrary (fractional-bin) frequency.
inline double dft_magnitude(const std::vector<double>& x, double freq_hz, int sr) {
  std::complex<double> acc(0.0, 0.0);
  const double w = 2.0 * std::numbers::pi * freq_hz / sr;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return std::abs(acc);
}

/// Frequency of the strongest spectral peak in [lo_hz, hi_hz], located by a
/// coarse scan plus golden-section refinement. Independent pitch oracle.
inline double dft_peak_frequency(const std::vector<double>& x, int sr, double lo_hz,
                                 double hi_hz, double step_hz = 0.5) {
  double best_f = lo_hz, best_m = -1.0;
  for (double f = lo_hz; f <= hi_hz; f += step_hz) {
    const double m = dft_magnitude(x, f, sr);
    if (m > best_m) {
      best_m = m;
      best_f = f;
    }
  }
  double a = best_f - step_hz, b = best_f + step_hz;
  for (int it = 0; it < 40; ++it) {
    const double m1 = a + (b - a) * 0.382;
    const double m2 = a + (b - a) * 0.618;
    if (dft_magnitude(x, m1, sr) < dft_magnitude(x, m2, sr)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  return 0.5 * (a + b);
}

/// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(xs), ry = ranks(ys);
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Sine helper at 16 kHz.
inline std::vector<double> sine(double freq_hz, double duration_s, int sr,
                                double amplitude = 0.5, double phase = 0.0) {
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sr));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / sr + phase);
  }
  return x;
}

/// Deterministic white noise from std::mt19937_64 (test-side generator,
/// distinct from the library Rng).
inline std::vector<double> white_noise(std::size_t n, double amplitude, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

inline double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
}

/// Scratch directory unique per test binary run; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    namespace fs = std::filesystem;
    path_ = fs::temp_directory_path() / ("creakbench_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace creakbench::testing
