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

#include "creakbench/pitch.hpp"

#include <algorithm>
#include <cmath>

#include "creakbench/error.hpp"

namespace creakbench {
namespace {

constexpr double kYinThreshold = 0.15;
constexpr int kMedianWindow = 5;

// Parabolic interpolation of the extremum of (y_prev, y0, y_next) around x0;
// returns the fractional offset in [-1, 1] and optionally the refined value.
double parabolic_offset(double y_prev, double y0, double y_next, double* value = nullptr) {
  const double denom = y_prev - 2.0 * y0 + y_next;
  if (std::abs(denom) < 1e-30) {
    if (value) *value = y0;
    return 0.0;
  }
  double d = 0.5 * (y_prev - y_next) / denom;
  d = std::clamp(d, -1.0, 1.0);
  if (value) *value = y0 - 0.25 * (y_prev - y_next) * d;
  return d;
}

}  // namespace

std::size_t PitchContour::voiced_count() const {
  std::size_t n = 0;
  for (double f : f0_hz) {
    if (f > 0.0) ++n;
  }
  return n;
}

std::size_t PitchContour::nearest_frame(double t_s) const {
  if (f0_hz.empty()) return 0;
  const double idx = (t_s - 0.5 * frame_len_s) / hop_s;
  const long i = std::lround(idx);
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(f0_hz.size()) - 1));
}

PitchContour estimate_contour(const AudioClip& clip, const PitchRange& range) {
  if (!(range.f_min_hz > 0.0) || !(range.f_min_hz < range.f_max_hz) ||
      !(range.f_max_hz < clip.sample_rate_hz / 4.0)) {
    throw InputError("estimate_contour: require 0 < f_min < f_max < Nyquist/2");
  }

  const int sr = clip.sample_rate_hz;
  const FrameSpec spec{0.040, 0.010, WindowKind::kRectangular};
  const int frame_len = spec.frame_len_samples(sr);
  const int hop = spec.hop_samples(sr);
  const std::size_t n_frames = frame_count(clip.size(), frame_len, hop);

  PitchContour contour;
  contour.hop_s = spec.hop_s;
  contour.frame_len_s = spec.frame_len_s;
  contour.f0_hz.assign(n_frames, 0.0);
  contour.voicing_conf.assign(n_frames, 0.0);
  if (n_frames == 0) return contour;

  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / range.f_max_hz)));
  int tau_max = static_cast<int>(std::ceil(sr / range.f_min_hz));
  // The difference window and max lag must both fit inside one frame.
  tau_max = std::min(tau_max, frame_len / 2);
  const int window = frame_len - tau_max;

  std::vector<double> diff(static_cast<std::size_t>(tau_max) + 1, 0.0);
  std::vector<double> cmndf(static_cast<std::size_t>(tau_max) + 1, 1.0);

  for (std::size_t f = 0; f < n_frames; ++f) {
    const double* x = clip.samples.data() + f * hop;

    double energy = 0.0;
    for (int i = 0; i < frame_len; ++i) energy += x[i] * x[i];
    if (energy <= 1e-20) continue;  // silent frame stays unvoiced

    diff[0] = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      double d = 0.0;
      for (int i = 0; i < window; ++i) {
        const double delta = x[i] - x[i + tau];
        d += delta * delta;
      }
      diff[tau] = d;
    }

    // Cumulative-mean normalization.
    cmndf[0] = 1.0;
    double running = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      running += diff[tau];
      cmndf[tau] = running > 0.0 ? diff[tau] * tau / running : 1.0;
    }

    // First dip below the absolute threshold, refined to its local minimum.
    int tau_est = 0;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (cmndf[tau] < kYinThreshold) {
        while (tau + 1 <= tau_max && cmndf[tau + 1] < cmndf[tau]) ++tau;
        tau_est = tau;
        break;
      }
    }

    if (tau_est == 0) {
      double best = 2.0;
      for (int tau = tau_min; tau <= tau_max; ++tau) best = std::min(best, cmndf[tau]);
      contour.voicing_conf[f] = std::clamp(1.0 - best, 0.0, 1.0);
      continue;
    }

    double tau_frac = tau_est;
    double dip = cmndf[tau_est];
    if (tau_est > tau_min && tau_est < tau_max) {
      double refined;
      const double off =
          parabolic_offset(cmndf[tau_est - 1], cmndf[tau_est], cmndf[tau_est + 1], &refined);
      tau_frac = tau_est + off;
      dip = std::min(dip, refined);
    }
    contour.f0_hz[f] = sr / tau_frac;
    contour.voicing_conf[f] = std::clamp(1.0 - dip, 0.0, 1.0);
  }

  // Median filtering over voiced neighbors suppresses octave errors.
  std::vector<double> filtered = contour.f0_hz;
  const int half = kMedianWindow / 2;
  std::vector<double> buf;
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (contour.f0_hz[f] <= 0.0) continue;
    buf.clear();
    const long lo = std::max<long>(0, static_cast<long>(f) - half);
    const long hi = std::min<long>(static_cast<long>(n_frames) - 1, static_cast<long>(f) + half);
    for (long g = lo; g <= hi; ++g) {
      if (contour.f0_hz[static_cast<std::size_t>(g)] > 0.0) {
        buf.push_back(contour.f0_hz[static_cast<std::size_t>(g)]);
      }
    }
    std::sort(buf.begin(), buf.end());
    filtered[f] = buf[buf.size() / 2];
  }
  contour.f0_hz = std::move(filtered);
  return contour;
}

double mean_pitch(const PitchContour& contour) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double f : contour.f0_hz) {
    if (f > 0.0) {
      sum += f;
      ++n;
    }
  }
  if (n == 0) throw InputError("unvoiced utterance");
  return sum / static_cast<double>(n);
}

}  // namespace creakbench
