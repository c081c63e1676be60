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

#include "creakbench/psola.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "creakbench/error.hpp"

namespace creakbench {
namespace {

constexpr double kRatioMin = 0.25;
constexpr double kRatioMax = 4.0;
// Pseudo-mark spacing in unvoiced regions: 10 ms.
constexpr double kUnvoicedSpacingS = 0.010;

void check_alignment(const AudioClip& clip, const PitchContour& contour, const char* what) {
  const FrameSpec spec{contour.frame_len_s, contour.hop_s, WindowKind::kRectangular};
  const std::size_t expect = frame_count(clip.size(), spec.frame_len_samples(clip.sample_rate_hz),
                                         spec.hop_samples(clip.sample_rate_hz));
  if (contour.size() != expect) {
    throw InputError(std::string(what) + ": contour not aligned to clip");
  }
}

}  // namespace

EpochTrain mark_epochs(const AudioClip& clip, const PitchContour& contour) {
  check_alignment(clip, contour, "mark_epochs");
  EpochTrain train;
  const int sr = clip.sample_rate_hz;
  const long n = static_cast<long>(clip.size());
  const double unvoiced_step = kUnvoicedSpacingS * sr;
  if (n == 0) return train;

  long pos = 0;
  bool first = true;
  while (pos < n) {
    const std::size_t fi = contour.size() == 0
                               ? 0
                               : contour.nearest_frame(static_cast<double>(pos) / sr);
    const bool voiced = contour.size() > 0 && contour.voiced(fi);
    const double period = voiced ? sr / contour.f0_hz[fi] : unvoiced_step;

    long mark = pos;
    if (voiced) {
      // Snap to the local waveform maximum within +-period/4 of the
      // prediction (for the first mark: within the first period).
      const long radius = std::max<long>(1, std::lround(period / 4.0));
      long lo = first ? pos : pos - radius;
      long hi = first ? pos + std::lround(period) - 1 : pos + radius;
      lo = std::clamp<long>(lo, 0, n - 1);
      hi = std::clamp<long>(hi, lo, n - 1);
      mark = lo;
      for (long i = lo; i <= hi; ++i) {
        if (clip.samples[static_cast<std::size_t>(i)] >
            clip.samples[static_cast<std::size_t>(mark)]) {
          mark = i;
        }
      }
    }

    if (!train.epochs.empty() && mark <= train.epochs.back()) {
      mark = train.epochs.back() + 1;
    }
    if (mark >= n) break;
    train.epochs.push_back(mark);
    train.periods.push_back(period);
    train.voiced.push_back(voiced);
    pos = mark + std::max<long>(1, std::lround(period));
    first = false;
  }
  return train;
}

ShiftResult shift_pitch(const AudioClip& clip, const PitchContour& source,
                        const PitchContour& target) {
  check_alignment(clip, source, "shift_pitch");
  if (target.size() != source.size() || target.hop_s != source.hop_s) {
    throw InputError("shift_pitch: target contour not aligned with source contour");
  }

  ShiftResult result;
  result.audio.sample_rate_hz = clip.sample_rate_hz;
  result.audio.samples.assign(clip.size(), 0.0);
  if (clip.empty()) return result;

  const EpochTrain train = mark_epochs(clip, source);
  if (train.size() < 2) {
    result.audio.samples = clip.samples;  // too short to resynthesize
    return result;
  }

  const int sr = clip.sample_rate_hz;
  const long n = static_cast<long>(clip.size());

  // Measured spacing is more robust than the contour-derived period.
  std::vector<double> spacing(train.size());
  for (std::size_t i = 0; i + 1 < train.size(); ++i) {
    spacing[i] = static_cast<double>(train.epochs[i + 1] - train.epochs[i]);
  }
  spacing[train.size() - 1] = spacing[train.size() - 2];

  std::vector<double> acc(clip.size(), 0.0);
  std::vector<double> wsum(clip.size(), 0.0);
  long covered_lo = n, covered_hi = -1;

  double s = static_cast<double>(train.epochs.front());
  std::size_t i = 0;  // analysis epoch tracking the synthesis position
  const long last_epoch = train.epochs.back();
  while (s < static_cast<double>(n)) {
    while (i + 1 < train.size() &&
           std::abs(static_cast<double>(train.epochs[i + 1]) - s) <=
               std::abs(static_cast<double>(train.epochs[i]) - s)) {
      ++i;
    }

    double ratio = 1.0;
    if (train.voiced[i]) {
      const std::size_t sf = source.nearest_frame(static_cast<double>(train.epochs[i]) / sr);
      const std::size_t tf = target.nearest_frame(s / sr);
      const double f_src = source.f0_hz[sf];
      const double f_tgt = target.f0_hz[tf] > 0.0 ? target.f0_hz[tf] : f_src;
      if (f_src > 0.0 && f_tgt > 0.0) {
        ratio = f_tgt / f_src;
        if (ratio < kRatioMin || ratio > kRatioMax) {
          ratio = std::clamp(ratio, kRatioMin, kRatioMax);
          result.ratio_clamped = true;
        }
      }
    }

    // Two-period Hann grain centered on the analysis epoch.
    const long half = std::max<long>(2, std::lround(spacing[i]));
    const long center_out = std::lround(s);
    const long center_in = train.epochs[i];
    for (long k = -half; k <= half; ++k) {
      const long src_idx = center_in + k;
      const long dst_idx = center_out + k;
      if (src_idx < 0 || src_idx >= n || dst_idx < 0 || dst_idx >= n) continue;
      const double w =
          0.5 + 0.5 * std::cos(std::numbers::pi * static_cast<double>(k) / (half + 1));
      acc[static_cast<std::size_t>(dst_idx)] +=
          w * clip.samples[static_cast<std::size_t>(src_idx)];
      wsum[static_cast<std::size_t>(dst_idx)] += w;
      covered_lo = std::min(covered_lo, dst_idx);
      covered_hi = std::max(covered_hi, dst_idx);
    }

    s += spacing[i] / ratio;
    if (center_in >= last_epoch && s >= static_cast<double>(n)) break;
  }

  // Inside the synthesized span, normalize by the window sum (floored: the
  // low-energy valleys between widely spaced grains are intentional when
  // lowering pitch). Outside it, keep the input.
  for (long k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    if (k < covered_lo || k > covered_hi) {
      result.audio.samples[idx] = clip.samples[idx];
    } else {
      result.audio.samples[idx] = acc[idx] / std::max(wsum[idx], 0.25);
    }
  }
  return result;
}

}  // namespace creakbench
