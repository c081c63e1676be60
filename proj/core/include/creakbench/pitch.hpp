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

#include <vector>

#include "creakbench/audio.hpp"

namespace creakbench {

/// Framewise f0 track. f0_hz == 0 encodes an unvoiced frame. Frames are laid
/// out on the same 40 ms / 10 ms grid as frame_signal with defaults, so
/// frame i covers [i * hop_s, i * hop_s + 0.040).
struct PitchContour {
  double hop_s = 0.010;
  double frame_len_s = 0.040;
  std::vector<double> f0_hz;
  std::vector<double> voicing_conf;

  std::size_t size() const { return f0_hz.size(); }
  bool voiced(std::size_t i) const { return f0_hz[i] > 0.0; }
  std::size_t voiced_count() const;
  /// Center time of frame i.
  double frame_center_s(std::size_t i) const { return i * hop_s + 0.5 * frame_len_s; }
  /// Index of the frame whose center is nearest to time t (clamped).
  std::size_t nearest_frame(double t_s) const;
};

struct PitchRange {
  double f_min_hz = 50.0;
  double f_max_hz = 500.0;
};

/// Difference-function (YIN-style) f0 estimator: cumulative-mean-normalized
/// difference, absolute threshold 0.15, parabolic interpolation of the
/// minimum, then a 5-frame median filter to suppress octave errors. Frames
/// that fail the threshold are marked unvoiced. Gain-invariant.
PitchContour estimate_contour(const AudioClip& clip, const PitchRange& range = {});

/// Arithmetic mean of f0 over voiced frames only. Throws InputError
/// ("unvoiced utterance") when no frame is voiced.
double mean_pitch(const PitchContour& contour);

}  // namespace creakbench
