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
#include "creakbench/pitch.hpp"

namespace creakbench {

/// Pitch marks. In voiced regions epochs sit on local waveform maxima, one
/// per period; unvoiced regions carry uniformly spaced pseudo-marks (10 ms).
struct EpochTrain {
  std::vector<long> epochs;      // sample indices, strictly increasing
  std::vector<double> periods;   // local period in samples at each epoch
  std::vector<bool> voiced;      // per-epoch voicing flag

  std::size_t size() const { return epochs.size(); }
};

/// Contour-guided epoch detection: the contour seeds the expected spacing and
/// each mark is placed on the waveform maximum within +-1/4 period of the
/// prediction.
EpochTrain mark_epochs(const AudioClip& clip, const PitchContour& contour);

struct ShiftResult {
  AudioClip audio;
  /// Set when any framewise target/source ratio fell outside [0.25, 4] and
  /// was clamped.
  bool ratio_clamped = false;
};

/// TD-PSOLA resynthesis of `clip` onto `target` (time scale preserved):
/// two-period Hann grains centered on analysis epochs are overlap-added at
/// synthesis epochs spaced by the local target period. Unvoiced regions are
/// copied through. The contours must be aligned with the clip and with each
/// other.
ShiftResult shift_pitch(const AudioClip& clip, const PitchContour& source,
                        const PitchContour& target);

}  // namespace creakbench
