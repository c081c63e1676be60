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

#include "creakbench/audio.hpp"
#include "creakbench/pitch.hpp"

namespace creakbench {

/// Utterance-level acoustic correlates of creaky voice. All values are means
/// over voiced frames; gain-invariant by construction.
struct VoiceFeatures {
  double mean_pitch_hz = 0.0;
  double h1h2_db = 0.0;
  double hnr_db = 0.0;
  double cpp_db = 0.0;
  double voiced_fraction = 0.0;
};

/// Level of the first harmonic relative to the second (dB). Per voiced frame
/// the FFT magnitude peaks nearest f0 and 2*f0 are located with parabolic
/// interpolation; the result is the mean over voiced frames.
double h1_h2(const AudioClip& clip, const PitchContour& contour);

/// Harmonics-to-noise ratio (dB): normalized autocorrelation r at the local
/// period, HNR = 10*log10(r / (1 - r)), clamped to [-10, 60], averaged over
/// voiced frames.
double hnr(const AudioClip& clip, const PitchContour& contour);

/// Cepstral peak prominence (dB). Per 40 ms Hann frame: power cepstrum of
/// the dB spectrum, peak searched in quefrencies [1/500, 1/60] s, least-
/// squares line fit over [1 ms, 16 ms]; CPP = peak minus the line at the
/// peak quefrency. Mean over voiced frames when any frame is voiced,
/// otherwise over all frames. Requires at least 40 ms of audio.
double cpp(const AudioClip& clip);

/// Cycle-to-cycle period perturbation in percent, measured on epoch marks in
/// voiced regions. Returns 0 when fewer than three voiced epochs exist.
double jitter_percent(const AudioClip& clip, const PitchContour& contour);

/// VAD -> pitch -> spectral measures. Throws InputError("no speech
/// detected") when VAD finds nothing.
VoiceFeatures extract_features(const AudioClip& clip);

struct FeatureBundle {
  VoiceFeatures features;
  double jitter_pct = 0.0;
};

/// extract_features plus the jitter measure used by the creak proxy, sharing
/// one VAD/pitch pass.
FeatureBundle extract_features_with_jitter(const AudioClip& clip);

}  // namespace creakbench
