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

/// Half-open [start_s, end_s) speech interval.
struct SpeechSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s() const { return end_s - start_s; }
};

using SpeechSegments = std::vector<SpeechSegment>;

/// Energy-based voice activity detection on 25 ms / 10 ms frames. A frame is
/// speech when its energy is within `threshold_db` of the loudest frame;
/// speech runs separated by at most `hangover_frames` silent frames are
/// bridged. The threshold is peak-relative, so the result is invariant to
/// global gain. Digital silence yields an empty list.
SpeechSegments detect_speech(const AudioClip& clip, double threshold_db = -35.0,
                             int hangover_frames = 5);

/// Concatenates the audio inside the segments. Throws InputError("no speech
/// detected") on an empty segment list.
AudioClip apply_segments(const AudioClip& clip, const SpeechSegments& segments);

}  // namespace creakbench
