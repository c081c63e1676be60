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
#include <vector>

namespace creakbench {

/// Canonical internal sample rate. read_wav() resamples everything to this.
inline constexpr int kCanonicalRateHz = 16000;

/// Mono audio buffer, samples nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalRateHz;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

enum class WindowKind { kRectangular, kHann };

/// Analysis framing. Defaults: 40 ms frames, 10 ms hop.
struct FrameSpec {
  double frame_len_s = 0.040;
  double hop_s = 0.010;
  WindowKind window = WindowKind::kHann;

  int frame_len_samples(int sample_rate_hz) const;
  int hop_samples(int sample_rate_hz) const;
};

/// One windowed analysis frame.
struct Frame {
  double start_s = 0.0;
  std::vector<double> samples;
};

/// Frame count for a signal of `len` samples: floor((len - frame) / hop) + 1,
/// or 0 when the signal is shorter than one frame.
std::size_t frame_count(std::size_t len, int frame_len, int hop);

/// Slices the clip into windowed frames. A clip shorter than one frame
/// yields an empty sequence.
std::vector<Frame> frame_signal(const AudioClip& clip, const FrameSpec& spec);

/// Reads a RIFF/WAVE file (PCM16 or float32, any channel count / rate).
/// Channels are averaged to mono and the result is resampled to 16 kHz.
/// Throws InputError on malformed headers or unsupported encodings.
AudioClip read_wav(const std::string& path);

/// Writes a PCM 16-bit little-endian mono WAV. Throws InputError when the
/// path is not writable.
void write_wav(const AudioClip& clip, const std::string& path);

/// Windowed-sinc resampling to an arbitrary target rate.
AudioClip resample(const AudioClip& clip, int target_rate_hz);

}  // namespace creakbench
