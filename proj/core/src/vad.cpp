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

#include "creakbench/vad.hpp"

#include <algorithm>
#include <cmath>

#include "creakbench/error.hpp"

namespace creakbench {

SpeechSegments detect_speech(const AudioClip& clip, double threshold_db, int hangover_frames) {
  // VAD framing is fixed at 25 ms / 10 ms, independent of feature framing.
  const int sr = clip.sample_rate_hz;
  const int frame_len = static_cast<int>(std::lround(0.025 * sr));
  const int hop = static_cast<int>(std::lround(0.010 * sr));
  const std::size_t n_frames = frame_count(clip.size(), frame_len, hop);
  if (n_frames == 0) return {};

  std::vector<double> energy(n_frames, 0.0);
  double peak = 0.0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    double e = 0.0;
    const std::size_t start = f * hop;
    for (int i = 0; i < frame_len; ++i) {
      const double v = clip.samples[start + i];
      e += v * v;
    }
    energy[f] = e;
    peak = std::max(peak, e);
  }
  if (peak <= 0.0) return {};

  const double thresh = peak * std::pow(10.0, threshold_db / 10.0);
  std::vector<char> active(n_frames, 0);
  for (std::size_t f = 0; f < n_frames; ++f) active[f] = energy[f] >= thresh ? 1 : 0;

  // Bridge short silent gaps (hangover) without moving run boundaries.
  if (hangover_frames > 0) {
    std::size_t f = 0;
    while (f < n_frames) {
      if (!active[f]) {
        ++f;
        continue;
      }
      std::size_t run_end = f;
      while (run_end + 1 < n_frames && active[run_end + 1]) ++run_end;
      std::size_t next = run_end + 1;
      while (next < n_frames && !active[next]) ++next;
      if (next < n_frames &&
          next - run_end - 1 <= static_cast<std::size_t>(hangover_frames)) {
        for (std::size_t g = run_end + 1; g < next; ++g) active[g] = 1;
      }
      f = next;
    }
  }

  // Interval boundaries at frame centers, snapped to the clip edges when a
  // run touches the first or last frame.
  const double center_off = 0.5 * frame_len / sr;
  SpeechSegments segments;
  std::size_t f = 0;
  while (f < n_frames) {
    if (!active[f]) {
      ++f;
      continue;
    }
    std::size_t run_end = f;
    while (run_end + 1 < n_frames && active[run_end + 1]) ++run_end;
    SpeechSegment seg;
    seg.start_s = f == 0 ? 0.0 : static_cast<double>(f * hop) / sr + center_off;
    seg.end_s = run_end == n_frames - 1 ? clip.duration_s()
                                        : static_cast<double>(run_end * hop) / sr + center_off;
    if (seg.end_s > seg.start_s) segments.push_back(seg);
    f = run_end + 1;
  }
  return segments;
}

AudioClip apply_segments(const AudioClip& clip, const SpeechSegments& segments) {
  if (segments.empty()) throw InputError("no speech detected");
  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  for (const auto& seg : segments) {
    if (seg.end_s < seg.start_s) throw InputError("apply_segments: inverted segment");
    const auto lo = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(seg.start_s * clip.sample_rate_hz), 0,
                              static_cast<long long>(clip.size())));
    const auto hi = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(seg.end_s * clip.sample_rate_hz),
                              static_cast<long long>(lo), static_cast<long long>(clip.size())));
    out.samples.insert(out.samples.end(), clip.samples.begin() + lo, clip.samples.begin() + hi);
  }
  return out;
}

}  // namespace creakbench
