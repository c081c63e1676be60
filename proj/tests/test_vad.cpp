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

#include <doctest.h>

#include <vector>

#include "creakbench/audio.hpp"
#include "creakbench/error.hpp"
#include "creakbench/vad.hpp"
#include "oracles.hpp"

using namespace creakbench;
namespace ct = creakbench::testing;

namespace {

AudioClip clip_of(std::vector<double> samples) {
  AudioClip c;
  c.samples = std::move(samples);
  return c;
}

}  // namespace

TEST_SUITE("vad") {

TEST_CASE("digital silence has no speech") {
  const AudioClip clip = clip_of(std::vector<double>(16000, 0.0));
  CHECK(detect_speech(clip).empty());
}

TEST_CASE("silence-tone-silence finds one segment at the tone boundaries") {
  std::vector<double> x(32000, 0.0);
  const auto tone = ct::sine(220.0, 1.0, 16000, 0.5);
  std::copy(tone.begin(), tone.end(), x.begin() + 8000);
  const AudioClip clip = clip_of(std::move(x));

  const SpeechSegments segments = detect_speech(clip);
  REQUIRE(segments.size() == 1);
  CHECK(segments[0].start_s == doctest::Approx(0.5).epsilon(0.021));
  CHECK(segments[0].end_s == doctest::Approx(1.5).epsilon(0.0134));
  // +- one hop (10 ms) around the true boundaries
  CHECK(std::abs(segments[0].start_s - 0.5) <= 0.010 + 1e-9);
  CHECK(std::abs(segments[0].end_s - 1.5) <= 0.010 + 1e-9);
}

TEST_CASE("a full-scale tone throughout is one whole-clip segment") {
  const AudioClip clip = clip_of(ct::sine(180.0, 2.0, 16000, 0.99));
  const SpeechSegments segments = detect_speech(clip);
  REQUIRE(segments.size() == 1);
  CHECK(segments[0].start_s == 0.0);
  CHECK(segments[0].end_s == doctest::Approx(2.0));
}

TEST_CASE("hangover bridges short gaps but not long ones") {
  // 0.3 s tone, 40 ms gap, 0.3 s tone: bridged into one segment.
  std::vector<double> x;
  auto tone = ct::sine(200.0, 0.3, 16000, 0.5);
  x.insert(x.end(), tone.begin(), tone.end());
  x.insert(x.end(), 640, 0.0);
  x.insert(x.end(), tone.begin(), tone.end());
  CHECK(detect_speech(clip_of(x)).size() == 1);

  // 0.3 s tone, 400 ms gap, 0.3 s tone: two segments.
  std::vector<double> y;
  y.insert(y.end(), tone.begin(), tone.end());
  y.insert(y.end(), 6400, 0.0);
  y.insert(y.end(), tone.begin(), tone.end());
  CHECK(detect_speech(clip_of(y)).size() == 2);
}

TEST_CASE("segments are sorted, disjoint, and never exceed the clip duration") {
  std::vector<double> x(48000, 0.0);
  auto tone = ct::sine(150.0, 0.4, 16000, 0.7);
  std::copy(tone.begin(), tone.end(), x.begin() + 4000);
  std::copy(tone.begin(), tone.end(), x.begin() + 24000);
  const AudioClip clip = clip_of(std::move(x));

  const SpeechSegments segments = detect_speech(clip);
  REQUIRE(segments.size() >= 1);
  double total = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    CHECK(segments[i].end_s > segments[i].start_s);
    if (i > 0) CHECK(segments[i].start_s >= segments[i - 1].end_s);
    total += segments[i].duration_s();
  }
  CHECK(total <= clip.duration_s() + 1e-9);
}

TEST_CASE("detection is invariant to global gain") {
  std::vector<double> x(24000, 0.0);
  auto tone = ct::sine(260.0, 0.6, 16000, 0.2);
  std::copy(tone.begin(), tone.end(), x.begin() + 6000);

  const SpeechSegments base = detect_speech(clip_of(x));
  for (double k : {0.25, 2.0, 64.0}) {
    std::vector<double> scaled(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = k * x[i];
    const SpeechSegments s = detect_speech(clip_of(scaled));
    REQUIRE(s.size() == base.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s[i].start_s == base[i].start_s);
      CHECK(s[i].end_s == base[i].end_s);
    }
  }
}

TEST_CASE("apply_segments: whole clip is identity") {
  const AudioClip clip = clip_of(ct::sine(200.0, 1.0, 16000, 0.5));
  const AudioClip out = apply_segments(clip, {{0.0, clip.duration_s()}});
  CHECK(out.samples == clip.samples);
}

TEST_CASE("apply_segments: durations add") {
  const AudioClip clip = clip_of(ct::sine(200.0, 2.0, 16000, 0.5));
  const AudioClip out = apply_segments(clip, {{0.1, 0.4}, {1.0, 1.3}});
  CHECK(out.size() == 9600);  // 0.6 s at 16 kHz
}

TEST_CASE("apply_segments: empty segments raise the no-speech error") {
  const AudioClip clip = clip_of(std::vector<double>(16000, 0.0));
  CHECK_THROWS_WITH_AS(apply_segments(clip, {}), "no speech detected", InputError);
}

}  // TEST_SUITE
