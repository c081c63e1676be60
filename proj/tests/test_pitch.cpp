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

#include <algorithm>
#include <vector>

#include "creakbench/audio.hpp"
#include "creakbench/error.hpp"
#include "creakbench/pitch.hpp"
#include "creakbench/synth.hpp"
#include "oracles.hpp"

using namespace creakbench;
namespace ct = creakbench::testing;

namespace {

AudioClip clip_of(std::vector<double> samples) {
  AudioClip c;
  c.samples = std::move(samples);
  return c;
}

PitchContour contour_of(std::vector<double> f0) {
  PitchContour c;
  c.f0_hz = std::move(f0);
  c.voicing_conf.assign(c.f0_hz.size(), 1.0);
  return c;
}

}  // namespace

TEST_SUITE("pitch") {

TEST_CASE("pure 220 Hz sine: all frames voiced at the DFT-oracle frequency") {
  const AudioClip clip = clip_of(ct::sine(220.0, 1.0, 16000, 0.5));
  // Independent oracle: strongest DFT peak of the full signal.
  const double oracle = ct::dft_peak_frequency(clip.samples, 16000, 150.0, 300.0);
  REQUIRE(oracle == doctest::Approx(220.0).epsilon(0.001));

  const PitchContour contour = estimate_contour(clip);
  REQUIRE(contour.size() == 97);
  for (std::size_t f = 0; f < contour.size(); ++f) {
    REQUIRE(contour.voiced(f));
    CHECK(contour.f0_hz[f] >= 219.0);
    CHECK(contour.f0_hz[f] <= 221.0);
  }
}

TEST_CASE("white noise is at least 90 percent unvoiced") {
  const AudioClip clip = clip_of(ct::white_noise(16000, 0.5, 99));
  const PitchContour contour = estimate_contour(clip);
  REQUIRE(contour.size() > 0);
  const double unvoiced_frac =
      1.0 - static_cast<double>(contour.voiced_count()) / static_cast<double>(contour.size());
  CHECK(unvoiced_frac >= 0.90);
}

TEST_CASE("jitter-free glottal source at 120 Hz measures within 2 Hz") {
  GlottalSpec spec = GlottalSpec::constant(120.0);
  spec.noise_db = -120.0;
  const AudioClip clip = synth_glottal(spec, 1.0, 16000, 11);
  const PitchContour contour = estimate_contour(clip);
  CHECK(std::abs(mean_pitch(contour) - 120.0) <= 2.0);
}

TEST_CASE("sine accuracy across the range: every frame within 1 percent") {
  for (double f : {60.0, 100.0, 150.0, 220.0, 300.0, 400.0}) {
    const AudioClip clip = clip_of(ct::sine(f, 0.5, 16000, 0.4));
    const PitchContour contour = estimate_contour(clip);
    REQUIRE(contour.voiced_count() > 0);
    for (std::size_t i = 0; i < contour.size(); ++i) {
      REQUIRE(contour.voiced(i));
      CHECK(std::abs(contour.f0_hz[i] - f) <= 0.01 * f);
    }
  }
}

TEST_CASE("estimate_contour is invariant to global gain") {
  const AudioClip clip = clip_of(ct::sine(173.0, 0.5, 16000, 0.1));
  const PitchContour base = estimate_contour(clip);
  for (double k : {0.5, 4.0}) {  // exact in floating point
    AudioClip scaled = clip;
    for (auto& v : scaled.samples) v *= k;
    const PitchContour s = estimate_contour(scaled);
    REQUIRE(s.size() == base.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.f0_hz[i] == base.f0_hz[i]);
  }
  {  // non-exact gain: near-equal
    AudioClip scaled = clip;
    for (auto& v : scaled.samples) v *= 3.0;
    const PitchContour s = estimate_contour(scaled);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s.f0_hz[i] == doctest::Approx(base.f0_hz[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("time reversal changes the mean by under 2 percent") {
  GlottalSpec spec = GlottalSpec::constant(140.0);
  const AudioClip clip = synth_glottal(spec, 1.0, 16000, 5);
  AudioClip reversed = clip;
  std::reverse(reversed.samples.begin(), reversed.samples.end());
  const double a = mean_pitch(estimate_contour(clip));
  const double b = mean_pitch(estimate_contour(reversed));
  CHECK(std::abs(a - b) / a <= 0.02);
}

TEST_CASE("mean_pitch ignores unvoiced frames") {
  CHECK(mean_pitch(contour_of({100.0, 100.0, 0.0, 100.0})) == doctest::Approx(100.0));
  CHECK(mean_pitch(contour_of({100.0, 200.0})) == doctest::Approx(150.0));
}

TEST_CASE("mean_pitch of an all-unvoiced contour is an error") {
  CHECK_THROWS_WITH_AS(mean_pitch(contour_of({0.0, 0.0, 0.0})), "unvoiced utterance",
                       InputError);
}

TEST_CASE("fully unvoiced input yields an all-zero contour, not an error") {
  const AudioClip clip = clip_of(std::vector<double>(16000, 0.0));
  const PitchContour contour = estimate_contour(clip);
  CHECK(contour.voiced_count() == 0);
}

}  // TEST_SUITE
