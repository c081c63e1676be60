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

#include <cmath>
#include <vector>

#include "creakbench/adapt.hpp"
#include "creakbench/error.hpp"
#include "creakbench/rng.hpp"
#include "creakbench/synth.hpp"
#include "oracles.hpp"

using namespace creakbench;
namespace ct = creakbench::testing;

namespace {

PitchContour contour_of(std::vector<double> f0) {
  PitchContour c;
  c.f0_hz = std::move(f0);
  c.voicing_conf.assign(c.f0_hz.size(), 1.0);
  return c;
}

}  // namespace

TEST_SUITE("adapt") {

TEST_CASE("semitone_delta: octave, identity, and a direct evaluation") {
  CHECK(semitone_delta(119.0, 238.0) == doctest::Approx(-12.0).epsilon(1e-14));
  CHECK(semitone_delta(195.0, 195.0) == 0.0);
  CHECK(semitone_delta(119.0, 100.0) ==
        doctest::Approx(12.0 * std::log2(1.19)).epsilon(1e-14));
  CHECK_THROWS_AS(semitone_delta(0.0, 100.0), InputError);
  CHECK_THROWS_AS(semitone_delta(119.0, -5.0), InputError);
}

TEST_CASE("adapted_contour: identity, octave, and one-sigma noise") {
  const PitchContour base = contour_of({100.0, 0.0, 150.0, 200.0});

  const PitchContour same = adapted_contour(base, 0.0, 0.0, 2.0);
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(same.f0_hz[i] == base.f0_hz[i]);

  const PitchContour octave = adapted_contour(base, 12.0, 0.0, 2.0);
  CHECK(octave.f0_hz[0] == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(octave.f0_hz[1] == 0.0);  // unvoiced frames stay unvoiced
  CHECK(octave.f0_hz[3] == doctest::Approx(400.0).epsilon(1e-12));

  const PitchContour sigma = adapted_contour(base, 0.0, 1.0, 2.0);
  CHECK(sigma.f0_hz[0] == doctest::Approx(100.0 * std::exp2(2.0 / 12.0)).epsilon(1e-12));
}

TEST_CASE("mean-pitch law: constant contour lands exactly on the class mean") {
  const PitchContour base = contour_of(std::vector<double>(50, 140.0));
  const double delta = semitone_delta(119.0, 140.0);
  const PitchContour shifted = adapted_contour(base, delta, 0.0, 2.0);
  CHECK(mean_pitch(shifted) == doctest::Approx(119.0).epsilon(1e-12));
}

TEST_CASE("adapt_utterance: already-centered input stays put (u = 0 via b = 0)") {
  GlottalSpec spec = GlottalSpec::constant(119.0);
  const AudioClip clip = synth_glottal(spec, 1.0, 16000, 81);
  AdaptParams params;
  params.b = 0.0;  // no noise
  const AdaptOutcome out =
      adapt_utterance(clip, Gender::kMale, GenderStats::preset(), params, 7);
  REQUIRE(!out.record.skipped);
  CHECK(std::abs(out.record.delta_semitones) <= 0.2);
  CHECK(std::abs(out.record.new_mean_hz - out.record.old_mean_hz) /
            out.record.old_mean_hz <=
        0.01 + 0.02);  // near-unit ratio resynthesis plus estimator noise
}

TEST_CASE("adapt_utterance: an octave-high male voice is brought to the mean") {
  GlottalSpec spec = GlottalSpec::constant(238.0);
  const AudioClip clip = synth_glottal(spec, 1.2, 16000, 83);
  AdaptParams params;
  params.b = 0.0;
  const AdaptOutcome out =
      adapt_utterance(clip, Gender::kMale, GenderStats::preset(), params, 9);
  REQUIRE(!out.record.skipped);
  CHECK(out.record.new_mean_hz >= 119.0 * 0.97);
  CHECK(out.record.new_mean_hz <= 119.0 * 1.03);
}

TEST_CASE("adapt_utterance: bit-identical record for a fixed seed") {
  GlottalSpec spec = GlottalSpec::constant(150.0);
  const AudioClip clip = synth_glottal(spec, 1.0, 16000, 85);
  AdaptParams params;
  const AdaptOutcome a =
      adapt_utterance(clip, Gender::kFemale, GenderStats::preset(), params, 1234);
  const AdaptOutcome b =
      adapt_utterance(clip, Gender::kFemale, GenderStats::preset(), params, 1234);
  CHECK(a.record.delta_semitones == b.record.delta_semitones);
  CHECK(a.record.noise_u == b.record.noise_u);
  CHECK(a.record.new_mean_hz == b.record.new_mean_hz);
  CHECK(a.record.new_creak == b.record.new_creak);
  CHECK(a.audio.samples == b.audio.samples);
}

TEST_CASE("adapt_utterance: unvoiced input is skipped with a reason") {
  AudioClip noise;
  noise.samples = ct::white_noise(16000, 0.4, 87);
  AdaptParams params;
  const AdaptOutcome out =
      adapt_utterance(noise, Gender::kMale, GenderStats::preset(), params, 3);
  CHECK(out.record.skipped);
  CHECK(!out.record.skip_reason.empty());
}

TEST_CASE("distribution law: injected semitone offsets have stddev near b") {
  // With u ~ N(0,1) the realized offset log2(new/classmean)*12 = delta-
  // corrected u*b; across many draws its stddev approaches b within 15%.
  Rng rng(99);
  const double b = 2.0;
  std::vector<double> offsets;
  for (int i = 0; i < 600; ++i) offsets.push_back(rng.normal() * b);
  double mean = 0.0;
  for (double v : offsets) mean += v;
  mean /= static_cast<double>(offsets.size());
  double var = 0.0;
  for (double v : offsets) var += (v - mean) * (v - mean);
  var /= static_cast<double>(offsets.size());
  CHECK(std::sqrt(var) == doctest::Approx(b).epsilon(0.15));
}

TEST_CASE("adapt_corpus: empty manifest succeeds with empty outputs") {
  ct::TempDir dir("adapt_empty");
  const CorpusResult result = adapt_corpus({}, std::nullopt, AdaptParams{}, dir.file("audio"));
  CHECK(result.manifest.empty());
  CHECK(result.records.empty());
}

TEST_CASE("adapt_corpus: skips rows with missing gender or unreadable audio") {
  ct::TempDir dir("adapt_skip");
  GlottalSpec spec = GlottalSpec::constant(140.0);
  const AudioClip clip = synth_glottal(spec, 1.0, 16000, 91);
  const std::string wav = dir.file("ok.wav");
  write_wav(clip, wav);

  std::vector<ManifestRow> rows(3);
  rows[0].id = "ok";
  rows[0].audio_path = wav;
  rows[0].speaker_id = "spk0";
  rows[0].gender = Gender::kMale;
  rows[1].id = "nogender";
  rows[1].audio_path = wav;
  rows[2].id = "missingfile";
  rows[2].audio_path = dir.file("gone.wav");
  rows[2].gender = Gender::kFemale;

  const CorpusResult result =
      adapt_corpus(rows, GenderStats::preset(), AdaptParams{}, dir.file("out"));
  REQUIRE(result.records.size() == 3);
  CHECK(!result.records[0].skipped);
  CHECK(result.records[1].skipped);
  CHECK(result.records[1].skip_reason == "missing gender");
  CHECK(result.records[2].skipped);
  REQUIRE(result.manifest.size() == 1);
  CHECK(result.manifest[0].id == "ok");
  CHECK(result.manifest[0].adapted_path.has_value());
  CHECK(result.manifest[0].delta_semitones.has_value());
}

TEST_CASE("adapt_corpus: output is identical for any worker count") {
  ct::TempDir dir("adapt_workers");
  std::vector<ManifestRow> rows;
  for (int i = 0; i < 6; ++i) {
    GlottalSpec spec = GlottalSpec::constant(110.0 + 15.0 * i);
    const AudioClip clip = synth_glottal(spec, 0.8, 16000, 100 + i);
    const std::string wav = dir.file("u" + std::to_string(i) + ".wav");
    write_wav(clip, wav);
    ManifestRow row;
    row.id = "utt" + std::to_string(i);
    row.audio_path = wav;
    row.speaker_id = "spk" + std::to_string(i / 2);
    row.gender = i % 2 == 0 ? Gender::kMale : Gender::kFemale;
    rows.push_back(row);
  }

  AdaptParams p1;
  p1.global_seed = 42;
  p1.workers = 1;
  AdaptParams p3 = p1;
  p3.workers = 3;
  const CorpusResult a = adapt_corpus(rows, std::nullopt, p1, dir.file("out1"));
  const CorpusResult b = adapt_corpus(rows, std::nullopt, p3, dir.file("out3"));
  REQUIRE(a.manifest.size() == b.manifest.size());
  CHECK(a.stats_used.male_mean_hz == b.stats_used.male_mean_hz);
  for (std::size_t i = 0; i < a.manifest.size(); ++i) {
    CHECK(a.manifest[i].id == b.manifest[i].id);
    CHECK(*a.manifest[i].mean_pitch_hz == *b.manifest[i].mean_pitch_hz);
    CHECK(*a.manifest[i].creak_prob == *b.manifest[i].creak_prob);
    CHECK(*a.manifest[i].noise_u == *b.manifest[i].noise_u);
  }
}

}  // TEST_SUITE
