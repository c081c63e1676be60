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

#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include "creakbench/audio.hpp"
#include "creakbench/error.hpp"
#include "creakbench/pitch.hpp"
#include "creakbench/synth.hpp"
#include "oracles.hpp"

using namespace creakbench;
namespace ct = creakbench::testing;

namespace {

// Test-side WAV encoder, independent of write_wav.
void append_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
void append_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xFF));
  b.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

std::vector<unsigned char> make_wav_pcm16(const std::vector<std::int16_t>& interleaved,
                                          int channels, int rate) {
  std::vector<unsigned char> b;
  const std::uint32_t data_len = static_cast<std::uint32_t>(2 * interleaved.size());
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  append_u32(b, 36 + data_len);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  append_u32(b, 16);
  append_u16(b, 1);
  append_u16(b, static_cast<std::uint16_t>(channels));
  append_u32(b, static_cast<std::uint32_t>(rate));
  append_u32(b, static_cast<std::uint32_t>(rate * 2 * channels));
  append_u16(b, static_cast<std::uint16_t>(2 * channels));
  append_u16(b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  append_u32(b, data_len);
  for (std::int16_t v : interleaved) append_u16(b, static_cast<std::uint16_t>(v));
  return b;
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("audio") {

TEST_CASE("read_wav: one second of 16 kHz silence decodes to 16000 zeros") {
  ct::TempDir dir("audio_silence");
  const std::string path = dir.file("silence.wav");
  write_bytes(path, make_wav_pcm16(std::vector<std::int16_t>(16000, 0), 1, 16000));
  const AudioClip clip = read_wav(path);
  CHECK(clip.sample_rate_hz == 16000);
  REQUIRE(clip.size() == 16000);
  for (double v : clip.samples) CHECK(v == 0.0);
}

TEST_CASE("read_wav: opposite-polarity stereo averages to silence") {
  ct::TempDir dir("audio_stereo");
  const std::string path = dir.file("stereo.wav");
  std::vector<std::int16_t> interleaved;
  for (int i = 0; i < 1000; ++i) {
    interleaved.push_back(16384);
    interleaved.push_back(-16384);
  }
  write_bytes(path, make_wav_pcm16(interleaved, 2, 16000));
  const AudioClip clip = read_wav(path);
  REQUIRE(clip.size() == 1000);
  for (double v : clip.samples) CHECK(v == 0.0);
}

TEST_CASE("wav round trip: write then read recovers within 16-bit quantization") {
  ct::TempDir dir("audio_roundtrip");
  const std::string path = dir.file("rt.wav");
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-0.999, 0.999);
  AudioClip clip;
  clip.samples.resize(4321);
  for (auto& v : clip.samples) v = dist(gen);

  write_wav(clip, path);
  const AudioClip back = read_wav(path);
  REQUIRE(back.size() == clip.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < clip.size(); ++i) {
    max_err = std::max(max_err, std::abs(back.samples[i] - clip.samples[i]));
  }
  CHECK(max_err <= std::pow(2.0, -15.0));
}

TEST_CASE("write_wav: full-scale +1.0 encodes as 32767") {
  ct::TempDir dir("audio_fullscale");
  const std::string path = dir.file("full.wav");
  AudioClip clip;
  clip.samples = {1.0};
  write_wav(clip, path);

  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 46);
  const std::int16_t encoded = static_cast<std::int16_t>(bytes[44] | (bytes[45] << 8));
  CHECK(encoded == 32767);
}

TEST_CASE("write_wav: unwritable path raises an I/O error") {
  AudioClip clip;
  clip.samples = {0.0};
  CHECK_THROWS_AS(write_wav(clip, "/nonexistent_dir_creakbench/out.wav"), InputError);
}

TEST_CASE("read_wav: malformed header and unsupported encoding are rejected") {
  ct::TempDir dir("audio_bad");
  const std::string garbage = dir.file("garbage.wav");
  write_bytes(garbage, {'n', 'o', 't', 'a', 'w', 'a', 'v', 'e', '!', '!', '!', '!', '!'});
  CHECK_THROWS_AS(read_wav(garbage), InputError);

  // Valid RIFF skeleton with an ADPCM format tag.
  auto bytes = make_wav_pcm16(std::vector<std::int16_t>(100, 0), 1, 16000);
  bytes[20] = 2;  // wFormatTag = ADPCM
  const std::string adpcm = dir.file("adpcm.wav");
  write_bytes(adpcm, bytes);
  CHECK_THROWS_AS(read_wav(adpcm), InputError);
}

TEST_CASE("read_wav: non-canonical rates are resampled to 16 kHz") {
  ct::TempDir dir("audio_resample");
  const std::string path = dir.file("sr8k.wav");
  std::vector<std::int16_t> pcm(8000);
  for (int i = 0; i < 8000; ++i) {
    pcm[i] = static_cast<std::int16_t>(
        std::lround(0.5 * 32767.0 * std::sin(2.0 * std::numbers::pi * 220.0 * i / 8000.0)));
  }
  write_bytes(path, make_wav_pcm16(pcm, 1, 8000));
  const AudioClip clip = read_wav(path);
  CHECK(clip.sample_rate_hz == 16000);
  CHECK(clip.size() == doctest::Approx(16000).epsilon(0.01));
  // Tone survives resampling.
  const double peak = ct::dft_peak_frequency(clip.samples, 16000, 180.0, 260.0);
  CHECK(peak == doctest::Approx(220.0).epsilon(0.01));
}

TEST_CASE("frame_signal: one second at 40 ms / 10 ms gives 97 frames") {
  AudioClip clip;
  clip.samples.assign(16000, 0.25);
  const auto frames = frame_signal(clip, FrameSpec{});
  CHECK(frames.size() == 97);  // floor((16000 - 640) / 160) + 1
}

TEST_CASE("frame_signal: rectangular window is the raw slice, Hann tapers to zero") {
  AudioClip clip;
  clip.samples.resize(2000);
  for (std::size_t i = 0; i < clip.size(); ++i) clip.samples[i] = std::sin(0.01 * i);

  FrameSpec rect{0.040, 0.010, WindowKind::kRectangular};
  const auto raw = frame_signal(clip, rect);
  REQUIRE(!raw.empty());
  for (std::size_t i = 0; i < raw[1].samples.size(); ++i) {
    CHECK(raw[1].samples[i] == clip.samples[160 + i]);
  }

  FrameSpec hann{0.040, 0.010, WindowKind::kHann};
  const auto tapered = frame_signal(clip, hann);
  CHECK(std::abs(tapered[0].samples.front()) <= 1e-12);
  CHECK(std::abs(tapered[0].samples.back()) <= 1e-12);
}

TEST_CASE("frame_signal: clip shorter than one frame yields no frames") {
  AudioClip clip;
  clip.samples.assign(300, 0.1);
  CHECK(frame_signal(clip, FrameSpec{}).empty());
}

TEST_CASE("frame count matches a brute-force enumeration") {
  // Property check of the closed-form count against direct enumeration.
  for (std::size_t len : {0u, 1u, 639u, 640u, 641u, 800u, 16000u, 12345u}) {
    for (int frame : {160, 400, 640}) {
      for (int hop : {80, 160, 400, 640}) {
        if (hop > frame) continue;
        std::size_t brute = 0;
        for (std::size_t start = 0; start + frame <= len; start += hop) ++brute;
        CHECK(frame_count(len, frame, hop) == brute);
      }
    }
  }
}

TEST_CASE("synth_glottal: bit-deterministic for a fixed seed") {
  GlottalSpec spec = GlottalSpec::constant(120.0);
  spec.jitter_pct = 2.0;
  spec.subharmonic_gain = 0.3;
  const AudioClip a = synth_glottal(spec, 0.8, 16000, 42);
  const AudioClip b = synth_glottal(spec, 0.8, 16000, 42);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.samples.data(), b.samples.data(), a.size() * sizeof(double)) == 0);

  const AudioClip c = synth_glottal(spec, 0.8, 16000, 43);
  bool differs = false;
  for (std::size_t i = 0; i < a.size() && !differs; ++i) differs = a.samples[i] != c.samples[i];
  CHECK(differs);
}

TEST_CASE("synth_glottal: zero duration yields an empty clip") {
  CHECK(synth_glottal(GlottalSpec::constant(120.0), 0.0, 16000, 1).empty());
}

TEST_CASE("synth_glottal: clean 120 Hz source measures 120 +- 2 Hz") {
  GlottalSpec spec = GlottalSpec::constant(120.0);
  spec.noise_db = -120.0;
  const AudioClip clip = synth_glottal(spec, 1.0, 16000, 3);
  const PitchContour contour = estimate_contour(clip);
  CHECK(mean_pitch(contour) == doctest::Approx(120.0).epsilon(2.0 / 120.0));
}

TEST_CASE("synth_glottal: invalid specs are rejected") {
  GlottalSpec bad_f0 = GlottalSpec::constant(20.0);
  CHECK_THROWS_AS(synth_glottal(bad_f0, 0.1, 16000, 1), InputError);

  GlottalSpec bad_formant = GlottalSpec::constant(120.0);
  bad_formant.formants = {{9000.0, 100.0}};
  CHECK_THROWS_AS(synth_glottal(bad_formant, 0.1, 16000, 1), InputError);
}

}  // TEST_SUITE
