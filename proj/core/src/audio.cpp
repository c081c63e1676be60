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

#include "creakbench/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "creakbench/error.hpp"

namespace creakbench {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

}  // namespace

int FrameSpec::frame_len_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(frame_len_s * sample_rate_hz));
}

int FrameSpec::hop_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(hop_s * sample_rate_hz));
}

std::size_t frame_count(std::size_t len, int frame_len, int hop) {
  if (frame_len <= 0 || hop <= 0 || len < static_cast<std::size_t>(frame_len)) return 0;
  return (len - frame_len) / hop + 1;
}

std::vector<Frame> frame_signal(const AudioClip& clip, const FrameSpec& spec) {
  const int frame_len = spec.frame_len_samples(clip.sample_rate_hz);
  const int hop = spec.hop_samples(clip.sample_rate_hz);
  if (hop <= 0 || frame_len <= 0 || hop > frame_len) {
    throw InputError("frame_signal: require 0 < hop <= frame length");
  }
  const std::size_t n = frame_count(clip.size(), frame_len, hop);
  std::vector<Frame> frames;
  frames.reserve(n);

  std::vector<double> window(frame_len, 1.0);
  if (spec.window == WindowKind::kHann) {
    for (int i = 0; i < frame_len; ++i) {
      window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (frame_len - 1));
    }
  }

  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t start = f * hop;
    Frame frame;
    frame.start_s = static_cast<double>(start) / clip.sample_rate_hz;
    frame.samples.resize(frame_len);
    for (int i = 0; i < frame_len; ++i) {
      frame.samples[i] = clip.samples[start + i] * window[i];
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw InputError("read_wav: not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_len = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) {
      throw InputError("read_wav: truncated chunk in " + path);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw InputError("read_wav: malformed fmt chunk in " + path);
      const unsigned char* f = bytes.data() + body;
      format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      if (format == kFormatExtensible && chunk_len >= 40) {
        // Sub-format GUID starts with the effective format tag.
        format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) {
    throw InputError("read_wav: missing fmt or data chunk in " + path);
  }
  if (channels == 0 || rate < 8000) {
    throw InputError("read_wav: malformed header (channels/rate) in " + path);
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw InputError("read_wav: unsupported encoding (need PCM16 or float32) in " + path);
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_len / frame_bytes;

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        const std::int16_t v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, s, 4);
        acc += static_cast<double>(v);
      }
    }
    clip.samples[i] = acc / channels;
  }

  if (clip.sample_rate_hz != kCanonicalRateHz) {
    clip = resample(clip, kCanonicalRateHz);
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * n);
  const char* riff = "RIFF";
  out.insert(out.end(), riff, riff + 4);
  put_u32(out, 36 + 2 * n);
  const char* wavefmt = "WAVEfmt ";
  out.insert(out.end(), wavefmt, wavefmt + 8);
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  const char* datahdr = "data";
  out.insert(out.end(), datahdr, datahdr + 4);
  put_u32(out, 2 * n);
  for (double x : clip.samples) {
    const long v = std::clamp<long>(std::lround(x * 32768.0), -32768, 32767);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("write_wav: cannot open for writing: " + path);
  os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!os) throw InputError("write_wav: write failed: " + path);
}

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  if (target_rate_hz <= 0) throw InputError("resample: bad target rate");
  if (clip.sample_rate_hz == target_rate_hz || clip.empty()) {
    AudioClip out = clip;
    out.sample_rate_hz = target_rate_hz;
    if (clip.empty()) out.samples.clear();
    return out;
  }

  const double ratio = static_cast<double>(target_rate_hz) / clip.sample_rate_hz;
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(clip.size()) * ratio));
  AudioClip out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(out_len);

  // Hann-windowed sinc, 16 zero crossings per side; cutoff at the lower of
  // the two Nyquist frequencies.
  constexpr int kTaps = 16;
  const double cutoff = std::min(1.0, ratio);
  const std::size_t n_in = clip.size();
  for (std::size_t j = 0; j < out_len; ++j) {
    const double center = static_cast<double>(j) / ratio;
    const long lo = std::lround(std::floor(center)) - kTaps + 1;
    const long hi = std::lround(std::floor(center)) + kTaps;
    double acc = 0.0, wsum = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double x = (static_cast<double>(i) - center) * cutoff;
      double sinc = 1.0;
      if (x != 0.0) {
        sinc = std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      }
      const double u = (static_cast<double>(i) - center) / kTaps;
      if (u <= -1.0 || u >= 1.0) continue;
      const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * u);
      const double coeff = sinc * w * cutoff;
      wsum += coeff;
      if (i >= 0 && i < static_cast<long>(n_in)) {
        acc += clip.samples[static_cast<std::size_t>(i)] * coeff;
      }
    }
    out.samples[j] = wsum > 1e-9 ? acc / wsum : acc;
  }
  return out;
}

}  // namespace creakbench
