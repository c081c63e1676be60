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

#include "creakbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "creakbench/error.hpp"
#include "creakbench/rng.hpp"

namespace creakbench {
namespace {

// One second-order resonator section, applied in place.
void apply_resonator(std::vector<double>& x, double center_hz, double bandwidth_hz, int sr) {
  const double r = std::exp(-std::numbers::pi * bandwidth_hz / sr);
  const double theta = 2.0 * std::numbers::pi * center_hz / sr;
  const double a1 = -2.0 * r * std::cos(theta);
  const double a2 = r * r;
  const double gain = 1.0 - r;  // rough unity scaling at resonance
  double y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = gain * v - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace

AudioClip synth_glottal(const GlottalSpec& spec, double duration_s, int sample_rate_hz,
                        std::uint64_t seed) {
  if (sample_rate_hz < 8000) throw InputError("synth_glottal: sample rate below 8 kHz");
  if (spec.open_quotient <= 0.0 || spec.open_quotient >= 1.0) {
    throw InputError("synth_glottal: open_quotient must lie in (0, 1)");
  }
  if (spec.jitter_pct < 0.0) throw InputError("synth_glottal: negative jitter");
  if (spec.subharmonic_gain < 0.0 || spec.subharmonic_gain > 1.0) {
    throw InputError("synth_glottal: subharmonic_gain must lie in [0, 1]");
  }
  for (const auto& f : spec.formants) {
    if (f.center_hz >= 0.5 * sample_rate_hz) {
      throw InputError("synth_glottal: formant center above Nyquist");
    }
  }

  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  if (duration_s <= 0.0) return clip;
  const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  clip.samples.assign(n, 0.0);
  if (n == 0) return clip;

  Rng rng(seed);

  // Pulse train: one Hann-shaped glottal pulse per period, pulse width
  // open_quotient * period. Jitter perturbs each period; the subharmonic
  // alternately attenuates pulses (diplophonia).
  double t = 0.0;
  bool even_pulse = true;
  while (t < duration_s) {
    const double f0 = spec.f0_hz(t);
    if (!(f0 >= 40.0 && f0 <= 600.0)) {
      throw InputError("synth_glottal: f0 outside [40, 600] Hz");
    }
    double period = 1.0 / f0;
    if (spec.jitter_pct > 0.0) {
      const double eta = std::clamp(rng.normal(), -3.0, 3.0);
      period *= 1.0 + spec.jitter_pct / 100.0 * eta;
    }
    const double amp = even_pulse ? 1.0 : 1.0 - spec.subharmonic_gain;
    even_pulse = !even_pulse;

    const double open_s = spec.open_quotient * period;
    const long start = std::lround(t * sample_rate_hz);
    const long len = std::max<long>(2, std::lround(open_s * sample_rate_hz));
    for (long i = 0; i < len; ++i) {
      const long idx = start + i;
      if (idx < 0 || idx >= static_cast<long>(n)) continue;
      const double phase = static_cast<double>(i) / static_cast<double>(len - 1);
      clip.samples[static_cast<std::size_t>(idx)] +=
          amp * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * phase));
    }
    t += period;
  }

  for (const auto& f : spec.formants) {
    apply_resonator(clip.samples, f.center_hz, f.bandwidth_hz, sample_rate_hz);
  }

  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) peak = 1.0;

  const double noise_amp = peak * std::pow(10.0, spec.noise_db / 20.0);
  for (double& v : clip.samples) v += noise_amp * rng.normal();

  // Normalize to 0.9 full scale.
  peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    const double g = 0.9 / peak;
    for (double& v : clip.samples) v *= g;
  }
  return clip;
}

}  // namespace creakbench
