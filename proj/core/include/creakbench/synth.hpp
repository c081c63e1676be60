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

#include <cstdint>
#include <functional>
#include <vector>

#include "creakbench/audio.hpp"

namespace creakbench {

struct FormantSpec {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
};

/// Parametric source-filter voice generator. Creaky phonation is modeled as
/// high jitter plus alternating-pulse subharmonics (period doubling) plus a
/// pressed (small) open quotient; modal voice is the opposite corner.
struct GlottalSpec {
  /// f0 in Hz as a function of time in seconds. Must stay within [40, 600].
  std::function<double(double)> f0_hz = [](double) { return 120.0; };
  /// Open quotient: fraction of the period the glottal pulse is open.
  double open_quotient = 0.6;
  /// Cycle-to-cycle period perturbation, percent of the local period.
  double jitter_pct = 0.0;
  /// [0, 1]; scales down every second pulse, injecting an f0/2 component.
  double subharmonic_gain = 0.0;
  /// Resonators applied to the pulse train, (center, bandwidth) in Hz.
  std::vector<FormantSpec> formants = {{500.0, 80.0}, {1500.0, 120.0}, {2500.0, 180.0}};
  /// Additive white noise level in dB relative to the signal peak.
  double noise_db = -60.0;

  static GlottalSpec constant(double f0) {
    GlottalSpec spec;
    spec.f0_hz = [f0](double) { return f0; };
    return spec;
  }
};

/// Renders the spec deterministically (bit-identical for a fixed seed).
/// duration_s <= 0 yields an empty clip. Throws InputError when the spec
/// violates its invariants (f0 range, formants above Nyquist).
AudioClip synth_glottal(const GlottalSpec& spec, double duration_s, int sample_rate_hz,
                        std::uint64_t seed);

}  // namespace creakbench
