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
#include <optional>
#include <string>
#include <vector>

#include "creakbench/audio.hpp"
#include "creakbench/creak.hpp"
#include "creakbench/manifest.hpp"
#include "creakbench/pitch.hpp"

namespace creakbench {

/// Per-gender mean pitch (Hz).
struct GenderStats {
  double male_mean_hz = 0.0;
  double female_mean_hz = 0.0;

  /// Corpus-level means as used in the reference pipeline.
  static GenderStats preset() { return {119.0, 195.0}; }

  double mean_for(Gender g) const {
    return g == Gender::kMale ? male_mean_hz : female_mean_hz;
  }
};

struct AdaptParams {
  /// Target standard deviation of the injected semitone noise.
  double b = 2.0;
  std::uint64_t global_seed = 0;
  int workers = 1;
};

struct AdaptRecord {
  std::string id;
  double delta_semitones = 0.0;
  double noise_u = 0.0;
  double old_mean_hz = 0.0;
  double new_mean_hz = 0.0;
  double old_creak = 0.0;
  double new_creak = 0.0;
  bool ratio_clamped = false;
  bool skipped = false;
  std::string skip_reason;
};

/// Pitch offset of an utterance from its gender class mean, in semitones:
/// 12 * log2(class_mean / utterance_mean). Positive when the utterance sits
/// below the class mean.
double semitone_delta(double class_mean_hz, double utterance_mean_hz);

/// Scales every voiced frame by the single factor 2^((delta + u*b) / 12);
/// unvoiced frames stay 0.
PitchContour adapted_contour(const PitchContour& contour, double delta_semitones, double u,
                             double b);

struct AdaptOutcome {
  AudioClip audio;
  AdaptRecord record;
};

/// Full single-utterance adaptation: VAD -> contour -> mean -> delta ->
/// noise draw -> contour scaling -> PSOLA -> feature re-extraction ->
/// relabeling. An utterance without voiced speech comes back with
/// record.skipped set instead of throwing.
AdaptOutcome adapt_utterance(const AudioClip& clip, Gender gender, const GenderStats& stats,
                             const AdaptParams& params, std::uint64_t utterance_seed,
                             const CreakCalibration& calib = CreakCalibration::defaults());

struct CorpusResult {
  std::vector<ManifestRow> manifest;  // adapted rows only
  std::vector<AdaptRecord> records;   // one per input row, including skips
  GenderStats stats_used;
};

/// Adapts a whole corpus. Per-utterance seeds derive from (global_seed, id),
/// so the output is identical for any worker count. Gender stats are
/// computed from the input manifest when not supplied (the preset is
/// available via GenderStats::preset()). Rows without gender or with
/// unreadable audio are skipped with a reason.
CorpusResult adapt_corpus(const std::vector<ManifestRow>& rows,
                          const std::optional<GenderStats>& stats, const AdaptParams& params,
                          const std::string& out_audio_dir,
                          const CreakCalibration& calib = CreakCalibration::defaults());

}  // namespace creakbench
