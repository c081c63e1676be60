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

#include "creakbench/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "creakbench/acoustics.hpp"
#include "creakbench/error.hpp"
#include "creakbench/parallel.hpp"
#include "creakbench/psola.hpp"
#include "creakbench/rng.hpp"
#include "creakbench/vad.hpp"

namespace creakbench {

double semitone_delta(double class_mean_hz, double utterance_mean_hz) {
  if (!(class_mean_hz > 0.0) || !(utterance_mean_hz > 0.0)) {
    throw InputError("semitone_delta: pitches must be positive");
  }
  return 12.0 * std::log2(class_mean_hz / utterance_mean_hz);
}

PitchContour adapted_contour(const PitchContour& contour, double delta_semitones, double u,
                             double b) {
  if (b < 0.0) throw InputError("adapted_contour: b must be non-negative");
  const double factor = std::exp2((delta_semitones + u * b) / 12.0);
  PitchContour out = contour;
  for (auto& f : out.f0_hz) {
    if (f > 0.0) f *= factor;
  }
  return out;
}

AdaptOutcome adapt_utterance(const AudioClip& clip, Gender gender, const GenderStats& stats,
                             const AdaptParams& params, std::uint64_t utterance_seed,
                             const CreakCalibration& calib) {
  AdaptOutcome out;
  out.record.skipped = true;

  SpeechSegments segments = detect_speech(clip);
  if (segments.empty()) {
    out.record.skip_reason = "no speech detected";
    return out;
  }
  const PitchContour contour = estimate_contour(clip);

  // Mean pitch over voiced frames whose centers lie inside speech segments.
  double sum = 0.0;
  std::size_t voiced = 0;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    if (!contour.voiced(i)) continue;
    const double t = contour.frame_center_s(i);
    for (const auto& seg : segments) {
      if (t >= seg.start_s && t < seg.end_s) {
        sum += contour.f0_hz[i];
        ++voiced;
        break;
      }
    }
  }
  if (voiced == 0) {
    out.record.skip_reason = "unvoiced utterance";
    return out;
  }
  const double old_mean = sum / static_cast<double>(voiced);

  const double delta = semitone_delta(stats.mean_for(gender), old_mean);
  Rng rng(utterance_seed);
  const double u = rng.normal();

  const PitchContour target = adapted_contour(contour, delta, u, params.b);
  const ShiftResult shifted = shift_pitch(clip, contour, target);

  out.record.skipped = false;
  out.record.delta_semitones = delta;
  out.record.noise_u = u;
  out.record.old_mean_hz = old_mean;
  out.record.ratio_clamped = shifted.ratio_clamped;

  // Relabel on the adapted audio.
  const FeatureBundle bundle = extract_features_with_jitter(shifted.audio);
  out.record.new_mean_hz = bundle.features.mean_pitch_hz;
  out.record.new_creak =
      proxy_creak_prob(CreakFeatures::from(bundle.features, bundle.jitter_pct), calib).prob;
  out.audio = std::move(shifted.audio);
  return out;
}

CorpusResult adapt_corpus(const std::vector<ManifestRow>& rows,
                          const std::optional<GenderStats>& stats, const AdaptParams& params,
                          const std::string& out_audio_dir, const CreakCalibration& calib) {
  namespace fs = std::filesystem;
  CorpusResult result;
  if (!out_audio_dir.empty()) fs::create_directories(out_audio_dir);

  const std::size_t n = rows.size();
  std::vector<std::optional<double>> mean_pitches(n);
  std::vector<std::string> load_errors(n);

  // Pass 1: mean pitches (from the manifest when present) for gender stats.
  parallel_for(n, params.workers, [&](std::size_t i) {
    const ManifestRow& row = rows[i];
    if (!row.gender) return;
    if (row.mean_pitch_hz) {
      mean_pitches[i] = row.mean_pitch_hz;
      return;
    }
    try {
      const AudioClip clip = read_wav(row.audio_path);
      const SpeechSegments segs = detect_speech(clip);
      if (segs.empty()) return;
      mean_pitches[i] = mean_pitch(estimate_contour(apply_segments(clip, segs)));
    } catch (const InputError& e) {
      load_errors[i] = e.what();
    }
  });

  GenderStats used;
  if (stats) {
    used = *stats;
  } else {
    double male_sum = 0.0, female_sum = 0.0;
    std::size_t male_n = 0, female_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!rows[i].gender || !mean_pitches[i]) continue;
      if (*rows[i].gender == Gender::kMale) {
        male_sum += *mean_pitches[i];
        ++male_n;
      } else {
        female_sum += *mean_pitches[i];
        ++female_n;
      }
    }
    const GenderStats preset = GenderStats::preset();
    used.male_mean_hz = male_n > 0 ? male_sum / static_cast<double>(male_n) : preset.male_mean_hz;
    used.female_mean_hz =
        female_n > 0 ? female_sum / static_cast<double>(female_n) : preset.female_mean_hz;
  }
  result.stats_used = used;

  // Pass 2: adapt each row.
  std::vector<AdaptRecord> records(n);
  std::vector<std::optional<ManifestRow>> adapted(n);
  parallel_for(n, params.workers, [&](std::size_t i) {
    const ManifestRow& row = rows[i];
    AdaptRecord rec;
    rec.id = row.id;
    if (!row.gender) {
      rec.skipped = true;
      rec.skip_reason = "missing gender";
      records[i] = rec;
      return;
    }
    AudioClip clip;
    try {
      clip = read_wav(row.audio_path);
    } catch (const InputError& e) {
      rec.skipped = true;
      rec.skip_reason = std::string("unreadable audio: ") + e.what();
      records[i] = rec;
      return;
    }
    const std::uint64_t seed = mix_seed(params.global_seed, row.id);
    AdaptOutcome outcome;
    try {
      outcome = adapt_utterance(clip, *row.gender, used, params, seed, calib);
    } catch (const InputError& e) {
      rec.skipped = true;
      rec.skip_reason = e.what();
      records[i] = rec;
      return;
    }
    outcome.record.id = row.id;
    if (row.creak_prob) {
      outcome.record.old_creak = *row.creak_prob;
    } else if (!outcome.record.skipped) {
      try {
        const FeatureBundle fb = extract_features_with_jitter(clip);
        outcome.record.old_creak =
            proxy_creak_prob(CreakFeatures::from(fb.features, fb.jitter_pct), calib).prob;
      } catch (const InputError&) {
        // leave 0; the adapted label is what matters downstream
      }
    }
    records[i] = outcome.record;
    if (outcome.record.skipped) return;

    const std::string out_path =
        (fs::path(out_audio_dir) / (row.id + ".wav")).string();
    write_wav(outcome.audio, out_path);

    ManifestRow out_row = row;
    out_row.mean_pitch_hz = outcome.record.new_mean_hz;
    out_row.creak_prob = outcome.record.new_creak;
    out_row.delta_semitones = outcome.record.delta_semitones;
    out_row.noise_u = outcome.record.noise_u;
    out_row.adapted_path = out_path;
    if (out_row.attrs) {
      // Keep conditioning consistent with the relabeled audio: pitch scaled
      // by the realized shift, creak replaced by the new label.
      auto attrs = *out_row.attrs;
      if (outcome.record.old_mean_hz > 0.0) {
        attrs[4] *= outcome.record.new_mean_hz / outcome.record.old_mean_hz;
      }
      attrs[5] = outcome.record.new_creak;
      out_row.attrs = attrs;
    }
    adapted[i] = std::move(out_row);
  });

  for (std::size_t i = 0; i < n; ++i) {
    result.records.push_back(records[i]);
    if (adapted[i]) result.manifest.push_back(std::move(*adapted[i]));
  }
  return result;
}

}  // namespace creakbench
