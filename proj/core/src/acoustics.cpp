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

#include "creakbench/acoustics.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "creakbench/error.hpp"
#include "creakbench/psola.hpp"
#include "creakbench/vad.hpp"

namespace creakbench {
namespace {

constexpr int kNfft = 4096;
constexpr double kHnrFloorDb = -10.0;
constexpr double kHnrCeilDb = 60.0;
// CPP bands (conventional choices, in seconds of quefrency).
constexpr double kCppSearchLoS = 1.0 / 500.0;
constexpr double kCppSearchHiS = 1.0 / 60.0;
constexpr double kCppRegressLoS = 0.001;
constexpr double kCppRegressHiS = 0.016;

std::vector<double> hann_window(int len) {
  std::vector<double> w(len);
  for (int i = 0; i < len; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (len - 1));
  }
  return w;
}

// Magnitude spectrum (dB) of one zero-padded Hann frame.
std::vector<double> frame_spectrum_db(Eigen::FFT<double>& fft, const double* x, int len,
                                      const std::vector<double>& window) {
  std::vector<double> buf(kNfft, 0.0);
  for (int i = 0; i < len; ++i) buf[i] = x[i] * window[i];
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, buf);
  std::vector<double> db(kNfft / 2 + 1);
  for (int k = 0; k <= kNfft / 2; ++k) {
    db[k] = 10.0 * std::log10(std::norm(spec[k]) + 1e-30);
  }
  return db;
}

// Peak level (dB) near target_hz within +-radius_hz, parabolic refinement.
// Returns false when the search window is empty or out of range.
bool peak_level_db(const std::vector<double>& spec_db, int sr, double target_hz,
                   double radius_hz, double* level) {
  const double bin_hz = static_cast<double>(sr) / kNfft;
  int lo = static_cast<int>(std::ceil((target_hz - radius_hz) / bin_hz));
  int hi = static_cast<int>(std::floor((target_hz + radius_hz) / bin_hz));
  lo = std::max(lo, 1);
  hi = std::min(hi, static_cast<int>(spec_db.size()) - 2);
  if (lo > hi) return false;
  int best = lo;
  for (int k = lo; k <= hi; ++k) {
    if (spec_db[k] > spec_db[best]) best = k;
  }
  const double y0 = spec_db[best - 1], y1 = spec_db[best], y2 = spec_db[best + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  double value = y1;
  if (std::abs(denom) > 1e-30) {
    const double d = std::clamp(0.5 * (y0 - y2) / denom, -1.0, 1.0);
    value = y1 - 0.25 * (y0 - y2) * d;
  }
  *level = value;
  return true;
}

}  // namespace

double h1_h2(const AudioClip& clip, const PitchContour& contour) {
  const int sr = clip.sample_rate_hz;
  const FrameSpec spec{contour.frame_len_s, contour.hop_s, WindowKind::kRectangular};
  const int frame_len = spec.frame_len_samples(sr);
  const int hop = spec.hop_samples(sr);
  const std::size_t n_frames =
      std::min(contour.size(), frame_count(clip.size(), frame_len, hop));

  const std::vector<double> window = hann_window(frame_len);
  Eigen::FFT<double> fft;
  // Search radius: 1.5 analysis bins, capped below half of f0 so the window
  // cannot capture a neighboring harmonic.
  const double analysis_bin_hz = static_cast<double>(sr) / frame_len;

  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (!contour.voiced(f)) continue;
    const double f0 = contour.f0_hz[f];
    const double radius = std::min(1.5 * analysis_bin_hz, 0.45 * f0);
    if (2.0 * f0 + radius >= 0.5 * sr) continue;
    const std::vector<double> spec_db =
        frame_spectrum_db(fft, clip.samples.data() + f * hop, frame_len, window);
    double h1 = 0.0, h2 = 0.0;
    if (!peak_level_db(spec_db, sr, f0, radius, &h1)) continue;
    if (!peak_level_db(spec_db, sr, 2.0 * f0, radius, &h2)) continue;
    sum += h1 - h2;
    ++used;
  }
  if (used == 0) throw InputError("h1_h2: no voiced frames");
  return sum / static_cast<double>(used);
}

double hnr(const AudioClip& clip, const PitchContour& contour) {
  const int sr = clip.sample_rate_hz;
  const FrameSpec spec{contour.frame_len_s, contour.hop_s, WindowKind::kRectangular};
  const int frame_len = spec.frame_len_samples(sr);
  const int hop = spec.hop_samples(sr);
  const std::size_t n_frames =
      std::min(contour.size(), frame_count(clip.size(), frame_len, hop));

  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (!contour.voiced(f)) continue;
    const double period = sr / contour.f0_hz[f];
    const int tau0 = static_cast<int>(std::lround(period));
    const int tau_hi = tau0 + 2;
    if (tau_hi + 8 >= frame_len || tau0 < 4) continue;
    const int window = frame_len - tau_hi;
    const double* x = clip.samples.data() + f * hop;

    // Normalized cross-correlation at five lags around the period, followed
    // by parabolic refinement of the peak value.
    double r[5];
    for (int j = 0; j < 5; ++j) {
      const int tau = tau0 - 2 + j;
      double num = 0.0, e0 = 0.0, e1 = 0.0;
      for (int i = 0; i < window; ++i) {
        num += x[i] * x[i + tau];
        e0 += x[i] * x[i];
        e1 += x[i + tau] * x[i + tau];
      }
      const double denom = std::sqrt(e0 * e1);
      r[j] = denom > 1e-20 ? num / denom : 0.0;
    }
    int best = 0;
    for (int j = 1; j < 5; ++j) {
      if (r[j] > r[best]) best = j;
    }
    double r_peak = r[best];
    if (best > 0 && best < 4) {
      const double y0 = r[best - 1], y1 = r[best], y2 = r[best + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      if (std::abs(denom) > 1e-30) {
        const double d = std::clamp(0.5 * (y0 - y2) / denom, -1.0, 1.0);
        r_peak = y1 - 0.25 * (y0 - y2) * d;
      }
    }

    double value;
    if (r_peak <= 0.0) {
      value = kHnrFloorDb;
    } else {
      r_peak = std::min(r_peak, 1.0 - 1e-12);
      value = std::clamp(10.0 * std::log10(r_peak / (1.0 - r_peak)), kHnrFloorDb, kHnrCeilDb);
    }
    sum += value;
    ++used;
  }
  if (used == 0) throw InputError("hnr: no voiced frames");
  return sum / static_cast<double>(used);
}

double cpp(const AudioClip& clip) {
  const int sr = clip.sample_rate_hz;
  const FrameSpec framing{0.040, 0.010, WindowKind::kRectangular};
  const int frame_len = framing.frame_len_samples(sr);
  const int hop = framing.hop_samples(sr);
  const std::size_t n_frames = frame_count(clip.size(), frame_len, hop);
  if (n_frames == 0) throw InputError("cpp: clip shorter than 40 ms");

  const PitchContour contour = estimate_contour(clip);
  const std::vector<double> window = hann_window(frame_len);
  Eigen::FFT<double> fft;

  const int q_lo = std::max(1, static_cast<int>(std::ceil(kCppSearchLoS * sr)));
  const int q_hi = std::min(kNfft / 2 - 1, static_cast<int>(std::floor(kCppSearchHiS * sr)));
  const int r_lo = std::max(1, static_cast<int>(std::lround(kCppRegressLoS * sr)));
  const int r_hi = std::min(kNfft / 2 - 1, static_cast<int>(std::lround(kCppRegressHiS * sr)));

  double sum_voiced = 0.0, sum_all = 0.0;
  std::size_t used_voiced = 0, used_all = 0;
  std::vector<double> logpow(kNfft);
  std::vector<std::complex<double>> spectrum;
  std::vector<std::complex<double>> ceps_spec;
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::vector<double> buf(kNfft, 0.0);
    const double* x = clip.samples.data() + f * hop;
    double energy = 0.0;
    for (int i = 0; i < frame_len; ++i) {
      buf[i] = x[i] * window[i];
      energy += buf[i] * buf[i];
    }
    if (energy <= 1e-20) continue;
    fft.fwd(spectrum, buf);
    for (int k = 0; k < kNfft; ++k) {
      logpow[k] = 10.0 * std::log10(std::norm(spectrum[k]) + 1e-30);
    }
    fft.fwd(ceps_spec, logpow);

    // Cepstrum amplitude in dB units: a pure cosine ripple of A dB in the
    // log spectrum yields a peak of exactly A.
    auto ceps_db = [&](int q) { return 2.0 / kNfft * std::abs(ceps_spec[q]); };

    int q_peak = q_lo;
    double peak = ceps_db(q_lo);
    for (int q = q_lo + 1; q <= q_hi; ++q) {
      const double c = ceps_db(q);
      if (c > peak) {
        peak = c;
        q_peak = q;
      }
    }

    // Least-squares line over the regression band.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const int nr = r_hi - r_lo + 1;
    for (int q = r_lo; q <= r_hi; ++q) {
      const double c = ceps_db(q);
      sx += q;
      sy += c;
      sxx += static_cast<double>(q) * q;
      sxy += q * c;
    }
    const double denom = nr * sxx - sx * sx;
    const double slope = denom != 0.0 ? (nr * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / nr;
    const double value = peak - (slope * q_peak + intercept);

    sum_all += value;
    ++used_all;
    if (f < contour.size() && contour.voiced(f)) {
      sum_voiced += value;
      ++used_voiced;
    }
  }
  if (used_all == 0) throw InputError("cpp: no analyzable frames");
  return used_voiced > 0 ? sum_voiced / static_cast<double>(used_voiced)
                         : sum_all / static_cast<double>(used_all);
}

double jitter_percent(const AudioClip& clip, const PitchContour& contour) {
  const EpochTrain train = mark_epochs(clip, contour);
  std::vector<double> periods;
  for (std::size_t i = 0; i + 1 < train.size(); ++i) {
    if (train.voiced[i] && train.voiced[i + 1]) {
      periods.push_back(static_cast<double>(train.epochs[i + 1] - train.epochs[i]));
    }
  }
  if (periods.size() < 2) return 0.0;
  double mean_p = 0.0;
  for (double p : periods) mean_p += p;
  mean_p /= static_cast<double>(periods.size());
  double mean_abs_diff = 0.0;
  for (std::size_t i = 0; i + 1 < periods.size(); ++i) {
    mean_abs_diff += std::abs(periods[i + 1] - periods[i]);
  }
  mean_abs_diff /= static_cast<double>(periods.size() - 1);
  return mean_p > 0.0 ? 100.0 * mean_abs_diff / mean_p : 0.0;
}

VoiceFeatures extract_features(const AudioClip& clip) {
  return extract_features_with_jitter(clip).features;
}

FeatureBundle extract_features_with_jitter(const AudioClip& clip) {
  const SpeechSegments segments = detect_speech(clip);
  const AudioClip speech = apply_segments(clip, segments);  // throws when empty
  const PitchContour contour = estimate_contour(speech);
  if (contour.voiced_count() == 0) throw InputError("unvoiced utterance");

  FeatureBundle out;
  out.features.mean_pitch_hz = mean_pitch(contour);
  out.features.h1h2_db = h1_h2(speech, contour);
  out.features.hnr_db = hnr(speech, contour);
  out.features.cpp_db = cpp(speech);
  out.features.voiced_fraction =
      contour.size() > 0
          ? static_cast<double>(contour.voiced_count()) / static_cast<double>(contour.size())
          : 0.0;
  out.jitter_pct = jitter_percent(speech, contour);
  return out;
}

}  // namespace creakbench
