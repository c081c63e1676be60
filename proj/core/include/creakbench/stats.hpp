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

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "creakbench/creak.hpp"

namespace creakbench {

/// Pearson product-moment correlation. Throws InputError("degenerate
/// series") when either series has (relative) variance below 1e-12.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of y on x. Same degeneracy rule as pearson_r, applied
/// to x only.
LinearFit ols_slope(std::span<const double> xs, std::span<const double> ys);

struct CorrelationReport {
  std::string group;
  int n = 0;
  double r = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::string x_name = "mean_pitch_hz";
  std::string y_name = "creak_prob";
  /// Units of the slope plus flags ("not meaningful" when |R| < 0.1,
  /// "error: ..." when the group was degenerate).
  std::string note;
};

struct PitchCreakRow {
  double mean_pitch_hz = 0.0;
  double creak_prob = 0.0;
  std::optional<Gender> gender;
};

enum class GroupBy { kOverall, kGender };

/// Pitch-vs-creak correlation/slope per group (male, female, overall). The
/// slope is d(creak prob)/d(pitch Hz). Groups with n < 2 are skipped; a
/// degenerate group keeps its row with an error note. Throws InputError when
/// no group can be computed at all.
std::vector<CorrelationReport> creak_pitch_report(const std::vector<PitchCreakRow>& rows,
                                                  GroupBy group_by);

struct MetricSlope {
  double alpha = 0.0;
  double r = 0.0;
};

/// OLS slope and Pearson R of metric deltas against the conditioning shift:
/// pairs are (beta, metric(beta) - metric(0)).
MetricSlope metric_slope_vs_beta(const std::vector<std::pair<double, double>>& beta_delta);

/// CSV with header group,n,r,slope,intercept,note; deterministic row order.
std::string correlation_reports_csv(const std::vector<CorrelationReport>& reports);

}  // namespace creakbench
