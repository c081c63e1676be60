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

#include "creakbench/stats.hpp"

#include <cmath>
#include <sstream>

#include "creakbench/error.hpp"
#include "creakbench/textio.hpp"

namespace creakbench {
namespace {

struct Moments {
  double mean_x = 0.0, mean_y = 0.0;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::size_t n = 0;
};

Moments moments(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("series length mismatch");
  if (xs.size() < 2) throw InputError("need at least two points");
  Moments m;
  m.n = xs.size();
  for (std::size_t i = 0; i < m.n; ++i) {
    m.mean_x += xs[i];
    m.mean_y += ys[i];
  }
  m.mean_x /= static_cast<double>(m.n);
  m.mean_y /= static_cast<double>(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const double dx = xs[i] - m.mean_x;
    const double dy = ys[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

// Relative-variance degeneracy guard at 1e-12.
bool degenerate(double s2, double mean, std::size_t n) {
  const double scale = std::max(1.0, mean * mean);
  return s2 / static_cast<double>(n) <= 1e-12 * scale;
}

}  // namespace

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  const Moments m = moments(xs, ys);
  if (degenerate(m.sxx, m.mean_x, m.n) || degenerate(m.syy, m.mean_y, m.n)) {
    throw InputError("degenerate series");
  }
  return m.sxy / std::sqrt(m.sxx * m.syy);
}

LinearFit ols_slope(std::span<const double> xs, std::span<const double> ys) {
  const Moments m = moments(xs, ys);
  if (degenerate(m.sxx, m.mean_x, m.n)) throw InputError("degenerate series");
  LinearFit fit;
  fit.slope = m.sxy / m.sxx;
  fit.intercept = m.mean_y - fit.slope * m.mean_x;
  return fit;
}

std::vector<CorrelationReport> creak_pitch_report(const std::vector<PitchCreakRow>& rows,
                                                  GroupBy group_by) {
  struct Group {
    std::string label;
    std::vector<double> xs, ys;
  };
  std::vector<Group> groups;
  if (group_by == GroupBy::kGender) {
    groups.push_back({"male", {}, {}});
    groups.push_back({"female", {}, {}});
  }
  groups.push_back({"overall", {}, {}});

  for (const auto& row : rows) {
    for (auto& g : groups) {
      const bool matches = g.label == "overall" ||
                           (row.gender.has_value() &&
                            ((g.label == "male" && *row.gender == Gender::kMale) ||
                             (g.label == "female" && *row.gender == Gender::kFemale)));
      if (matches) {
        g.xs.push_back(row.mean_pitch_hz);
        g.ys.push_back(row.creak_prob);
      }
    }
  }

  std::vector<CorrelationReport> reports;
  for (const auto& g : groups) {
    if (g.xs.size() < 2) continue;  // skipped with note in the CSV emitter
    CorrelationReport rep;
    rep.group = g.label;
    rep.n = static_cast<int>(g.xs.size());
    try {
      rep.r = pearson_r(g.xs, g.ys);
      const LinearFit fit = ols_slope(g.xs, g.ys);
      rep.slope = fit.slope;
      rep.intercept = fit.intercept;
      rep.note = "creak_prob per Hz";
      if (std::abs(rep.r) < 0.1) rep.note += "; not meaningful";
    } catch (const InputError& e) {
      rep.note = std::string("error: ") + e.what();
    }
    reports.push_back(std::move(rep));
  }
  if (reports.empty()) throw InputError("creak_pitch_report: no group with n >= 2");
  return reports;
}

MetricSlope metric_slope_vs_beta(const std::vector<std::pair<double, double>>& beta_delta) {
  std::vector<double> xs, ys;
  xs.reserve(beta_delta.size());
  ys.reserve(beta_delta.size());
  for (const auto& [beta, delta] : beta_delta) {
    xs.push_back(beta);
    ys.push_back(delta);
  }
  MetricSlope out;
  const LinearFit fit = ols_slope(xs, ys);
  out.alpha = fit.slope;
  try {
    out.r = pearson_r(xs, ys);
  } catch (const InputError&) {
    out.r = 0.0;  // metric did not move at all
  }
  return out;
}

std::string correlation_reports_csv(const std::vector<CorrelationReport>& reports) {
  std::ostringstream os;
  os << "group,n,r,slope,intercept,note\n";
  for (const auto& rep : reports) {
    os << rep.group << "," << rep.n << "," << format_double(rep.r) << ","
       << format_double(rep.slope) << "," << format_double(rep.intercept) << ",\"" << rep.note
       << "\"\n";
  }
  return os.str();
}

}  // namespace creakbench
