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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "creakbench/error.hpp"
#include "creakbench/stats.hpp"

using namespace creakbench;

TEST_SUITE("stats") {

TEST_CASE("pearson_r: perfect lines") {
  std::vector<double> xs, up, down;
  for (int i = 1; i <= 10; ++i) {
    xs.push_back(i);
    up.push_back(2.0 * i + 1.0);
    down.push_back(-static_cast<double>(i));
  }
  CHECK(pearson_r(xs, up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson_r(xs, down) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson_r: constant series is degenerate") {
  std::vector<double> xs = {1.0, 2.0, 3.0};
  std::vector<double> ys = {5.0, 5.0, 5.0};
  CHECK_THROWS_WITH_AS(pearson_r(xs, ys), "degenerate series", InputError);
}

TEST_CASE("pearson_r invariances: affine maps and sign flips") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> xs(50), ys(50);
  for (int i = 0; i < 50; ++i) {
    xs[i] = dist(gen);
    ys[i] = 0.7 * xs[i] + 0.5 * dist(gen);
  }
  const double base = pearson_r(xs, ys);

  std::vector<double> shifted(50), negated(50);
  for (int i = 0; i < 50; ++i) {
    shifted[i] = 3.0 * ys[i] + 11.0;
    negated[i] = -ys[i];
  }
  CHECK(pearson_r(xs, shifted) == doctest::Approx(base).epsilon(1e-12));
  CHECK(pearson_r(xs, negated) == doctest::Approx(-base).epsilon(1e-12));
}

TEST_CASE("ols_slope: exact lines and scaling") {
  std::vector<double> xs, line, flat;
  for (int i = 1; i <= 10; ++i) {
    xs.push_back(i);
    line.push_back(2.0 * i + 1.0);
    flat.push_back(5.0);
  }
  const LinearFit a = ols_slope(xs, line);
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(1.0).epsilon(1e-12));

  const LinearFit b = ols_slope(xs, flat);
  CHECK(b.slope == doctest::Approx(0.0));
  CHECK(b.intercept == doctest::Approx(5.0));

  // slope(x, k*y) = k * slope(x, y)
  std::vector<double> scaled(line);
  for (auto& v : scaled) v *= -3.5;
  CHECK(ols_slope(xs, scaled).slope == doctest::Approx(-7.0).epsilon(1e-12));
}

TEST_CASE("ols_slope: Monte Carlo recovery of a noisy slope") {
  // Oracle: n = 10^4 points from y = 3x + noise(sigma 0.1); the fitted slope
  // concentrates within [2.97, 3.03].
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> xs(10000), ys(10000);
  for (int i = 0; i < 10000; ++i) {
    xs[i] = ux(gen);
    ys[i] = 3.0 * xs[i] + noise(gen);
  }
  const LinearFit fit = ols_slope(xs, ys);
  CHECK(fit.slope >= 2.97);
  CHECK(fit.slope <= 3.03);
}

TEST_CASE("creak_pitch_report: constructed male group recovers alpha -0.004") {
  // Mirrors the inter-speaker law creak = 0.9 - 0.004 * (pitch - 100) plus
  // small noise; expect a strongly negative R and alpha within 0.0005.
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> upitch(80.0, 180.0);
  std::normal_distribution<double> eps(0.0, 0.01);
  std::vector<PitchCreakRow> rows;
  for (int i = 0; i < 400; ++i) {
    PitchCreakRow row;
    row.mean_pitch_hz = upitch(gen);
    row.creak_prob = std::clamp(0.9 - 0.004 * (row.mean_pitch_hz - 100.0) + eps(gen), 0.0, 1.0);
    row.gender = Gender::kMale;
    rows.push_back(row);
  }
  const auto reports = creak_pitch_report(rows, GroupBy::kGender);
  REQUIRE(reports.size() == 2);  // male + overall (no female rows)
  CHECK(reports[0].group == "male");
  CHECK(reports[0].r < -0.9);
  CHECK(reports[0].slope == doctest::Approx(-0.004).epsilon(0.125));
  CHECK(std::abs(reports[0].slope + 0.004) <= 0.0005);
  CHECK(reports[1].group == "overall");
}

TEST_CASE("creak_pitch_report: shuffled pairing decorrelates") {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> upitch(80.0, 180.0);
  std::uniform_real_distribution<double> uprob(0.0, 1.0);
  std::vector<PitchCreakRow> rows;
  for (int i = 0; i < 500; ++i) {
    rows.push_back({upitch(gen), uprob(gen), Gender::kFemale});
  }
  const auto reports = creak_pitch_report(rows, GroupBy::kGender);
  for (const auto& rep : reports) CHECK(std::abs(rep.r) < 0.15);
}

TEST_CASE("creak_pitch_report: degenerate group keeps an error note") {
  std::vector<PitchCreakRow> rows = {{120.0, 0.5, Gender::kMale}, {120.0, 0.5, Gender::kMale}};
  const auto reports = creak_pitch_report(rows, GroupBy::kGender);
  REQUIRE(!reports.empty());
  for (const auto& rep : reports) {
    CHECK(rep.note.find("error: degenerate series") != std::string::npos);
  }
}

TEST_CASE("creak_pitch_report is permutation-invariant") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> upitch(90.0, 200.0);
  std::vector<PitchCreakRow> rows;
  for (int i = 0; i < 64; ++i) {
    rows.push_back({upitch(gen), 0.8 - 0.003 * i, i % 2 == 0 ? Gender::kMale : Gender::kFemale});
  }
  const auto a = creak_pitch_report(rows, GroupBy::kGender);
  std::shuffle(rows.begin(), rows.end(), gen);
  const auto b = creak_pitch_report(rows, GroupBy::kGender);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].group == b[i].group);
    CHECK(a[i].r == doctest::Approx(b[i].r).epsilon(1e-12));
    CHECK(a[i].slope == doctest::Approx(b[i].slope).epsilon(1e-12));
  }
}

TEST_CASE("metric_slope_vs_beta: exact linear and null responses") {
  std::vector<std::pair<double, double>> linear, flat;
  for (double beta = -1.25; beta <= 1.251; beta += 0.25) {
    linear.push_back({beta, -4.0 * beta});
    flat.push_back({beta, 0.123});
  }
  const MetricSlope a = metric_slope_vs_beta(linear);
  CHECK(a.alpha == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(a.r == doctest::Approx(-1.0).epsilon(1e-9));

  const MetricSlope b = metric_slope_vs_beta(flat);
  CHECK(b.alpha == doctest::Approx(0.0));
  CHECK(std::abs(b.r) < 0.15);
}

TEST_CASE("correlation_reports_csv is deterministic and complete") {
  std::vector<CorrelationReport> reports(1);
  reports[0].group = "overall";
  reports[0].n = 42;
  reports[0].r = -0.75;
  reports[0].slope = -0.0022;
  reports[0].intercept = 1.0;
  reports[0].note = "creak_prob per Hz";
  const std::string csv = correlation_reports_csv(reports);
  CHECK(csv == "group,n,r,slope,intercept,note\noverall,42,-0.75,-0.0022,1,\"creak_prob per Hz\"\n");
}

}  // TEST_SUITE
