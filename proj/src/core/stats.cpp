// Copyright 2026 The reactrl Authors.
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


#include "reactrl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "reactrl/error.hpp"

namespace reactrl::stats {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::kEmptySample, "quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> sample) {
  if (sample.empty()) fail(ErrorCode::kEmptySample, "mean of an empty sample");
  double sum = 0.0;
  for (double x : sample) sum += x;
  return sum / static_cast<double>(sample.size());
}

double variance(std::span<const double> sample) {
  if (sample.size() < 2) return 0.0;
  const double m = mean(sample);
  double ss = 0.0;
  for (double x : sample) ss += (x - m) * (x - m);
  return ss / static_cast<double>(sample.size() - 1);
}

SummaryStats summarize(std::span<const double> sample) {
  if (sample.empty()) fail(ErrorCode::kEmptySample, "cannot summarize an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  s.n = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.mean = mean(sorted);
  s.stdev = std::sqrt(variance(sorted));
  return s;
}

nlohmann::json to_json(const SummaryStats& s) {
  return {{"n", s.n},           {"min", s.min},   {"q1", s.q1},   {"median", s.median},
          {"q3", s.q3},         {"max", s.max},   {"mean", s.mean}, {"stdev", s.stdev}};
}

}  // namespace reactrl::stats
