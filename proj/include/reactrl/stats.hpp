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


#ifndef REACTRL_STATS_HPP_
#define REACTRL_STATS_HPP_

#include <cstddef>
#include <span>

#include "json.hpp"

namespace reactrl::stats {

// Order statistics use linear interpolation between closest ranks: for a
// sorted sample x[0..n-1] the p-quantile sits at h = (n - 1) * p and equals
// x[floor h] + (h - floor h) * (x[floor h + 1] - x[floor h]). stdev is the
// sample standard deviation (n - 1 denominator; 0 for a single value).
struct SummaryStats {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stdev = 0.0;

  double iqr() const { return q3 - q1; }
};

// Throws Error(kEmptySample) on an empty sample.
SummaryStats summarize(std::span<const double> sample);

// p in [0, 1]; `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> sample);
// Sample variance; 0 for fewer than two values.
double variance(std::span<const double> sample);

nlohmann::json to_json(const SummaryStats& s);

}  // namespace reactrl::stats

#endif  // REACTRL_STATS_HPP_
