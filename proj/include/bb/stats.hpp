// Copyright 2026 The behavior-bench Authors
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

#ifndef BB__STATS_HPP_
#define BB__STATS_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace bb
{

/// Rows: conflict / no conflict. Columns: lane change / no lane change.
struct Table2x2
{
  std::int64_t a{0};
  std::int64_t b{0};
  std::int64_t c{0};
  std::int64_t d{0};

  std::int64_t total() const { return a + b + c + d; }
  bool operator==(const Table2x2 &) const = default;
};

/// Two-sided Fisher exact test, summing the point probabilities of every
/// table with the observed margins that is no more likely than the observed
/// one (relative slack 1e-7). An all-zero table yields 1.
double fisher_exact_two_sided(const Table2x2 & t);

struct BinnedCurve
{
  std::vector<double> lower;
  std::vector<double> upper;
  /// Midpoint for finite bins, the finite edge for half-open ones.
  std::vector<double> centers;
  Eigen::VectorXd values;
  std::vector<std::int64_t> counts;
  std::vector<bool> masked;
  std::int64_t dropped{0};

  std::size_t size() const { return centers.size(); }
};

struct BinSample
{
  double condition;
  bool outcome;
};

/// Left-closed bins [e_k, e_k+1); an infinite last edge also admits +inf.
/// Bins holding fewer than `min_count` samples are masked.
BinnedCurve bin_probability(
  std::span<const BinSample> samples, std::span<const double> edges, int min_count);

/// 1 - SS_res / SS_tot over the bins unmasked in both curves.
double r_squared(const BinnedCurve & reference, const BinnedCurve & candidate);

}  // namespace bb

#endif  // BB__STATS_HPP_
