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

#include "bb/stats.hpp"

#include "bb/core_model.hpp"

#include <algorithm>
#include <cmath>

namespace bb
{

namespace
{

double log_choose(std::int64_t n, std::int64_t k)
{
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double fisher_exact_two_sided(const Table2x2 & t)
{
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) {
    throw DataError("fisher: negative count");
  }
  const std::int64_t row1 = t.a + t.b;
  const std::int64_t row2 = t.c + t.d;
  const std::int64_t col1 = t.a + t.c;
  const std::int64_t n = row1 + row2;
  if (n == 0) {
    return 1.0;
  }
  const double log_denominator = log_choose(n, col1);
  const auto log_point = [&](std::int64_t x) {
      return log_choose(row1, x) + log_choose(row2, col1 - x) - log_denominator;
    };
  const std::int64_t lo = std::max<std::int64_t>(0, col1 - row2);
  const std::int64_t hi = std::min(row1, col1);
  const double log_observed = log_point(t.a);
  const double threshold = log_observed + std::log1p(1e-7);

  double p = 0.0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const double lp = log_point(x);
    if (lp <= threshold) {
      p += std::exp(lp);
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

BinnedCurve bin_probability(
  std::span<const BinSample> samples, std::span<const double> edges, int min_count)
{
  if (edges.size() < 2) {
    throw DataError("bin_probability: need at least two edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw DataError("bin_probability: edges must be strictly increasing");
    }
  }
  const std::size_t bins = edges.size() - 1;
  BinnedCurve curve;
  curve.lower.assign(edges.begin(), edges.end() - 1);
  curve.upper.assign(edges.begin() + 1, edges.end());
  curve.counts.assign(bins, 0);
  curve.masked.assign(bins, true);
  curve.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins));
  for (std::size_t k = 0; k < bins; ++k) {
    const double lo = curve.lower[k];
    const double hi = curve.upper[k];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      curve.centers.push_back(0.5 * (lo + hi));
    } else {
      curve.centers.push_back(std::isfinite(lo) ? lo : hi);
    }
  }

  std::vector<std::int64_t> successes(bins, 0);
  for (const auto & s : samples) {
    const double v = s.condition;
    std::size_t k = bins;
    if (std::isnan(v)) {
      ++curve.dropped;
      continue;
    }
    if (v == edges.back() && std::isinf(v)) {
      k = bins - 1;
    } else if (v >= edges.front() && v < edges.back()) {
      k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
    }
    if (k >= bins) {
      ++curve.dropped;
      continue;
    }
    ++curve.counts[k];
    successes[k] += s.outcome;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    if (curve.counts[k] > 0) {
      curve.values[k] = static_cast<double>(successes[k]) / static_cast<double>(curve.counts[k]);
    }
    curve.masked[k] = curve.counts[k] < min_count;
  }
  return curve;
}

double r_squared(const BinnedCurve & reference, const BinnedCurve & candidate)
{
  if (reference.centers != candidate.centers) {
    throw DataError("r_squared: curves do not share bins");
  }
  std::vector<Eigen::Index> common;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (!reference.masked[k] && !candidate.masked[k]) {
      common.push_back(static_cast<Eigen::Index>(k));
    }
  }
  if (common.size() < 2) {
    throw DataError("r_squared: fewer than 2 common bins");
  }
  const Eigen::VectorXd ref = reference.values(common);
  const Eigen::VectorXd cand = candidate.values(common);
  const double ss_tot = (ref.array() - ref.mean()).square().sum();
  if (!(ss_tot > 0.0)) {
    throw DataError("degenerate reference");
  }
  const double ss_res = (ref - cand).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

}  // namespace bb
