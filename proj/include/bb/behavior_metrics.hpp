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

#ifndef BB__BEHAVIOR_METRICS_HPP_
#define BB__BEHAVIOR_METRICS_HPP_

#include "bb/core_model.hpp"
#include "bb/events.hpp"
#include "bb/stats.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace bb
{

/// Outcomes of a merge analysis for one source at one look-back.
struct PassFirstResult
{
  BinnedCurve curve;
  std::int64_t resolved{0};
  std::int64_t undetermined{0};
};

/// `events` must already carry this source's outcomes (see apply_source).
PassFirstResult pass_first_curve(std::span<const MergeEvent> events, double tau, const AnalysisConfig & config);

struct CourtesyResult
{
  /// Rows conflict / no conflict, columns lane change / no lane change.
  Table2x2 table;
  double p_value{1.0};
  std::int64_t shoulder_exits{0};
};

CourtesyResult courtesy_lc_table(std::span<const MergeEvent> events, double tau);

struct HighwayLcResult
{
  BinnedCurve curve;
  std::int64_t lane_changes{0};
  /// Anchors the source could not provide a horizon for.
  std::int64_t missing{0};
};

HighwayLcResult highway_lc_curve(
  std::span<const HighwayAnchor> anchors, const TrajectorySource & source, double tau, const SiteProfile & site,
  const AnalysisConfig & config);

/// Lane changes between mainline lanes toward the median over whole tracks, skipping `excluded`.
std::int64_t count_faster_lane_changes(
  const Dataset & dataset, const std::set<VehicleId> & excluded, const AnalysisConfig & config);

struct RmseResult
{
  std::vector<double> horizons;
  std::vector<double> rmse;
  std::int64_t instances{0};
  std::int64_t excluded{0};
};

/// Position of the most likely mode at `h` seconds after the anchor, extrapolated past the last step.
Eigen::Vector2d predicted_position(const PredictionInstance & inst, double h);

RmseResult rmse_by_horizon(
  const PredictionSet & predictions, const Dataset & dataset, std::span<const double> horizons,
  const std::optional<FrameTransform> & transform = std::nullopt);

struct SourceMetrics
{
  std::string source;
  std::map<double, PassFirstResult> pass_first;
  std::map<double, CourtesyResult> courtesy;
  std::map<double, HighwayLcResult> highway_lc;
  std::optional<RmseResult> rmse;
};

SourceMetrics compute_source_metrics(
  std::span<const MergeEvent> events, std::span<const HighwayAnchor> anchors, const TrajectorySource & source,
  const SiteProfile & site, const AnalysisConfig & config);

struct R2Entry
{
  std::string metric;
  std::string source;
  double tau{0.0};
  std::optional<double> value;
  std::string error;
};

/// R² of every model curve against the naturalistic one; `sources[0]` is the reference.
std::vector<R2Entry> compare_sources(std::span<const SourceMetrics> sources);

}  // namespace bb

#endif  // BB__BEHAVIOR_METRICS_HPP_
