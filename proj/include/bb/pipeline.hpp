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

#ifndef BB__PIPELINE_HPP_
#define BB__PIPELINE_HPP_

#include "bb/behavior_metrics.hpp"
#include "bb/events.hpp"
#include "bb/ingestion.hpp"
#include "bb/safety.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bb
{

enum class ScenarioSelect { merge, highway, all };

ScenarioSelect scenario_select_from_string(const std::string & s);

struct ScenarioAnchor
{
  RequestAnchor anchor;
  Scenario scenario{Scenario::merge};
};

/// Naturalistic extraction shared by request generation and evaluation.
struct NaturalisticAnalysis
{
  std::vector<MergeEvent> events;
  std::vector<HighwayAnchor> highway;
  std::set<VehicleId> participants;
  /// Every (vehicle, anchor) needing a prediction, ids assigned over the full list.
  std::vector<ScenarioAnchor> anchors;
};

NaturalisticAnalysis analyze_naturalistic(const Dataset & dataset, const AnalysisConfig & config);

std::vector<ScenarioAnchor> select_anchors(std::span<const ScenarioAnchor> anchors, ScenarioSelect which);

struct BehaviorReport
{
  std::string site;
  AnalysisConfig config;
  std::string config_digest;
  std::int64_t merge_events{0};
  std::int64_t highway_anchors{0};
  std::int64_t faster_lane_changes{0};
  /// Naturalistic first, then one entry per prediction file.
  std::vector<SourceMetrics> sources;
  std::vector<R2Entry> r2;
  std::vector<FrameReport> safety;
  std::vector<MergeEvent> events;
};

/// Throws DataError when a prediction set references requests the dataset does not produce.
void check_predictions(const PredictionSet & predictions, std::span<const ScenarioAnchor> anchors);

BehaviorReport evaluate(
  const Dataset & dataset, const AnalysisConfig & config, std::span<const PredictionSet> predictions);

}  // namespace bb

#endif  // BB__PIPELINE_HPP_
