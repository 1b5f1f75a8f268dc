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

#include "bb/pipeline.hpp"

#include "bb/config_io.hpp"
#include "bb/digest.hpp"

#include <map>
#include <sstream>

namespace bb
{

ScenarioSelect scenario_select_from_string(const std::string & s)
{
  if (s == "merge") {
    return ScenarioSelect::merge;
  }
  if (s == "highway") {
    return ScenarioSelect::highway;
  }
  if (s == "all") {
    return ScenarioSelect::all;
  }
  throw UsageError("scenario must be merge, highway or all");
}

NaturalisticAnalysis analyze_naturalistic(const Dataset & dataset, const AnalysisConfig & config)
{
  NaturalisticAnalysis out;
  out.events = extract_merge_events(dataset, config);
  out.participants = merge_participants(out.events);
  out.highway = extract_highway_anchors(dataset, out.participants, config);

  std::set<std::pair<VehicleId, std::int64_t>> seen;
  const auto add = [&](VehicleId id, double t, Scenario scenario) {
      if (seen.emplace(id, time_key(t)).second) {
        const auto rid = static_cast<std::int64_t>(out.anchors.size());
        out.anchors.push_back({{rid, id, t}, scenario});
      }
    };
  for (const auto & ev : out.events) {
    for (const auto & r : ev.lookbacks) {
      if (r.usable()) {
        add(ev.merger_id, r.anchor_t, Scenario::merge);
        add(*r.highway_id, r.anchor_t, Scenario::merge);
      }
    }
  }
  for (const auto & a : out.highway) {
    add(a.vehicle_id, a.anchor_t, Scenario::highway);
  }
  return out;
}

std::vector<ScenarioAnchor> select_anchors(std::span<const ScenarioAnchor> anchors, ScenarioSelect which)
{
  std::vector<ScenarioAnchor> out;
  for (const auto & a : anchors) {
    if (which == ScenarioSelect::all || (which == ScenarioSelect::merge) == (a.scenario == Scenario::merge)) {
      out.push_back(a);
    }
  }
  return out;
}

void check_predictions(const PredictionSet & predictions, std::span<const ScenarioAnchor> anchors)
{
  std::map<std::pair<VehicleId, std::int64_t>, std::int64_t> known;
  for (const auto & a : anchors) {
    known.emplace(std::make_pair(a.anchor.vehicle_id, time_key(a.anchor.anchor_t)), a.anchor.request_id);
  }
  std::vector<std::string> offenders;
  for (const auto & [key, inst] : predictions.instances) {
    const auto it = known.find(key);
    if (it == known.end() || it->second != inst.request_id) {
      offenders.push_back(
        std::to_string(inst.request_id) + " (vehicle " + std::to_string(inst.vehicle_id) + " at t=" +
        format_double(inst.anchor_t) + ")");
    }
  }
  if (offenders.empty()) {
    return;
  }
  std::ostringstream msg;
  msg << "predictions from '" << predictions.source << "' reference " << offenders.size()
      << " unknown request(s):";
  for (std::size_t i = 0; i < offenders.size() && i < 20; ++i) {
    msg << ' ' << offenders[i];
  }
  if (offenders.size() > 20) {
    msg << " ...";
  }
  throw DataError(msg.str());
}

BehaviorReport evaluate(
  const Dataset & dataset, const AnalysisConfig & config, std::span<const PredictionSet> predictions)
{
  config.validate();
  BehaviorReport report;
  report.site = dataset.site.name;
  report.config = config;
  report.config_digest = config_digest(config);

  const auto nat = analyze_naturalistic(dataset, config);
  report.merge_events = static_cast<std::int64_t>(nat.events.size());
  report.highway_anchors = static_cast<std::int64_t>(nat.highway.size());
  report.faster_lane_changes = count_faster_lane_changes(dataset, nat.participants, config);
  report.events = nat.events;

  std::vector<SafetyInstance> instances;
  for (const auto & a : nat.anchors) {
    instances.push_back({a.anchor.vehicle_id, a.anchor.anchor_t, a.scenario});
  }
  const auto transform = fit_frame_transform(dataset);

  const NaturalisticSource natural(dataset);
  report.sources.push_back(compute_source_metrics(nat.events, nat.highway, natural, dataset.site, config));
  {
    auto local = count_unsafe(natural, instances, dataset, config);
    std::optional<SafetyStats> global;
    if (transform) {
      const NaturalisticSource natural_global(dataset, Frame::global, transform);
      global = count_unsafe(natural_global, instances, dataset, config, Frame::global, transform);
      global->source = natural.name();
    }
    report.safety.push_back(coordinate_frame_report(std::move(local), std::move(global)));
  }

  for (const auto & set : predictions) {
    check_predictions(set, nat.anchors);
    const PredictedSource source(set, dataset.site);
    const auto events = apply_source(nat.events, source, dataset.site, config);
    auto metrics = compute_source_metrics(events, nat.highway, source, dataset.site, config);
    const std::vector<double> horizons{1.0, 2.0, 3.0, 4.0, 5.0};
    const auto rmse_transform = set.frame == Frame::global ? transform : std::nullopt;
    if (!set.instances.empty()) {
      metrics.rmse = rmse_by_horizon(set, dataset, horizons, rmse_transform);
    }
    report.sources.push_back(std::move(metrics));
    if (set.frame == Frame::global) {
      report.safety.push_back(coordinate_frame_report(
        std::nullopt, count_unsafe(source, instances, dataset, config, Frame::global, transform)));
    } else {
      report.safety.push_back(coordinate_frame_report(count_unsafe(source, instances, dataset, config), std::nullopt));
    }
  }
  report.r2 = compare_sources(report.sources);
  return report;
}

}  // namespace bb
