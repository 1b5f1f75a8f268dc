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

#include "bb/safety.hpp"

#include "bb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace bb
{

SafetyBox make_box(const Eigen::Vector2d & front, double length, double width, double margin)
{
  SafetyBox box;
  box.center = Eigen::Vector2d(front.x(), front.y() - 0.5 * length);
  box.half_length = 0.5 * length + margin;
  box.half_width = 0.5 * width + margin;
  box.margin = margin;
  return box;
}

bool boxes_overlap(const SafetyBox & a, const SafetyBox & b)
{
  return std::abs(a.center.x() - b.center.x()) <= a.half_width + b.half_width &&
         std::abs(a.center.y() - b.center.y()) <= a.half_length + b.half_length;
}

std::string to_string(Scenario s)
{
  return s == Scenario::merge ? "merge" : "highway";
}

Scenario scenario_from_string(const std::string & s)
{
  if (s == "merge") {
    return Scenario::merge;
  }
  if (s == "highway") {
    return Scenario::highway;
  }
  throw UsageError("unknown scenario '" + s + "'");
}

SafetyCell SafetyStats::total(bool changed) const
{
  SafetyCell out;
  for (const auto & [key, cell] : cells) {
    if (key.second == changed) {
      out.interactions += cell.interactions;
      out.unsafe += cell.unsafe;
    }
  }
  return out;
}

namespace
{

struct SortedFrame
{
  std::vector<double> y;
  std::vector<SampleIndex::Entry> entries;
};

struct InstanceResult
{
  bool resolved{false};
  bool changed{false};
  std::int64_t interactions{0};
  std::int64_t unsafe{0};
};

}  // namespace

SafetyStats count_unsafe(
  const TrajectorySource & source, std::span<const SafetyInstance> instances, const Dataset & dataset,
  const AnalysisConfig & config, Frame frame, const std::optional<FrameTransform> & frame_transform)
{
  if (frame == Frame::global && !frame_transform) {
    throw DataError("global-frame safety needs a frame transform");
  }
  const SampleIndex index(dataset);

  // One y-sorted neighbour list per anchor time.
  std::unordered_map<std::int64_t, SortedFrame> frames;
  for (const auto & inst : instances) {
    const auto key = time_key(inst.anchor_t);
    if (frames.count(key)) {
      continue;
    }
    const auto found = index.at(inst.anchor_t);
    std::vector<SampleIndex::Entry> entries(found.begin(), found.end());
    std::sort(entries.begin(), entries.end(), [](const auto & a, const auto & b) {
      return a.state().y < b.state().y;
    });
    SortedFrame sf;
    for (const auto & e : entries) {
      sf.y.push_back(e.state().y);
    }
    sf.entries = std::move(entries);
    frames.emplace(key, std::move(sf));
  }

  const auto position = [&](const VehicleState & s) -> std::optional<Eigen::Vector2d> {
    if (frame == Frame::local) {
      return s.position();
    }
    if (!s.gx || !s.gy) {
      return std::nullopt;
    }
    return frame_transform->to_local(Eigen::Vector2d(*s.gx, *s.gy));
  };

  std::vector<InstanceResult> results(instances.size());
  parallel_for(
    instances.size(), [&](std::size_t i) {
      const auto & inst = instances[i];
      const VehicleTrack * ego = dataset.find(inst.vehicle_id);
      const auto ego_idx = ego ? ego->index_at(inst.anchor_t, dataset.sample_hz) : std::nullopt;
      const auto horizon = source.horizon(inst.vehicle_id, inst.anchor_t);
      if (!ego_idx || !horizon) {
        return;
      }
      auto & res = results[i];
      res.resolved = true;
      res.changed = !detect_lane_changes(*horizon, dataset.site, config.lc_dwell).empty();

      const Eigen::Vector2d ego_pos = ego->states[*ego_idx].position();
      const auto & sf = frames.at(time_key(inst.anchor_t));
      const auto lo = std::lower_bound(sf.y.begin(), sf.y.end(), ego_pos.y() - config.neighbor_radius);
      const auto hi = std::upper_bound(sf.y.begin(), sf.y.end(), ego_pos.y() + config.neighbor_radius);
      for (auto it = lo; it != hi; ++it) {
        const auto & entry = sf.entries[static_cast<std::size_t>(it - sf.y.begin())];
        const VehicleTrack & other = *entry.track;
        if (other.vehicle_id == ego->vehicle_id ||
          (entry.state().position() - ego_pos).norm() > config.neighbor_radius)
        {
          continue;
        }
        ++res.interactions;
        for (Eigen::Index k = 1; k < horizon->points.rows(); ++k) {
          const auto j = other.index_at(horizon->t[static_cast<std::size_t>(k)], dataset.sample_hz);
          if (!j) {
            continue;
          }
          const auto p = position(other.states[*j]);
          if (!p) {
            continue;
          }
          const auto a = make_box(horizon->points.row(k).transpose(), ego->length, ego->width, config.safety_margin);
          const auto b = make_box(*p, other.length, other.width, config.safety_margin);
          if (boxes_overlap(a, b)) {
            ++res.unsafe;
            break;
          }
        }
      }
    });

  SafetyStats stats;
  stats.source = source.name();
  stats.frame = frame;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto & r = results[i];
    if (!r.resolved) {
      ++stats.missing;
      continue;
    }
    auto & cell = stats.cells[{instances[i].scenario, r.changed}];
    cell.interactions += r.interactions;
    cell.unsafe += r.unsafe;
  }
  return stats;
}

FrameReport coordinate_frame_report(std::optional<SafetyStats> local, std::optional<SafetyStats> global)
{
  FrameReport r;
  if (local) {
    r.source = local->source;
  } else if (global) {
    r.source = global->source;
  }
  r.local = std::move(local);
  r.global = std::move(global);
  return r;
}

}  // namespace bb
