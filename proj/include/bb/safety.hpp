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

#ifndef BB__SAFETY_HPP_
#define BB__SAFETY_HPP_

#include "bb/core_model.hpp"
#include "bb/events.hpp"
#include "bb/ingestion.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bb
{

struct SafetyBox
{
  Eigen::Vector2d center{Eigen::Vector2d::Zero()};
  double half_length{0.0};
  double half_width{0.0};
  double margin{0.0};
};

/// Box for a vehicle whose reported y is its front bumper.
SafetyBox make_box(const Eigen::Vector2d & front, double length, double width, double margin);

/// Axis-aligned test; touching edges count as overlap.
bool boxes_overlap(const SafetyBox & a, const SafetyBox & b);

enum class Scenario { merge, highway };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string & s);

struct SafetyInstance
{
  VehicleId vehicle_id{0};
  double anchor_t{0.0};
  Scenario scenario{Scenario::highway};
};

struct SafetyCell
{
  std::int64_t interactions{0};
  std::int64_t unsafe{0};

  /// Percentage; zero when there are no interactions (see zero_denominator()).
  double pct() const { return interactions == 0 ? 0.0 : 100.0 * static_cast<double>(unsafe) / interactions; }
  bool zero_denominator() const { return interactions == 0; }
  bool operator==(const SafetyCell &) const = default;
};

struct SafetyStats
{
  std::string source;
  Frame frame{Frame::local};
  /// Keyed by (scenario, ego changed lanes within the horizon).
  std::map<std::pair<Scenario, bool>, SafetyCell> cells;
  std::int64_t missing{0};

  SafetyCell total(bool changed) const;
  bool operator==(const SafetyStats & o) const { return cells == o.cells && missing == o.missing; }
};

/// Neighbour positions come from the recorded data; `frame_transform` selects the global coordinates.
SafetyStats count_unsafe(
  const TrajectorySource & source, std::span<const SafetyInstance> instances, const Dataset & dataset,
  const AnalysisConfig & config, Frame frame = Frame::local,
  const std::optional<FrameTransform> & frame_transform = std::nullopt);

struct FrameReport
{
  std::string source;
  std::optional<SafetyStats> local;
  std::optional<SafetyStats> global;
};

FrameReport coordinate_frame_report(std::optional<SafetyStats> local, std::optional<SafetyStats> global);

}  // namespace bb

#endif  // BB__SAFETY_HPP_
