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

#ifndef BB__KINEMATICS_HPP_
#define BB__KINEMATICS_HPP_

#include "bb/core_model.hpp"

#include <span>

namespace bb
{

struct KinematicSnapshot
{
  double t{0.0};
  /// Longitudinal position (m).
  double y{0.0};
  /// Longitudinal speed (m/s).
  double v{0.0};
  /// Distance to the reference point, y_ref - y.
  double d{0.0};
};

/// Central difference on uniformly spaced samples, one-sided at the ends.
double estimate_speed(std::span<const double> positions, double dt, std::size_t index);
double estimate_speed(const VehicleTrack & track, double t, double sample_hz);

/// Snapshot of `track` at time `t` relative to reference position `y_ref`.
KinematicSnapshot snapshot(const VehicleTrack & track, double t, double sample_hz, double y_ref);

enum class LeadTimeStatus { ok, stopped_vehicle, downstream };

struct LeadTime
{
  LeadTimeStatus status{LeadTimeStatus::ok};
  double value{0.0};
};

/// Time-to-arrival of the highway vehicle minus that of the merging vehicle.
/// Positive means the merging vehicle kinematically leads.
LeadTime lead_time(const KinematicSnapshot & merger, const KinematicSnapshot & highway, double min_speed = 0.1);

/// Gap over closing speed; +inf when the speeds match within `equal_speed`.
/// Throws DataError when `lead` is not ahead of `ego`.
double time_to_collision(const KinematicSnapshot & ego, const KinematicSnapshot & lead, double equal_speed = 0.01);

}  // namespace bb

#endif  // BB__KINEMATICS_HPP_
