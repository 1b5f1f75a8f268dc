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

#include "bb/kinematics.hpp"

#include <cmath>
#include <limits>

namespace bb
{

double estimate_speed(std::span<const double> positions, double dt, std::size_t index)
{
  if (positions.size() < 2) {
    throw DataError("insufficient samples");
  }
  if (index >= positions.size()) {
    throw DataError("speed estimate index out of range");
  }
  if (index == 0) {
    return (positions[1] - positions[0]) / dt;
  }
  if (index + 1 == positions.size()) {
    return (positions[index] - positions[index - 1]) / dt;
  }
  return (positions[index + 1] - positions[index - 1]) / (2.0 * dt);
}

double estimate_speed(const VehicleTrack & track, double t, double sample_hz)
{
  if (track.states.size() < 2) {
    throw DataError("insufficient samples");
  }
  const auto idx = track.index_at(t, sample_hz);
  if (!idx) {
    throw DataError("time is not a sample of vehicle " + std::to_string(track.vehicle_id));
  }
  const auto & s = track.states;
  const std::size_t i = *idx;
  const double dt = 1.0 / sample_hz;
  if (i == 0) {
    return (s[1].y - s[0].y) / dt;
  }
  if (i + 1 == s.size()) {
    return (s[i].y - s[i - 1].y) / dt;
  }
  return (s[i + 1].y - s[i - 1].y) / (2.0 * dt);
}

KinematicSnapshot snapshot(const VehicleTrack & track, double t, double sample_hz, double y_ref)
{
  const auto idx = track.index_at(t, sample_hz);
  if (!idx) {
    throw DataError("time is not a sample of vehicle " + std::to_string(track.vehicle_id));
  }
  const double y = track.states[*idx].y;
  return {track.states[*idx].t, y, estimate_speed(track, t, sample_hz), y_ref - y};
}

LeadTime lead_time(const KinematicSnapshot & merger, const KinematicSnapshot & highway, double min_speed)
{
  if (merger.v <= min_speed || highway.v <= min_speed) {
    return {LeadTimeStatus::stopped_vehicle, 0.0};
  }
  if (merger.d < 0.0 || highway.d < 0.0) {
    return {LeadTimeStatus::downstream, 0.0};
  }
  return {LeadTimeStatus::ok, highway.d / highway.v - merger.d / merger.v};
}

double time_to_collision(const KinematicSnapshot & ego, const KinematicSnapshot & lead, double equal_speed)
{
  const double gap = lead.y - ego.y;
  if (!(gap > 0.0)) {
    throw DataError("not a lead vehicle");
  }
  const double closing = ego.v - lead.v;
  if (std::abs(closing) < equal_speed) {
    return std::numeric_limits<double>::infinity();
  }
  return gap / closing;
}

}  // namespace bb
