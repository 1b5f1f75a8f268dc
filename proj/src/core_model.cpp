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

#include "bb/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace bb
{

std::optional<std::size_t> VehicleTrack::index_at(double t, double sample_hz) const
{
  if (states.empty()) {
    return std::nullopt;
  }
  const double offset = (t - states.front().t) * sample_hz;
  const auto idx = std::llround(offset);
  if (idx < 0 || static_cast<std::size_t>(idx) >= states.size()) {
    return std::nullopt;
  }
  if (std::abs(states[idx].t - t) >= 1e-6) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(idx);
}

std::optional<LaneRole> SiteProfile::role(LaneId lane) const
{
  const auto it = lane_roles.find(lane);
  if (it == lane_roles.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<int> SiteProfile::mainline_rank(LaneId lane) const
{
  const auto it = std::find(lane_order.begin(), lane_order.end(), lane);
  if (it == lane_order.end()) {
    return std::nullopt;
  }
  return static_cast<int>(it - lane_order.begin());
}

std::optional<LaneId> SiteProfile::outermost_lane() const
{
  for (const auto & [lane, r] : lane_roles) {
    if (r == LaneRole::outermost_mainline) {
      return lane;
    }
  }
  return std::nullopt;
}

void validate_site(const SiteProfile & site, bool merge_analysis)
{
  if (site.lane_roles.empty()) {
    throw DataError("site profile: no lanes");
  }
  for (std::size_t i = 1; i < site.lane_boundaries.size(); ++i) {
    if (!(site.lane_boundaries[i] > site.lane_boundaries[i - 1])) {
      throw DataError("site profile: lane_boundaries must be strictly increasing");
    }
  }
  if (!site.lane_boundaries.empty() && site.lane_boundaries.size() != site.lane_roles.size() + 1) {
    throw DataError("site profile: lane_boundaries must have one more entry than lanes");
  }
  for (const auto lane : site.lane_order) {
    const auto r = site.role(lane);
    if (!r || (*r != LaneRole::mainline && *r != LaneRole::outermost_mainline)) {
      throw DataError("site profile: lane_order lists non-mainline lane " + std::to_string(lane));
    }
  }
  int outermost = 0;
  int onramp = 0;
  for (const auto & [lane, r] : site.lane_roles) {
    outermost += r == LaneRole::outermost_mainline;
    onramp += r == LaneRole::onramp;
  }
  if (outermost != 1) {
    throw DataError("site profile: exactly one outermost_mainline lane required");
  }
  if (merge_analysis && onramp != 1) {
    throw DataError("site profile: exactly one onramp lane required for merge analysis");
  }
  if (site.merge_zone_end < site.merge_zone_begin) {
    throw DataError("site profile: merge_zone is empty");
  }
}

const VehicleTrack * Dataset::find(VehicleId id) const
{
  const auto it = tracks.find(id);
  return it == tracks.end() ? nullptr : &it->second;
}

SampleIndex::SampleIndex(const Dataset & dataset)
{
  for (const auto & [id, track] : dataset.tracks) {
    for (std::size_t i = 0; i < track.states.size(); ++i) {
      frames_[time_key(track.states[i].t)].push_back({&track, i});
    }
  }
}

std::span<const SampleIndex::Entry> SampleIndex::at(double t) const
{
  const auto it = frames_.find(time_key(t));
  if (it == frames_.end()) {
    return {};
  }
  return it->second;
}

std::size_t most_likely_mode_index(const PredictionInstance & instance)
{
  if (instance.modes.empty()) {
    throw DataError("no modes");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < instance.modes.size(); ++i) {
    if (instance.modes[i].probability > instance.modes[best].probability) {
      best = i;
    }
  }
  return best;
}

const PredictionMode & most_likely_mode(const PredictionInstance & instance)
{
  return instance.modes[most_likely_mode_index(instance)];
}

AnalysisConfig::AnalysisConfig()
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  ttc_bin_edges = {-inf, -10.0, -5.0, -2.0, 0.0, 1.0, 2.0, 3.0, 5.0, 10.0, inf};
}

std::vector<double> AnalysisConfig::lead_bin_edges() const
{
  std::vector<double> edges;
  const auto n = static_cast<int>(std::llround((lead_bin_max - lead_bin_min) / lead_bin_width));
  for (int i = 0; i <= n; ++i) {
    edges.push_back(lead_bin_min + i * lead_bin_width);
  }
  return edges;
}

void AnalysisConfig::validate() const
{
  if (lookbacks.empty()) {
    throw UsageError("config: lookbacks must not be empty");
  }
  for (const double tau : lookbacks) {
    if (!(tau > 0.0) || tau > kNominalHorizon + 1e-9) {
      throw UsageError("config: lookbacks must lie in (0, 5] s");
    }
  }
  const auto positive = [](double v, const char * name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw UsageError(std::string("config: ") + name + " must be positive");
      }
    };
  positive(conflict_threshold, "conflict_threshold");
  positive(safety_margin, "safety_margin");
  positive(lead_bin_width, "lead_bin_width");
  positive(lc_dwell, "lc_dwell");
  positive(neighbor_radius, "neighbor_radius");
  positive(highway_anchor_cadence, "highway_anchor_cadence");
  positive(stopped_speed, "stopped_speed");
  positive(ttc_equal_speed, "ttc_equal_speed");
  positive(extrapolation_cap, "extrapolation_cap");
  if (min_count < 1) {
    throw UsageError("config: min_count must be at least 1");
  }
  if (!(lead_bin_max > lead_bin_min)) {
    throw UsageError("config: lead_bin_max must exceed lead_bin_min");
  }
  if (ttc_bin_edges.size() < 2) {
    throw UsageError("config: ttc_bin_edges needs at least two edges");
  }
  for (std::size_t i = 1; i < ttc_bin_edges.size(); ++i) {
    if (!(ttc_bin_edges[i] > ttc_bin_edges[i - 1])) {
      throw UsageError("config: ttc_bin_edges must be strictly increasing");
    }
  }
}

std::vector<TrackViolation> validate_track(
  const VehicleTrack & track, const SiteProfile & site, double sample_hz)
{
  std::vector<TrackViolation> out;
  if (!(track.length > 0.0) || !(track.width > 0.0)) {
    out.push_back({Violation::bad_dimensions, 0, "non-positive vehicle dimensions"});
  }
  const double dt = 1.0 / sample_hz;
  for (std::size_t i = 0; i < track.states.size(); ++i) {
    const auto & s = track.states[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y)) {
      out.push_back({Violation::non_finite_value, i, "non-finite value"});
    }
    if (s.lane_id != kUnknownLane && !site.has_lane(s.lane_id)) {
      out.push_back({Violation::unknown_lane, i, "unknown lane " + std::to_string(s.lane_id)});
    }
    if (i == 0) {
      continue;
    }
    const double step = s.t - track.states[i - 1].t;
    if (!(step > 0.0)) {
      out.push_back({Violation::non_monotone_time, i, "non-monotone time"});
    } else if (std::abs(step - dt) >= 1e-6) {
      out.push_back({Violation::non_uniform_dt, i, "non-uniform dt"});
    }
  }
  return out;
}

std::string to_string(LaneRole role)
{
  switch (role) {
    case LaneRole::mainline: return "mainline";
    case LaneRole::outermost_mainline: return "outermost_mainline";
    case LaneRole::onramp: return "onramp";
    case LaneRole::auxiliary: return "auxiliary";
    case LaneRole::offramp: return "offramp";
  }
  return "unknown";
}

std::string to_string(SiteId id)
{
  switch (id) {
    case SiteId::us101: return "US101";
    case SiteId::i80: return "I80";
    case SiteId::custom: return "custom";
  }
  return "custom";
}

std::string to_string(Violation v)
{
  switch (v) {
    case Violation::non_monotone_time: return "non-monotone time";
    case Violation::non_uniform_dt: return "non-uniform dt";
    case Violation::unknown_lane: return "unknown lane";
    case Violation::non_finite_value: return "non-finite value";
    case Violation::bad_dimensions: return "bad dimensions";
  }
  return "unknown";
}

}  // namespace bb

#include "bb/parallel.hpp"

namespace bb
{

namespace
{
std::atomic<unsigned> g_threads{0};
}

void set_default_threads(unsigned threads)
{
  g_threads = threads;
}

unsigned default_threads()
{
  const unsigned t = g_threads.load();
  if (t != 0) {
    return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace bb
