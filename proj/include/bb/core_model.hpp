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

#ifndef BB__CORE_MODEL_HPP_
#define BB__CORE_MODEL_HPP_

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bb
{

using VehicleId = std::int64_t;
using LaneId = int;

inline constexpr LaneId kUnknownLane = -1;

/// Sampling stride of model inputs and outputs (2.5 Hz).
inline constexpr double kPredictionStep = 0.4;
/// Number of future samples in a prediction (0.4 s .. 4.8 s).
inline constexpr int kPredictionSteps = 12;
/// Number of history samples in a request (anchor included).
inline constexpr int kHistorySamples = 8;
/// Nominal prediction horizon; look-backs may not exceed it.
inline constexpr double kNominalHorizon = 5.0;

/// Rows are samples, columns are (x lateral, y longitudinal).
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Error classes map onto CLI exit codes (usage 1, data 2, internal 3).
class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Millisecond key used to match anchors across files.
inline std::int64_t time_key(double t) { return static_cast<std::int64_t>(std::llround(t * 1000.0)); }

struct VehicleState
{
  double t{0.0};
  double x{0.0};
  double y{0.0};
  std::optional<double> gx;
  std::optional<double> gy;
  LaneId lane_id{kUnknownLane};
  std::optional<double> v;

  Eigen::Vector2d position() const { return {x, y}; }
};

enum class VehicleClass { motorcycle = 1, automobile = 2, truck = 3 };

struct VehicleTrack
{
  VehicleId vehicle_id{0};
  VehicleClass klass{VehicleClass::automobile};
  double length{0.0};
  double width{0.0};
  std::vector<VehicleState> states;

  bool empty() const { return states.empty(); }
  double first_time() const { return states.front().t; }
  double last_time() const { return states.back().t; }

  /// Index of the sample at time `t`, if the track has one (|dt| < 1e-6).
  std::optional<std::size_t> index_at(double t, double sample_hz) const;
};

enum class LaneRole { mainline, outermost_mainline, onramp, auxiliary, offramp };

enum class SiteId { us101, i80, custom };

enum class RawUnit { feet, meters };

inline constexpr double kFeetToMeters = 0.3048;

struct SiteProfile
{
  SiteId site_id{SiteId::custom};
  std::string name{"custom"};
  std::map<LaneId, LaneRole> lane_roles;
  /// Mainline lanes, innermost (fastest) first.
  std::vector<LaneId> lane_order;
  /// Lateral lane edges in meters; interval k belongs to lane k + 1.
  std::vector<double> lane_boundaries;
  RawUnit raw_unit{RawUnit::meters};
  double merge_zone_begin{0.0};
  double merge_zone_end{0.0};

  bool has_lane(LaneId lane) const { return lane_roles.count(lane) != 0; }
  std::optional<LaneRole> role(LaneId lane) const;
  /// Position of `lane` in lane_order, or nullopt for non-mainline lanes.
  std::optional<int> mainline_rank(LaneId lane) const;
  std::optional<LaneId> outermost_lane() const;
};

/// Throws DataError when the profile breaks its invariants.
void validate_site(const SiteProfile & site, bool merge_analysis);

struct Dataset
{
  SiteProfile site;
  std::map<VehicleId, VehicleTrack> tracks;
  double sample_hz{10.0};
  /// Absolute epoch of t = 0 in milliseconds (NGSIM Global_Time).
  std::int64_t time_origin_ms{0};

  double dt() const { return 1.0 / sample_hz; }
  const VehicleTrack * find(VehicleId id) const;
};

/// Samples of every track grouped by timestamp (millisecond key), in
/// ascending vehicle id order.
class SampleIndex
{
public:
  struct Entry
  {
    const VehicleTrack * track;
    std::size_t index;

    const VehicleState & state() const { return track->states[index]; }
  };

  explicit SampleIndex(const Dataset & dataset);

  std::span<const Entry> at(double t) const;

private:
  std::unordered_map<std::int64_t, std::vector<Entry>> frames_;
};

struct PredictionMode
{
  double probability{1.0};
  /// Anchor position followed by kPredictionSteps future samples.
  Points2 points;
};

struct PredictionInstance
{
  std::int64_t request_id{0};
  VehicleId vehicle_id{0};
  double anchor_t{0.0};
  std::vector<PredictionMode> modes;
};

/// Index of the most probable mode; ties resolve to the lowest index.
std::size_t most_likely_mode_index(const PredictionInstance & instance);
const PredictionMode & most_likely_mode(const PredictionInstance & instance);

struct AnalysisConfig
{
  std::vector<double> lookbacks{1.0, 2.0, 3.0, 4.0, 5.0};
  double conflict_threshold{1.0};
  double safety_margin{0.3};
  double lead_bin_width{1.0};
  double lead_bin_min{-6.0};
  double lead_bin_max{6.0};
  std::vector<double> ttc_bin_edges;
  double lc_dwell{0.8};
  double neighbor_radius{50.0};
  int min_count{5};
  double highway_anchor_cadence{1.0};
  double stopped_speed{0.1};
  double ttc_equal_speed{0.01};
  double extrapolation_cap{30.0};

  AnalysisConfig();

  std::vector<double> lead_bin_edges() const;
  /// Throws UsageError on invalid values.
  void validate() const;
};

enum class Violation { non_monotone_time, non_uniform_dt, unknown_lane, non_finite_value, bad_dimensions };

struct TrackViolation
{
  Violation kind;
  std::size_t index;
  std::string message;
};

/// Diagnostic check; an empty result means the track is well formed.
std::vector<TrackViolation> validate_track(
  const VehicleTrack & track, const SiteProfile & site, double sample_hz);

std::string to_string(LaneRole role);
std::string to_string(SiteId id);
std::string to_string(Violation v);

}  // namespace bb

#endif  // BB__CORE_MODEL_HPP_
