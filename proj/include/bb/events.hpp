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

#ifndef BB__EVENTS_HPP_
#define BB__EVENTS_HPP_

#include "bb/core_model.hpp"
#include "bb/ingestion.hpp"

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace bb
{

/// Lane whose lateral interval contains x. Intervals are (b_k, b_k+1], with
/// the first one closed on both sides, so a point on an interior edge goes to
/// the lower-indexed lane. Outside all edges gives kUnknownLane.
LaneId lane_from_x(double x, const SiteProfile & site);

/// Recorded lane when present, otherwise lane_from_x.
LaneId assign_lane(const VehicleState & state, const SiteProfile & site);

enum class LaneChangeDirection { toward_median, toward_shoulder };

struct LaneChange
{
  VehicleId vehicle_id{0};
  double t_lc{0.0};
  std::size_t index{0};
  LaneId from_lane{kUnknownLane};
  LaneId to_lane{kUnknownLane};
  LaneChangeDirection direction{LaneChangeDirection::toward_median};
};

LaneChangeDirection lane_change_direction(LaneId from, LaneId to, const SiteProfile & site);

/// Samples needed to cover `dwell` seconds at spacing `step`.
std::size_t dwell_samples(double dwell, double step);

/// A change is reported at the first sample of a new lane that persists for
/// `dwell` samples; with `tail_sustains`, a run reaching the end of the
/// sequence also counts. Unknown lanes never start or end a lane.
std::vector<LaneChange> detect_lane_changes(
  std::span<const LaneId> lanes, std::span<const double> times, const SiteProfile & site,
  std::size_t dwell, bool tail_sustains, VehicleId vehicle_id = 0);

std::vector<LaneChange> detect_lane_changes(
  const VehicleTrack & track, const SiteProfile & site, double lc_dwell, double sample_hz);

/// Anchor sample plus up to kPredictionSteps samples at the prediction stride.
struct Horizon
{
  VehicleId vehicle_id{0};
  double anchor_t{0.0};
  std::vector<double> t;
  Points2 points;
  std::vector<LaneId> lanes;
};

/// Lane changes on a horizon; the final sample counts as sustained.
std::vector<LaneChange> detect_lane_changes(const Horizon & horizon, const SiteProfile & site, double lc_dwell);

/// Supplies outcome trajectories. Conditions always come from the dataset;
/// a source only decides what happens after the anchor.
class TrajectorySource
{
public:
  virtual ~TrajectorySource() = default;
  /// "naturalistic" or "model:<name>".
  virtual std::string name() const = 0;
  virtual std::optional<Horizon> horizon(VehicleId id, double anchor_t) const = 0;
};

/// Ground truth at the prediction stride. In the global frame, positions come
/// from (gx, gy) mapped into the road frame by `transform`.
class NaturalisticSource final : public TrajectorySource
{
public:
  explicit NaturalisticSource(
    const Dataset & dataset, Frame frame = Frame::local, std::optional<FrameTransform> transform = std::nullopt);

  std::string name() const override { return "naturalistic"; }
  std::optional<Horizon> horizon(VehicleId id, double anchor_t) const override;

private:
  const Dataset & dataset_;
  Frame frame_;
  std::optional<FrameTransform> transform_;
  std::size_t stride_;
};

/// Most likely mode of each prediction; lanes assigned geometrically.
class PredictedSource final : public TrajectorySource
{
public:
  PredictedSource(const PredictionSet & predictions, const SiteProfile & site);

  std::string name() const override { return "model:" + predictions_.source; }
  std::optional<Horizon> horizon(VehicleId id, double anchor_t) const override;

private:
  const PredictionSet & predictions_;
  const SiteProfile & site_;
};

enum class PassOrder { merger_first, highway_first, undetermined };

std::string to_string(PassOrder p);

/// First time the horizon reaches y >= `y` (linear interpolation between
/// samples). Beyond the last sample the motion is extrapolated at the last
/// speed for at most `cap` seconds.
std::optional<double> crossing_time(const Horizon & horizon, double y, double cap);

PassOrder determine_pass_order(
  double merge_point_y, const Horizon & merger, const Horizon & highway, double cap = 30.0);

inline bool classify_conflict(double lead_time, double threshold)
{
  return std::abs(lead_time) <= threshold;
}

enum class RecordStatus {
  ok,
  no_merger_history,
  no_highway_vehicle,
  no_highway_history,
  no_future,
  stopped_vehicle,
  downstream,
  missing_prediction,
};

std::string to_string(RecordStatus s);

struct LookbackRecord
{
  double tau{0.0};
  /// t_m - tau.
  double t_l{0.0};
  /// Dataset sample used for t_l (equal to t_l when it lies on the grid).
  double anchor_t{0.0};
  RecordStatus status{RecordStatus::ok};
  std::optional<VehicleId> highway_id;
  double lead_time{0.0};
  bool conflict{false};
  PassOrder pass_order{PassOrder::undetermined};
  /// Highway vehicle left the outermost lane toward the median in (t_l, t_m].
  bool highway_lane_change{false};
  /// Highway vehicle left the outermost lane toward the shoulder in (t_l, t_m].
  bool highway_shoulder_exit{false};

  bool merger_passed_first() const { return pass_order == PassOrder::merger_first; }
  bool usable() const { return status == RecordStatus::ok; }
};

struct MergeEvent
{
  std::int64_t event_id{0};
  VehicleId merger_id{0};
  double t_m{0.0};
  double merge_point_y{0.0};
  std::vector<LookbackRecord> lookbacks;

  const LookbackRecord * at(double tau) const;
};

/// Nearest vehicle upstream of the merge point in the outermost mainline
/// lane at `t`, within neighbor_radius of the merger.
std::optional<VehicleId> select_interacting_highway_vehicle(
  const MergeEvent & event, double t, const Dataset & dataset, const SampleIndex & index,
  double neighbor_radius);

/// Finds on-ramp merges and resolves every look-back with naturalistic outcomes.
std::vector<MergeEvent> extract_merge_events(const Dataset & dataset, const AnalysisConfig & config);

struct MergeOutcome
{
  PassOrder pass_order{PassOrder::undetermined};
  bool lane_change{false};
  bool shoulder_exit{false};
};

/// Outcome of one usable record under `source`; nullopt when the source has
/// no trajectory for either vehicle.
std::optional<MergeOutcome> merge_outcome(
  const MergeEvent & event, const LookbackRecord & record, const TrajectorySource & source,
  const SiteProfile & site, const AnalysisConfig & config);

/// Copy of `events` with outcomes recomputed from `source`; conditions kept.
std::vector<MergeEvent> apply_source(
  std::span<const MergeEvent> events, const TrajectorySource & source, const SiteProfile & site,
  const AnalysisConfig & config);

void write_events_csv(std::span<const MergeEvent> events, std::ostream & out);

struct HighwayAnchor
{
  VehicleId vehicle_id{0};
  double anchor_t{0.0};
  LaneId lane{kUnknownLane};
  VehicleId lead_id{0};
  double ttc{0.0};
};

/// Anchors every `highway_anchor_cadence` seconds for vehicles outside
/// `excluded` that sit in a mainline lane with a faster lane beside it, have
/// full history and future, and follow a same-lane lead within neighbor_radius.
std::vector<HighwayAnchor> extract_highway_anchors(
  const Dataset & dataset, const std::set<VehicleId> & excluded, const AnalysisConfig & config);

/// Lane change toward a faster mainline lane within (anchor, anchor + tau].
bool faster_lane_change(const Horizon & horizon, double tau, const SiteProfile & site, const AnalysisConfig & config);

/// Vehicles taking part in merges (mergers and interacting highway vehicles).
std::set<VehicleId> merge_participants(std::span<const MergeEvent> events);

}  // namespace bb

#endif  // BB__EVENTS_HPP_
