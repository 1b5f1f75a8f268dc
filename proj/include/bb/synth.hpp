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

#ifndef BB__SYNTH_HPP_
#define BB__SYNTH_HPP_

#include "bb/config_io.hpp"
#include "bb/core_model.hpp"
#include "bb/ingestion.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace bb
{

struct SynthParams
{
  int n_events{400};
  int n_highway{400};
  /// Zero gives a step response at T = 0.
  double pass_first_logistic_scale{0.5};
  double courtesy_p_conflict{0.6};
  double courtesy_p_noconflict{0.05};
  double lc_ttc_threshold{3.0};
  double speed_min{8.0};
  double speed_max{12.0};
  double lead_time_min{-4.0};
  double lead_time_max{4.0};
  double lane_width{3.6};
  double noise_sigma_lateral{0.0};
  double sample_hz{10.0};
  std::uint64_t seed{1};

  void validate() const;
};

SynthParams synth_params_from_key_values(const KeyValues & kv);
KeyValues to_key_values(const SynthParams & p);

/// Three mainline lanes (3 is outermost) and an on-ramp lane 4, `lane_width` apart.
SiteProfile synth_site(double lane_width = 3.6);

/// Fixed rigid map applied to produce the synthetic global coordinates.
FrameTransform synth_global_transform();

/// Deterministic stream keyed by (seed, stream, index).
class SynthRng
{
public:
  SynthRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double uniform(double lo, double hi);
  double normal(double sigma);

private:
  std::mt19937_64 engine_;
};

struct MergeLabel
{
  std::int64_t event_index{0};
  VehicleId merger_id{0};
  VehicleId highway_id{0};
  double t_m{0.0};
  double merge_point_y{0.0};
  /// Lead time at the five-second look-back.
  double lead_time{0.0};
  bool conflict{false};
  bool merger_first{false};
  bool courtesy_lc{false};
};

struct HighwayLabel
{
  VehicleId follower_id{0};
  VehicleId leader_id{0};
  double anchor_t{0.0};
  double ttc{0.0};
  bool lane_change{false};
};

struct LaneChangeLabel
{
  VehicleId vehicle_id{0};
  double t_cross{0.0};
  LaneId from_lane{kUnknownLane};
  LaneId to_lane{kUnknownLane};
};

struct SynthOutput
{
  Dataset dataset;
  std::vector<MergeLabel> merges;
  std::vector<HighwayLabel> highway;
  std::vector<LaneChangeLabel> lane_changes;
};

SynthOutput generate_merge_dataset(const SynthParams & params);
SynthOutput generate_highway_dataset(const SynthParams & params);
/// Merge events followed by highway pairs, in disjoint time slots.
SynthOutput generate_dataset(const SynthParams & params);

/// `n_keep` lane-keeping tracks then `n_change` tracks with one change each, lanes taken from x only.
SynthOutput generate_lane_change_tracks(const SynthParams & params, int n_keep, int n_change);

void write_labels(const SynthOutput & out, std::ostream & os);

/// Extrapolates the last position with the speed of the last two samples.
PredictionInstance constant_velocity_predict(std::span<const double> t, const Points2 & history);
PredictionInstance constant_velocity_predict(const PredictionRequest & request);

}  // namespace bb

#endif  // BB__SYNTH_HPP_
