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

#ifndef BB__INGESTION_HPP_
#define BB__INGESTION_HPP_

#include "bb/core_model.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bb
{

// ---------------------------------------------------------------------------
// NGSIM trajectories

/// Parses an NGSIM-schema CSV. Positions and dimensions are converted to
/// meters when the site records feet; Global_Time becomes seconds relative
/// to the earliest row.
Dataset parse_ngsim_csv(std::istream & in, const SiteProfile & site, const std::string & origin, double raw_hz = 10.0);
Dataset parse_ngsim_csv(const std::filesystem::path & path, const SiteProfile & site, double raw_hz = 10.0);

/// Writes NGSIM columns in the site's raw unit.
void write_ngsim_csv(const Dataset & dataset, std::ostream & out);

/// Pure decimation keeping each track's first sample.
Dataset resample(const Dataset & dataset, double target_hz);

/// Number of dataset samples per prediction step; throws when 0.4 s is not
/// a whole number of samples.
std::size_t prediction_stride(double sample_hz);

// ---------------------------------------------------------------------------
// Canonical dataset directory (dataset.csv + site.cfg)

void write_dataset(const Dataset & dataset, std::ostream & out);
Dataset read_dataset(std::istream & in, const SiteProfile & site, const std::string & origin);
void save_dataset_dir(const Dataset & dataset, const std::filesystem::path & dir);
Dataset load_dataset_dir(const std::filesystem::path & dir);

// ---------------------------------------------------------------------------
// Train / validation / test split

enum class Split { train, validation, test };

std::string to_string(Split s);

struct SplitPiece
{
  VehicleId vehicle_id;
  Split split;
  std::size_t begin;
  std::size_t end;
};

struct SplitAssignment
{
  /// Segment order along the recording time axis.
  std::array<Split, 3> order{Split::train, Split::validation, Split::test};
  /// Times separating the first/second and second/third segments.
  std::array<double, 2> boundaries{0.0, 0.0};
  std::vector<SplitPiece> pieces;
  std::array<std::int64_t, 3> samples{0, 0, 0};

  Split split_of(double t) const;
};

/// Partitions the recording into three contiguous time segments holding the
/// requested fractions of all samples. The seed selects the segment order
/// (seed 0: train, validation, test). Tracks crossing a boundary are cut.
SplitAssignment split_dataset(const Dataset & dataset, std::array<double, 3> ratios, std::uint64_t seed);

/// Tracks truncated to the samples assigned to any of `splits`.
Dataset apply_split(const Dataset & dataset, const SplitAssignment & assignment, const std::set<Split> & splits);

void write_split(const SplitAssignment & assignment, std::ostream & out);
SplitAssignment read_split(std::istream & in, const std::string & origin);

// ---------------------------------------------------------------------------
// Prediction requests (bb-req v1)

struct RequestAnchor
{
  std::int64_t request_id{0};
  VehicleId vehicle_id{0};
  double anchor_t{0.0};
};

struct RequestTrack
{
  VehicleId vehicle_id{0};
  std::vector<double> t;
  Points2 points;
};

struct PredictionRequest
{
  std::int64_t request_id{0};
  VehicleId ego_id{0};
  double anchor_t{0.0};
  RequestTrack ego;
  std::vector<RequestTrack> neighbors;
};

/// Header fields after the format tag, e.g. config_digest.
using WireHeader = std::map<std::string, std::string>;

/// Builds the request for one anchor, or nullopt when the ego vehicle lacks
/// kHistorySamples of history at the prediction stride.
std::optional<PredictionRequest> build_request(
  const Dataset & dataset, const RequestAnchor & anchor, double neighbor_radius);

struct RequestWriteResult
{
  std::size_t written{0};
  std::vector<RequestAnchor> skipped;
};

RequestWriteResult write_prediction_requests(
  const Dataset & dataset, std::span<const RequestAnchor> anchors, double neighbor_radius,
  const WireHeader & header, std::ostream & out);

std::vector<PredictionRequest> read_prediction_requests(
  std::istream & in, const std::string & origin, WireHeader * header = nullptr);

// ---------------------------------------------------------------------------
// Predictions (bb-pred v1)

enum class Frame { local, global };

std::string to_string(Frame f);

/// Rigid map from the global frame into the road frame.
struct FrameTransform
{
  Eigen::Matrix2d rotation{Eigen::Matrix2d::Identity()};
  Eigen::Vector2d translation{Eigen::Vector2d::Zero()};

  Eigen::Vector2d to_local(const Eigen::Vector2d & global) const { return rotation * global + translation; }
  Eigen::Vector2d to_global(const Eigen::Vector2d & local) const
  {
    return rotation.transpose() * (local - translation);
  }
};

/// Least-squares rigid fit of (gx, gy) onto (x, y); nullopt without global data.
std::optional<FrameTransform> fit_frame_transform(const Dataset & dataset);

struct PredictionSet
{
  std::string source;
  Frame frame{Frame::local};
  WireHeader header;
  /// Keyed by (vehicle_id, time_key(anchor_t)); points are in the road frame.
  std::map<std::pair<VehicleId, std::int64_t>, PredictionInstance> instances;
  /// Instances whose probabilities did not already sum to one.
  std::size_t normalized{0};

  const PredictionInstance * find(VehicleId id, double anchor_t) const;
};

PredictionSet parse_predictions(std::istream & in, const Dataset & dataset, const std::string & origin);
PredictionSet parse_predictions(const std::filesystem::path & path, const Dataset & dataset);

/// Writes future steps 1..12 of every mode; points are written in the road frame.
void write_predictions(
  std::span<const PredictionInstance> instances, const WireHeader & header, std::ostream & out);

}  // namespace bb

#endif  // BB__INGESTION_HPP_
