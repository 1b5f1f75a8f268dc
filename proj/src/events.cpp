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

#include "bb/events.hpp"

#include "bb/config_io.hpp"
#include "bb/kinematics.hpp"
#include "bb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace bb
{

LaneId lane_from_x(double x, const SiteProfile & site)
{
  const auto & b = site.lane_boundaries;
  if (b.size() < 2 || !(x >= b.front()) || !(x <= b.back())) {
    return kUnknownLane;
  }
  const auto pos = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), x) - b.begin());
  const std::size_t interval = pos == 0 ? 0 : pos - 1;
  if (interval >= site.lane_roles.size()) {
    return kUnknownLane;
  }
  return std::next(site.lane_roles.begin(), static_cast<std::ptrdiff_t>(interval))->first;
}

LaneId assign_lane(const VehicleState & state, const SiteProfile & site)
{
  if (state.lane_id != kUnknownLane) {
    return state.lane_id;
  }
  return lane_from_x(state.x, site);
}

LaneChangeDirection lane_change_direction(LaneId from, LaneId to, const SiteProfile & site)
{
  const auto rf = site.mainline_rank(from);
  const auto rt = site.mainline_rank(to);
  if (rf && rt) {
    return *rt < *rf ? LaneChangeDirection::toward_median : LaneChangeDirection::toward_shoulder;
  }
  // Lane ids grow from the median toward the shoulder.
  return to < from ? LaneChangeDirection::toward_median : LaneChangeDirection::toward_shoulder;
}

std::size_t dwell_samples(double dwell, double step)
{
  const double n = std::ceil(dwell / step - 1e-9);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

std::vector<LaneChange> detect_lane_changes(
  std::span<const LaneId> lanes, std::span<const double> times, const SiteProfile & site,
  std::size_t dwell, bool tail_sustains, VehicleId vehicle_id)
{
  std::vector<LaneChange> out;
  const std::size_t n = lanes.size();
  std::size_t i = 0;
  while (i < n && lanes[i] == kUnknownLane) {
    ++i;
  }
  if (i >= n) {
    return out;
  }
  LaneId current = lanes[i];
  while (i < n) {
    const LaneId lane = lanes[i];
    if (lane == kUnknownLane || lane == current) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && lanes[j] == lane) {
      ++j;
    }
    if (j - i >= dwell || (tail_sustains && j == n)) {
      out.push_back({vehicle_id, times[i], i, current, lane, lane_change_direction(current, lane, site)});
      current = lane;
    }
    i = j;
  }
  return out;
}

std::vector<LaneChange> detect_lane_changes(
  const VehicleTrack & track, const SiteProfile & site, double lc_dwell, double sample_hz)
{
  std::vector<LaneId> lanes;
  std::vector<double> times;
  lanes.reserve(track.states.size());
  times.reserve(track.states.size());
  for (const auto & s : track.states) {
    lanes.push_back(assign_lane(s, site));
    times.push_back(s.t);
  }
  return detect_lane_changes(
    lanes, times, site, dwell_samples(lc_dwell, 1.0 / sample_hz), false, track.vehicle_id);
}

std::vector<LaneChange> detect_lane_changes(const Horizon & horizon, const SiteProfile & site, double lc_dwell)
{
  return detect_lane_changes(
    horizon.lanes, horizon.t, site, dwell_samples(lc_dwell, kPredictionStep), true, horizon.vehicle_id);
}

// ---------------------------------------------------------------------------

NaturalisticSource::NaturalisticSource(const Dataset & dataset, Frame frame, std::optional<FrameTransform> transform)
: dataset_(dataset), frame_(frame), transform_(transform), stride_(prediction_stride(dataset.sample_hz))
{
  if (frame_ == Frame::global && !transform_) {
    throw DataError("global frame requires a frame transform");
  }
}

std::optional<Horizon> NaturalisticSource::horizon(VehicleId id, double anchor_t) const
{
  const VehicleTrack * track = dataset_.find(id);
  if (track == nullptr) {
    return std::nullopt;
  }
  const auto idx = track->index_at(anchor_t, dataset_.sample_hz);
  if (!idx || *idx + kPredictionSteps * stride_ >= track->states.size()) {
    return std::nullopt;
  }
  Horizon h;
  h.vehicle_id = id;
  h.anchor_t = track->states[*idx].t;
  h.points.resize(kPredictionSteps + 1, 2);
  for (int k = 0; k <= kPredictionSteps; ++k) {
    const auto & s = track->states[*idx + k * stride_];
    // Nominal step times keep both sources on an identical time axis.
    h.t.push_back(h.anchor_t + static_cast<double>(k) * kPredictionStep);
    h.lanes.push_back(assign_lane(s, dataset_.site));
    if (frame_ == Frame::global) {
      if (!s.gx || !s.gy) {
        return std::nullopt;
      }
      h.points.row(k) = transform_->to_local(Eigen::Vector2d(*s.gx, *s.gy)).transpose();
    } else {
      h.points.row(k) = s.position().transpose();
    }
  }
  return h;
}

PredictedSource::PredictedSource(const PredictionSet & predictions, const SiteProfile & site)
: predictions_(predictions), site_(site)
{
}

std::optional<Horizon> PredictedSource::horizon(VehicleId id, double anchor_t) const
{
  const PredictionInstance * inst = predictions_.find(id, anchor_t);
  if (inst == nullptr) {
    return std::nullopt;
  }
  const auto & mode = most_likely_mode(*inst);
  Horizon h;
  h.vehicle_id = id;
  h.anchor_t = inst->anchor_t;
  h.points = mode.points;
  for (Eigen::Index k = 0; k < mode.points.rows(); ++k) {
    h.t.push_back(inst->anchor_t + static_cast<double>(k) * kPredictionStep);
    h.lanes.push_back(lane_from_x(mode.points(k, 0), site_));
  }
  return h;
}

// ---------------------------------------------------------------------------

std::string to_string(PassOrder p)
{
  switch (p) {
    case PassOrder::merger_first: return "merger_first";
    case PassOrder::highway_first: return "highway_first";
    case PassOrder::undetermined: return "undetermined";
  }
  return "undetermined";
}

std::optional<double> crossing_time(const Horizon & h, double y, double cap)
{
  const auto n = h.points.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (h.points(k, 1) >= y) {
      if (k == 0) {
        return h.t[0];
      }
      const double y0 = h.points(k - 1, 1);
      const double y1 = h.points(k, 1);
      const double frac = (y - y0) / (y1 - y0);
      return h.t[k - 1] + frac * (h.t[k] - h.t[k - 1]);
    }
  }
  if (n < 2) {
    return std::nullopt;
  }
  const double dt = h.t[n - 1] - h.t[n - 2];
  const double v = (h.points(n - 1, 1) - h.points(n - 2, 1)) / dt;
  if (!(v > 0.0)) {
    return std::nullopt;
  }
  const double extra = (y - h.points(n - 1, 1)) / v;
  if (extra > cap) {
    return std::nullopt;
  }
  return h.t[n - 1] + extra;
}

PassOrder determine_pass_order(double merge_point_y, const Horizon & merger, const Horizon & highway, double cap)
{
  const auto tm = crossing_time(merger, merge_point_y, cap);
  const auto th = crossing_time(highway, merge_point_y, cap);
  if (!tm && !th) {
    return PassOrder::undetermined;
  }
  if (!th) {
    return PassOrder::merger_first;
  }
  if (!tm) {
    return PassOrder::highway_first;
  }
  if (*tm == *th) {
    return PassOrder::undetermined;
  }
  return *tm < *th ? PassOrder::merger_first : PassOrder::highway_first;
}

std::string to_string(RecordStatus s)
{
  switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::no_merger_history: return "no_merger_history";
    case RecordStatus::no_highway_vehicle: return "no_highway_vehicle";
    case RecordStatus::no_highway_history: return "no_highway_history";
    case RecordStatus::no_future: return "no_future";
    case RecordStatus::stopped_vehicle: return "stopped_vehicle";
    case RecordStatus::downstream: return "downstream";
    case RecordStatus::missing_prediction: return "missing_prediction";
  }
  return "ok";
}

const LookbackRecord * MergeEvent::at(double tau) const
{
  for (const auto & r : lookbacks) {
    if (std::abs(r.tau - tau) < 1e-9) {
      return &r;
    }
  }
  return nullptr;
}

std::optional<VehicleId> select_interacting_highway_vehicle(
  const MergeEvent & event, double t, const Dataset & dataset, const SampleIndex & index,
  double neighbor_radius)
{
  const VehicleTrack * merger = dataset.find(event.merger_id);
  if (merger == nullptr) {
    return std::nullopt;
  }
  const auto midx = merger->index_at(t, dataset.sample_hz);
  if (!midx) {
    return std::nullopt;
  }
  const double merger_y = merger->states[*midx].y;
  std::optional<VehicleId> best;
  double best_d = 0.0;
  for (const auto & entry : index.at(t)) {
    const auto & s = entry.state();
    if (entry.track->vehicle_id == event.merger_id) {
      continue;
    }
    if (dataset.site.role(assign_lane(s, dataset.site)) != LaneRole::outermost_mainline) {
      continue;
    }
    const double d = event.merge_point_y - s.y;
    if (d < 0.0 || std::abs(s.y - merger_y) > neighbor_radius) {
      continue;
    }
    if (!best || d < best_d) {
      best = entry.track->vehicle_id;
      best_d = d;
    }
  }
  return best;
}

std::optional<MergeOutcome> merge_outcome(
  const MergeEvent & event, const LookbackRecord & record, const TrajectorySource & source,
  const SiteProfile & site, const AnalysisConfig & config)
{
  if (!record.highway_id) {
    return std::nullopt;
  }
  const auto merger = source.horizon(event.merger_id, record.anchor_t);
  const auto highway = source.horizon(*record.highway_id, record.anchor_t);
  if (!merger || !highway) {
    return std::nullopt;
  }
  MergeOutcome out;
  out.pass_order = determine_pass_order(event.merge_point_y, *merger, *highway, config.extrapolation_cap);
  for (const auto & c : detect_lane_changes(*highway, site, config.lc_dwell)) {
    if (c.t_lc > event.t_m + 1e-9) {
      break;
    }
    if (site.role(c.from_lane) == LaneRole::outermost_mainline) {
      if (c.direction == LaneChangeDirection::toward_median) {
        out.lane_change = true;
      } else {
        out.shoulder_exit = true;
      }
      break;
    }
  }
  return out;
}

namespace
{

struct Run
{
  LaneId lane;
  std::size_t begin;
  std::size_t length;
};

std::optional<std::size_t> find_merge_index(const VehicleTrack & track, const SiteProfile & site, std::size_t dwell)
{
  std::vector<Run> runs;
  for (std::size_t i = 0; i < track.states.size(); ++i) {
    const LaneId lane = assign_lane(track.states[i], site);
    if (!runs.empty() && runs.back().lane == lane) {
      ++runs.back().length;
    } else {
      runs.push_back({lane, i, 1});
    }
  }
  std::optional<LaneRole> previous;
  for (const auto & run : runs) {
    if (run.lane == kUnknownLane || run.length < dwell) {
      continue;
    }
    const auto role = site.role(run.lane);
    if (role == LaneRole::outermost_mainline && previous &&
      (*previous == LaneRole::onramp || *previous == LaneRole::auxiliary))
    {
      return run.begin;
    }
    previous = role;
  }
  return std::nullopt;
}

void resolve_record(
  MergeEvent & event, LookbackRecord & rec, const Dataset & dataset, const SampleIndex & index,
  const NaturalisticSource & natural, const AnalysisConfig & config)
{
  const VehicleTrack & merger = *dataset.find(event.merger_id);
  const std::size_t span = (kHistorySamples - 1) * prediction_stride(dataset.sample_hz);
  const double pos = (rec.t_l - merger.first_time()) * dataset.sample_hz;
  const double k = std::floor(pos + 1e-6);
  if (k < 0.0) {
    rec.anchor_t = rec.t_l;
    rec.status = RecordStatus::no_merger_history;
    return;
  }
  const auto idx = static_cast<std::size_t>(k);
  rec.anchor_t = merger.states[idx].t;
  if (idx < span) {
    rec.status = RecordStatus::no_merger_history;
    return;
  }
  rec.highway_id = select_interacting_highway_vehicle(event, rec.anchor_t, dataset, index, config.neighbor_radius);
  if (!rec.highway_id) {
    rec.status = RecordStatus::no_highway_vehicle;
    return;
  }
  const VehicleTrack & highway = *dataset.find(*rec.highway_id);
  const auto hidx = highway.index_at(rec.anchor_t, dataset.sample_hz);
  if (!hidx || *hidx < span) {
    rec.status = RecordStatus::no_highway_history;
    return;
  }
  if (!natural.horizon(event.merger_id, rec.anchor_t) || !natural.horizon(*rec.highway_id, rec.anchor_t)) {
    rec.status = RecordStatus::no_future;
    return;
  }
  const auto m = snapshot(merger, rec.anchor_t, dataset.sample_hz, event.merge_point_y);
  const auto h = snapshot(highway, rec.anchor_t, dataset.sample_hz, event.merge_point_y);
  const auto lead = lead_time(m, h, config.stopped_speed);
  if (lead.status == LeadTimeStatus::stopped_vehicle) {
    rec.status = RecordStatus::stopped_vehicle;
    return;
  }
  if (lead.status == LeadTimeStatus::downstream) {
    rec.status = RecordStatus::downstream;
    return;
  }
  rec.lead_time = lead.value;
  rec.conflict = classify_conflict(lead.value, config.conflict_threshold);
  const auto outcome = merge_outcome(event, rec, natural, dataset.site, config);
  rec.pass_order = outcome->pass_order;
  rec.highway_lane_change = outcome->lane_change;
  rec.highway_shoulder_exit = outcome->shoulder_exit;
  rec.status = RecordStatus::ok;
}

}  // namespace

std::vector<MergeEvent> extract_merge_events(const Dataset & dataset, const AnalysisConfig & config)
{
  validate_site(dataset.site, true);
  config.validate();
  const SampleIndex index(dataset);
  const NaturalisticSource natural(dataset);
  const std::size_t dwell = dwell_samples(config.lc_dwell, dataset.dt());

  std::vector<const VehicleTrack *> tracks;
  for (const auto & [id, track] : dataset.tracks) {
    tracks.push_back(&track);
  }
  std::vector<std::optional<MergeEvent>> found(tracks.size());
  parallel_for(
    tracks.size(), [&](std::size_t i) {
      const VehicleTrack & track = *tracks[i];
      const auto midx = find_merge_index(track, dataset.site, dwell);
      if (!midx) {
        return;
      }
      MergeEvent ev;
      ev.merger_id = track.vehicle_id;
      ev.t_m = track.states[*midx].t;
      ev.merge_point_y = track.states[*midx].y;
      if (ev.merge_point_y < dataset.site.merge_zone_begin || ev.merge_point_y > dataset.site.merge_zone_end) {
        return;
      }
      for (const double tau : config.lookbacks) {
        LookbackRecord rec;
        rec.tau = tau;
        rec.t_l = ev.t_m - tau;
        resolve_record(ev, rec, dataset, index, natural, config);
        ev.lookbacks.push_back(rec);
      }
      found[i] = std::move(ev);
    });

  std::vector<MergeEvent> events;
  for (auto & ev : found) {
    if (ev) {
      ev->event_id = static_cast<std::int64_t>(events.size());
      events.push_back(std::move(*ev));
    }
  }
  return events;
}

std::vector<MergeEvent> apply_source(
  std::span<const MergeEvent> events, const TrajectorySource & source, const SiteProfile & site,
  const AnalysisConfig & config)
{
  std::vector<MergeEvent> out(events.begin(), events.end());
  parallel_for(
    out.size(), [&](std::size_t i) {
      for (auto & rec : out[i].lookbacks) {
        if (!rec.usable()) {
          continue;
        }
        const auto outcome = merge_outcome(out[i], rec, source, site, config);
        if (!outcome) {
          rec.status = RecordStatus::missing_prediction;
          continue;
        }
        rec.pass_order = outcome->pass_order;
        rec.highway_lane_change = outcome->lane_change;
        rec.highway_shoulder_exit = outcome->shoulder_exit;
      }
    });
  return out;
}

void write_events_csv(std::span<const MergeEvent> events, std::ostream & out)
{
  out << "event_id,merger_id,t_m,merge_point_y,tau,t_l,anchor_t,status,highway_id,lead_time,conflict,"
    "pass_order,highway_lane_change,highway_shoulder_exit\n";
  for (const auto & ev : events) {
    for (const auto & r : ev.lookbacks) {
      out << ev.event_id << ',' << ev.merger_id << ',' << format_double(ev.t_m) << ','
          << format_double(ev.merge_point_y) << ',' << format_double(r.tau) << ',' << format_double(r.t_l) << ','
          << format_double(r.anchor_t) << ',' << to_string(r.status) << ','
          << (r.highway_id ? std::to_string(*r.highway_id) : std::string()) << ',';
      if (r.usable()) {
        out << format_double(r.lead_time) << ',' << r.conflict << ',' << to_string(r.pass_order) << ','
            << r.highway_lane_change << ',' << r.highway_shoulder_exit << '\n';
      } else {
        out << ",,,,\n";
      }
    }
  }
}

// ---------------------------------------------------------------------------

std::vector<HighwayAnchor> extract_highway_anchors(
  const Dataset & dataset, const std::set<VehicleId> & excluded, const AnalysisConfig & config)
{
  config.validate();
  const SampleIndex index(dataset);
  const std::size_t stride = prediction_stride(dataset.sample_hz);
  const std::size_t history = (kHistorySamples - 1) * stride;
  const std::size_t future = kPredictionSteps * stride;

  std::vector<const VehicleTrack *> tracks;
  for (const auto & [id, track] : dataset.tracks) {
    if (!excluded.count(id)) {
      tracks.push_back(&track);
    }
  }
  std::vector<std::vector<HighwayAnchor>> per_track(tracks.size());
  parallel_for(
    tracks.size(), [&](std::size_t ti) {
      const VehicleTrack & track = *tracks[ti];
      if (track.states.size() < history + future + 1) {
        return;
      }
      const std::size_t first = history;
      const std::size_t last = track.states.size() - 1 - future;
      std::optional<std::size_t> previous;
      for (int k = 0;; ++k) {
        const double offset = k * config.highway_anchor_cadence * dataset.sample_hz;
        const std::size_t i = first + static_cast<std::size_t>(std::ceil(offset - 1e-6));
        if (i > last) {
          break;
        }
        if (previous == i) {
          continue;
        }
        previous = i;
        const auto & s = track.states[i];
        const LaneId lane = assign_lane(s, dataset.site);
        const auto rank = dataset.site.mainline_rank(lane);
        if (!rank || *rank == 0) {
          continue;
        }
        const VehicleTrack * lead = nullptr;
        double best_gap = 0.0;
        for (const auto & entry : index.at(s.t)) {
          if (entry.track == &track || assign_lane(entry.state(), dataset.site) != lane) {
            continue;
          }
          const double gap = entry.state().y - s.y;
          if (gap <= 0.0 || gap > config.neighbor_radius) {
            continue;
          }
          if (lead == nullptr || gap < best_gap) {
            lead = entry.track;
            best_gap = gap;
          }
        }
        if (lead == nullptr || lead->states.size() < 2) {
          continue;
        }
        const auto ego_snap = snapshot(track, s.t, dataset.sample_hz, 0.0);
        const auto lead_snap = snapshot(*lead, s.t, dataset.sample_hz, 0.0);
        per_track[ti].push_back(
          {track.vehicle_id, s.t, lane, lead->vehicle_id,
            time_to_collision(ego_snap, lead_snap, config.ttc_equal_speed)});
      }
    });
  std::vector<HighwayAnchor> out;
  for (auto & list : per_track) {
    out.insert(out.end(), list.begin(), list.end());
  }
  return out;
}

bool faster_lane_change(const Horizon & horizon, double tau, const SiteProfile & site, const AnalysisConfig & config)
{
  for (const auto & c : detect_lane_changes(horizon, site, config.lc_dwell)) {
    if (c.t_lc > horizon.anchor_t + tau + 1e-9) {
      break;
    }
    const auto rf = site.mainline_rank(c.from_lane);
    const auto rt = site.mainline_rank(c.to_lane);
    if (rf && rt && *rt < *rf) {
      return true;
    }
  }
  return false;
}

std::set<VehicleId> merge_participants(std::span<const MergeEvent> events)
{
  std::set<VehicleId> ids;
  for (const auto & ev : events) {
    ids.insert(ev.merger_id);
    for (const auto & r : ev.lookbacks) {
      if (r.highway_id) {
        ids.insert(*r.highway_id);
      }
    }
  }
  return ids;
}

}  // namespace bb
