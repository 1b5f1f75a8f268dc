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

#include "bb/behavior_metrics.hpp"

#include "bb/parallel.hpp"

#include <cmath>

namespace bb
{

PassFirstResult pass_first_curve(std::span<const MergeEvent> events, double tau, const AnalysisConfig & config)
{
  PassFirstResult out;
  std::vector<BinSample> samples;
  for (const auto & ev : events) {
    const LookbackRecord * r = ev.at(tau);
    if (r == nullptr || !r->usable()) {
      continue;
    }
    if (r->pass_order == PassOrder::undetermined) {
      ++out.undetermined;
      continue;
    }
    samples.push_back({r->lead_time, r->merger_passed_first()});
  }
  if (samples.empty()) {
    throw DataError("no resolvable merge events at tau=" + std::to_string(tau));
  }
  out.resolved = static_cast<std::int64_t>(samples.size());
  const auto edges = config.lead_bin_edges();
  out.curve = bin_probability(samples, edges, config.min_count);
  return out;
}

CourtesyResult courtesy_lc_table(std::span<const MergeEvent> events, double tau)
{
  CourtesyResult out;
  for (const auto & ev : events) {
    const LookbackRecord * r = ev.at(tau);
    if (r == nullptr || !r->usable()) {
      continue;
    }
    if (r->conflict) {
      ++(r->highway_lane_change ? out.table.a : out.table.b);
    } else {
      ++(r->highway_lane_change ? out.table.c : out.table.d);
    }
    out.shoulder_exits += r->highway_shoulder_exit ? 1 : 0;
  }
  out.p_value = fisher_exact_two_sided(out.table);
  return out;
}

HighwayLcResult highway_lc_curve(
  std::span<const HighwayAnchor> anchors, const TrajectorySource & source, double tau, const SiteProfile & site,
  const AnalysisConfig & config)
{
  HighwayLcResult out;
  std::vector<std::optional<bool>> outcome(anchors.size());
  parallel_for(
    anchors.size(), [&](std::size_t i) {
      if (const auto h = source.horizon(anchors[i].vehicle_id, anchors[i].anchor_t)) {
        outcome[i] = faster_lane_change(*h, tau, site, config);
      }
    });
  std::vector<BinSample> samples;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (!outcome[i]) {
      ++out.missing;
      continue;
    }
    samples.push_back({anchors[i].ttc, *outcome[i]});
    out.lane_changes += *outcome[i] ? 1 : 0;
  }
  out.curve = bin_probability(samples, config.ttc_bin_edges, config.min_count);
  return out;
}

std::int64_t count_faster_lane_changes(
  const Dataset & dataset, const std::set<VehicleId> & excluded, const AnalysisConfig & config)
{
  std::int64_t n = 0;
  for (const auto & [id, track] : dataset.tracks) {
    if (excluded.count(id) || track.states.size() < 2) {
      continue;
    }
    for (const auto & c : detect_lane_changes(track, dataset.site, config.lc_dwell, dataset.sample_hz)) {
      const auto rf = dataset.site.mainline_rank(c.from_lane);
      const auto rt = dataset.site.mainline_rank(c.to_lane);
      n += (rf && rt && *rt < *rf) ? 1 : 0;
    }
  }
  return n;
}

Eigen::Vector2d predicted_position(const PredictionInstance & inst, double h)
{
  const auto & pts = most_likely_mode(inst).points;
  const Eigen::Index last = pts.rows() - 1;
  if (last < 1) {
    throw DataError("prediction has no future points");
  }
  const double s = h / kPredictionStep;
  const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(s)), last - 1);
  const double frac = s - static_cast<double>(k);
  return (pts.row(k) + frac * (pts.row(k + 1) - pts.row(k))).transpose();
}

namespace
{

std::optional<Eigen::Vector2d> truth_at(
  const VehicleTrack & track, double t, double hz, const std::optional<FrameTransform> & transform)
{
  const auto pos_of = [&](const VehicleState & s) -> std::optional<Eigen::Vector2d> {
    if (!transform) {
      return s.position();
    }
    if (!s.gx || !s.gy) {
      return std::nullopt;
    }
    return transform->to_local(Eigen::Vector2d(*s.gx, *s.gy));
  };
  const double pos = (t - track.first_time()) * hz;
  if (pos < -1e-6) {
    return std::nullopt;
  }
  const double fl = std::floor(pos + 1e-6);
  const auto i = static_cast<std::size_t>(fl);
  const double frac = std::max(0.0, pos - fl);
  if (i >= track.states.size()) {
    return std::nullopt;
  }
  const auto a = pos_of(track.states[i]);
  if (!a || frac < 1e-6) {
    return a;
  }
  if (i + 1 >= track.states.size()) {
    return std::nullopt;
  }
  const auto b = pos_of(track.states[i + 1]);
  if (!b) {
    return std::nullopt;
  }
  return *a + frac * (*b - *a);
}

}  // namespace

RmseResult rmse_by_horizon(
  const PredictionSet & predictions, const Dataset & dataset, std::span<const double> horizons,
  const std::optional<FrameTransform> & transform)
{
  RmseResult out;
  out.horizons.assign(horizons.begin(), horizons.end());
  std::vector<double> sum(horizons.size(), 0.0);
  for (const auto & [key, inst] : predictions.instances) {
    const VehicleTrack * track = dataset.find(inst.vehicle_id);
    std::vector<double> sq;
    for (const double h : horizons) {
      const auto truth = track ? truth_at(*track, inst.anchor_t + h, dataset.sample_hz, transform) : std::nullopt;
      if (!truth) {
        break;
      }
      sq.push_back((predicted_position(inst, h) - *truth).squaredNorm());
    }
    if (sq.size() != horizons.size()) {
      ++out.excluded;
      continue;
    }
    for (std::size_t k = 0; k < sq.size(); ++k) {
      sum[k] += sq[k];
    }
    ++out.instances;
  }
  if (out.instances == 0) {
    throw DataError("no prediction instances with full ground truth");
  }
  for (const double s : sum) {
    out.rmse.push_back(std::sqrt(s / static_cast<double>(out.instances)));
  }
  return out;
}

SourceMetrics compute_source_metrics(
  std::span<const MergeEvent> events, std::span<const HighwayAnchor> anchors, const TrajectorySource & source,
  const SiteProfile & site, const AnalysisConfig & config)
{
  SourceMetrics m;
  m.source = source.name();
  for (const double tau : config.lookbacks) {
    bool any = false;
    for (const auto & ev : events) {
      const auto * r = ev.at(tau);
      any = any || (r != nullptr && r->usable() && r->pass_order != PassOrder::undetermined);
    }
    if (any) {
      m.pass_first.emplace(tau, pass_first_curve(events, tau, config));
    }
    m.courtesy.emplace(tau, courtesy_lc_table(events, tau));
    m.highway_lc.emplace(tau, highway_lc_curve(anchors, source, tau, site, config));
  }
  return m;
}

std::vector<R2Entry> compare_sources(std::span<const SourceMetrics> sources)
{
  std::vector<R2Entry> out;
  if (sources.empty()) {
    return out;
  }
  const auto & ref = sources.front();
  const auto add = [&](const std::string & metric, const std::string & source, double tau,
                       const BinnedCurve * a, const BinnedCurve * b) {
    R2Entry e{metric, source, tau, std::nullopt, {}};
    if (a == nullptr || b == nullptr) {
      e.error = "curve unavailable";
    } else {
      try {
        e.value = r_squared(*a, *b);
      } catch (const DataError & err) {
        e.error = err.what();
      }
    }
    out.push_back(std::move(e));
  };
  for (std::size_t i = 1; i < sources.size(); ++i) {
    const auto & cand = sources[i];
    for (const auto & [tau, r] : ref.pass_first) {
      const auto it = cand.pass_first.find(tau);
      add("pass_first", cand.source, tau, &r.curve, it == cand.pass_first.end() ? nullptr : &it->second.curve);
    }
    for (const auto & [tau, r] : ref.highway_lc) {
      const auto it = cand.highway_lc.find(tau);
      add("highway_lc", cand.source, tau, &r.curve, it == cand.highway_lc.end() ? nullptr : &it->second.curve);
    }
  }
  return out;
}

}  // namespace bb
