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

#include "bb/synth.hpp"

#include "bb/events.hpp"
#include "bb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace bb
{

void SynthParams::validate() const
{
  const auto prob = [](double p, const char * name) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw UsageError(std::string("synth ") + name + " must lie in [0, 1]");
      }
    };
  prob(courtesy_p_conflict, "courtesy_p_conflict");
  prob(courtesy_p_noconflict, "courtesy_p_noconflict");
  if (n_events < 0 || n_highway < 0) {
    throw UsageError("synth counts must be nonnegative");
  }
  if (!(speed_min > 0.0 && speed_max >= speed_min)) {
    throw UsageError("synth speed range must satisfy 0 < speed_min <= speed_max");
  }
  if (!(lead_time_min >= -4.5 && lead_time_max >= lead_time_min && lead_time_max <= 4.0)) {
    throw UsageError("synth lead time range must lie within [-4.5, 4]");
  }
  if (!(pass_first_logistic_scale >= 0.0) || !(noise_sigma_lateral >= 0.0) || !(lane_width > 0.0)) {
    throw UsageError("synth scale, noise and lane width must be nonnegative");
  }
  const double tenth = sample_hz / 10.0;
  if (!(sample_hz > 0.0) || std::abs(tenth - std::round(tenth)) > 1e-9) {
    throw UsageError("synth sample_hz must be a multiple of 10");
  }
}

SynthParams synth_params_from_key_values(const KeyValues & kv)
{
  SynthParams p;
  for (const auto & [k, v] : kv) {
    const std::string ctx = "synth " + k;
    if (k == "n_events") {
      p.n_events = static_cast<int>(parse_int(v, ctx));
    } else if (k == "n_highway") {
      p.n_highway = static_cast<int>(parse_int(v, ctx));
    } else if (k == "pass_first_logistic_scale") {
      p.pass_first_logistic_scale = parse_double(v, ctx);
    } else if (k == "courtesy_p_conflict") {
      p.courtesy_p_conflict = parse_double(v, ctx);
    } else if (k == "courtesy_p_noconflict") {
      p.courtesy_p_noconflict = parse_double(v, ctx);
    } else if (k == "lc_ttc_threshold") {
      p.lc_ttc_threshold = parse_double(v, ctx);
    } else if (k == "speed_range") {
      const auto r = parse_double_list(v, ctx);
      if (r.size() != 2) {
        throw UsageError(ctx + ": expected two values");
      }
      p.speed_min = r[0];
      p.speed_max = r[1];
    } else if (k == "lead_time_range") {
      const auto r = parse_double_list(v, ctx);
      if (r.size() != 2) {
        throw UsageError(ctx + ": expected two values");
      }
      p.lead_time_min = r[0];
      p.lead_time_max = r[1];
    } else if (k == "lane_width") {
      p.lane_width = parse_double(v, ctx);
    } else if (k == "noise_sigma_lateral") {
      p.noise_sigma_lateral = parse_double(v, ctx);
    } else if (k == "sample_hz") {
      p.sample_hz = parse_double(v, ctx);
    } else if (k == "seed") {
      p.seed = static_cast<std::uint64_t>(parse_int(v, ctx));
    } else {
      throw UsageError("unknown synth key '" + k + "'");
    }
  }
  p.validate();
  return p;
}

KeyValues to_key_values(const SynthParams & p)
{
  return {
    {"n_events", std::to_string(p.n_events)},
    {"n_highway", std::to_string(p.n_highway)},
    {"pass_first_logistic_scale", format_double(p.pass_first_logistic_scale)},
    {"courtesy_p_conflict", format_double(p.courtesy_p_conflict)},
    {"courtesy_p_noconflict", format_double(p.courtesy_p_noconflict)},
    {"lc_ttc_threshold", format_double(p.lc_ttc_threshold)},
    {"speed_range", format_double_list({p.speed_min, p.speed_max})},
    {"lead_time_range", format_double_list({p.lead_time_min, p.lead_time_max})},
    {"lane_width", format_double(p.lane_width)},
    {"noise_sigma_lateral", format_double(p.noise_sigma_lateral)},
    {"sample_hz", format_double(p.sample_hz)},
    {"seed", std::to_string(p.seed)},
  };
}

SiteProfile synth_site(double lane_width)
{
  SiteProfile site;
  site.site_id = SiteId::custom;
  site.name = "synth";
  site.lane_roles = {
    {1, LaneRole::mainline}, {2, LaneRole::mainline}, {3, LaneRole::outermost_mainline}, {4, LaneRole::onramp}};
  site.lane_order = {1, 2, 3};
  for (int i = 0; i <= 4; ++i) {
    site.lane_boundaries.push_back(i * lane_width);
  }
  site.raw_unit = RawUnit::meters;
  site.merge_zone_begin = 0.0;
  site.merge_zone_end = 10000.0;
  return site;
}

FrameTransform synth_global_transform()
{
  const double a = 0.5;
  FrameTransform tf;
  tf.rotation << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  tf.translation = Eigen::Vector2d(-1500.0, 400.0);
  return tf;
}

SynthRng::SynthRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
  std::seed_seq seq{
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream),
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  engine_.seed(seq);
}

double SynthRng::uniform(double lo, double hi)
{
  // 53 random mantissa bits; avoids implementation-defined distributions.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double SynthRng::normal(double sigma)
{
  if (sigma == 0.0) {
    return 0.0;
  }
  const double u1 = uniform(0.0, 1.0);
  const double u2 = uniform(0.0, 1.0);
  return sigma * std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace
{

constexpr std::uint64_t kMergeStream = 1;
constexpr std::uint64_t kHighwayStream = 2;
constexpr std::uint64_t kKeepStream = 3;
constexpr std::uint64_t kChangeStream = 4;

/// Slot length in seconds; each scenario instance owns one slot.
constexpr std::int64_t kSlotSeconds = 20;

struct Builder
{
  const SynthParams & p;
  const SiteProfile & site;
  FrameTransform global{synth_global_transform()};
  std::int64_t hz{static_cast<std::int64_t>(std::llround(p.sample_hz))};

  double time(std::int64_t k) const { return static_cast<double>(k) / static_cast<double>(hz); }
  double center(LaneId lane) const { return (lane - 0.5) * p.lane_width; }

  VehicleTrack make_track(VehicleId id) const
  {
    VehicleTrack tr;
    tr.vehicle_id = id;
    tr.klass = VehicleClass::automobile;
    tr.length = 4.5;
    tr.width = 1.8;
    return tr;
  }

  void push(VehicleTrack & tr, std::int64_t k, double x, double y, SynthRng & rng, bool labelled = true) const
  {
    VehicleState s;
    s.t = time(k);
    s.x = x + rng.normal(p.noise_sigma_lateral);
    s.y = y;
    const Eigen::Vector2d g = global.to_global(s.position());
    s.gx = g.x();
    s.gy = g.y();
    s.lane_id = labelled ? lane_from_x(s.x, site) : kUnknownLane;
    tr.states.push_back(s);
  }
};

double logistic(double x)
{
  return 1.0 / (1.0 + std::exp(-x));
}

struct MergePair
{
  VehicleTrack merger;
  VehicleTrack highway;
  MergeLabel label;
};

MergePair make_merge(const Builder & b, std::int64_t i, std::int64_t slot, VehicleId id_base)
{
  const auto & p = b.p;
  SynthRng rng(p.seed, kMergeStream, static_cast<std::uint64_t>(i));
  const std::int64_t H = b.hz;
  const std::int64_t k_m = slot * kSlotSeconds * H + 10 * H;
  const std::int64_t k_l = k_m - 5 * H;
  const std::int64_t k_c = k_l + H / 2;
  const std::int64_t k_begin = k_m - 82 * H / 10;
  const std::int64_t k_end = k_m + 4 * H;
  const double dt = 1.0 / static_cast<double>(H);
  const double y_mp = 300.0;

  const double v = rng.uniform(p.speed_min, p.speed_max);
  const double lead = rng.uniform(p.lead_time_min, p.lead_time_max);
  const double u_first = rng.uniform(0.0, 1.0);
  const double delta = rng.uniform(0.3, 1.0);
  const double u_lc = rng.uniform(0.0, 1.0);
  const double lc_offset = rng.uniform(1.0, 4.0);

  const double p_first =
    p.pass_first_logistic_scale > 0.0 ? logistic(lead / p.pass_first_logistic_scale) : (lead > 0.0 ? 1.0 : 0.0);
  const bool merger_first = u_first < p_first;
  const bool conflict = std::abs(lead) <= 1.0;
  const bool courtesy = u_lc < (conflict ? p.courtesy_p_conflict : p.courtesy_p_noconflict);

  MergePair out;
  out.merger = b.make_track(id_base);
  out.highway = b.make_track(id_base + 1);
  out.label = {i, id_base, id_base + 1, b.time(k_m), y_mp, lead, conflict, merger_first, courtesy};

  // Merger: on-ramp until the lane edge is reached exactly at k_m.
  const double edge = b.site.lane_boundaries[3];
  const double lateral_rate = p.lane_width / (2.0 * static_cast<double>(H));
  for (std::int64_t k = k_begin; k <= k_end; ++k) {
    const double y = y_mp + v * static_cast<double>(k - k_m) * dt;
    const double x = k < k_m ? std::min(b.center(4), edge + static_cast<double>(k_m - k) * lateral_rate)
                             : std::max(b.center(3), edge - static_cast<double>(k - k_m) * lateral_rate);
    b.push(out.merger, k, x, y, rng);
  }

  // Highway vehicle: crosses the merge point at t_m + lead unless the sampled
  // outcome disagrees, in which case it adjusts speed shortly after t_l.
  const double y_l = y_mp - v * (5.0 + lead);
  const double y_c = y_l + v * static_cast<double>(k_c - k_l) * dt;
  double v2 = v;
  const bool natural_first = lead > 0.0;
  if (merger_first != natural_first) {
    const double shift = merger_first ? delta : -delta;
    v2 = (y_mp - y_c) / (static_cast<double>(k_m - k_c) * dt + shift);
  }
  const double t_cross = b.time(k_l) + lc_offset;
  for (std::int64_t k = k_begin; k <= k_end; ++k) {
    const double y = k <= k_c ? y_l + v * static_cast<double>(k - k_l) * dt
                              : y_c + v2 * static_cast<double>(k - k_c) * dt;
    double x = b.center(3);
    if (courtesy) {
      const double frac = std::clamp((b.time(k) - (t_cross - 1.0)) / 2.0, 0.0, 1.0);
      x = b.center(3) - frac * p.lane_width;
    }
    b.push(out.highway, k, x, y, rng);
  }
  return out;
}

struct HighwayPair
{
  VehicleTrack follower;
  VehicleTrack leader;
  HighwayLabel label;
};

HighwayPair make_highway(const Builder & b, std::int64_t j, std::int64_t slot, VehicleId id_base)
{
  const auto & p = b.p;
  SynthRng rng(p.seed, kHighwayStream, static_cast<std::uint64_t>(j));
  const std::int64_t H = b.hz;
  const std::int64_t stride = 2 * H / 5;
  const std::int64_t k_a = slot * kSlotSeconds * H + 5 * H;
  const std::int64_t k_begin = k_a - (kHistorySamples - 1) * stride;
  const std::int64_t k_end = k_a + kPredictionSteps * stride;
  const double dt = 1.0 / static_cast<double>(H);

  const LaneId lane = rng.uniform(0.0, 1.0) < 0.5 ? 2 : 3;
  const double v_e = 10.0 + rng.uniform(p.speed_min, p.speed_max);
  const std::vector<double> edges{-40.0, -10.0, -5.0, -2.0, 0.0, 1.0, 2.0, 3.0, 5.0, 10.0, 40.0};
  const auto bin = std::min<std::size_t>(static_cast<std::size_t>(rng.uniform(0.0, 10.0)), 9);
  const bool infinite = bin == 9 && rng.uniform(0.0, 1.0) < 0.5;
  double ttc = rng.uniform(edges[bin], edges[bin + 1]);
  if (ttc == 0.0) {
    ttc = 0.5;
  }
  double gap = rng.uniform(2.0, 45.0);
  double dv = 0.0;
  if (infinite) {
    ttc = std::numeric_limits<double>::infinity();
  } else {
    dv = gap / ttc;
    if (std::abs(dv) > 8.0) {
      dv = std::copysign(8.0, ttc);
      gap = ttc * dv;
    }
  }
  const bool change = ttc > 0.0 && ttc < p.lc_ttc_threshold;

  HighwayPair out;
  out.follower = b.make_track(id_base);
  out.leader = b.make_track(id_base + 1);
  out.label = {id_base, id_base + 1, b.time(k_a), ttc, change};

  const double y0 = 100.0;
  for (std::int64_t k = k_begin; k <= k_end; ++k) {
    const double s = static_cast<double>(k - k_a) * dt;
    double x = b.center(lane);
    if (change) {
      x -= std::clamp(s, 0.0, 1.0) * p.lane_width;
    }
    b.push(out.follower, k, x, y0 + v_e * s, rng);
  }
  for (std::int64_t k = k_begin; k <= k_end; ++k) {
    const double s = static_cast<double>(k - k_a) * dt;
    b.push(out.leader, k, b.center(lane), y0 + gap + (v_e - dv) * s, rng);
  }
  return out;
}

Dataset empty_dataset(const SynthParams & p)
{
  Dataset ds;
  ds.site = synth_site(p.lane_width);
  ds.sample_hz = p.sample_hz;
  ds.time_origin_ms = 0;
  return ds;
}

void add_merges(SynthOutput & out, const SynthParams & p, std::int64_t first_slot, VehicleId id_base)
{
  const Builder b{p, out.dataset.site};
  std::vector<MergePair> pairs(static_cast<std::size_t>(p.n_events));
  parallel_for(pairs.size(), [&](std::size_t i) {
      const auto idx = static_cast<std::int64_t>(i);
      pairs[i] = make_merge(b, idx, first_slot + idx, id_base + 2 * idx);
    });
  for (auto & pr : pairs) {
    out.merges.push_back(pr.label);
    out.dataset.tracks.emplace(pr.merger.vehicle_id, std::move(pr.merger));
    out.dataset.tracks.emplace(pr.highway.vehicle_id, std::move(pr.highway));
  }
}

void add_highway(SynthOutput & out, const SynthParams & p, std::int64_t first_slot, VehicleId id_base)
{
  const Builder b{p, out.dataset.site};
  std::vector<HighwayPair> pairs(static_cast<std::size_t>(p.n_highway));
  parallel_for(pairs.size(), [&](std::size_t i) {
      const auto idx = static_cast<std::int64_t>(i);
      pairs[i] = make_highway(b, idx, first_slot + idx, id_base + 2 * idx);
    });
  for (auto & pr : pairs) {
    out.highway.push_back(pr.label);
    out.dataset.tracks.emplace(pr.follower.vehicle_id, std::move(pr.follower));
    out.dataset.tracks.emplace(pr.leader.vehicle_id, std::move(pr.leader));
  }
}

}  // namespace

SynthOutput generate_merge_dataset(const SynthParams & params)
{
  params.validate();
  SynthOutput out{empty_dataset(params), {}, {}, {}};
  add_merges(out, params, 0, 1);
  return out;
}

SynthOutput generate_highway_dataset(const SynthParams & params)
{
  params.validate();
  SynthOutput out{empty_dataset(params), {}, {}, {}};
  add_highway(out, params, 0, 1);
  return out;
}

SynthOutput generate_dataset(const SynthParams & params)
{
  params.validate();
  SynthOutput out{empty_dataset(params), {}, {}, {}};
  add_merges(out, params, 0, 1);
  add_highway(out, params, params.n_events, 1 + 2 * static_cast<VehicleId>(params.n_events));
  return out;
}

SynthOutput generate_lane_change_tracks(const SynthParams & params, int n_keep, int n_change)
{
  params.validate();
  SynthOutput out{empty_dataset(params), {}, {}, {}};
  const Builder b{params, out.dataset.site};
  const std::int64_t H = b.hz;
  const std::int64_t length = 10 * H;
  for (int i = 0; i < n_keep + n_change; ++i) {
    const bool change = i >= n_keep;
    SynthRng rng(params.seed, change ? kChangeStream : kKeepStream, static_cast<std::uint64_t>(i));
    const std::int64_t k0 = static_cast<std::int64_t>(i) * 12 * H;
    const LaneId from = 1 + static_cast<LaneId>(std::min(2.0, std::floor(rng.uniform(0.0, 3.0))));
    LaneId to = from;
    if (change) {
      to = from == 1 ? 2 : (from == 3 ? 2 : (rng.uniform(0.0, 1.0) < 0.5 ? 1 : 3));
    }
    const double t_cross = b.time(k0) + rng.uniform(3.0, 6.0);
    const double duration = rng.uniform(1.0, 3.0);
    VehicleTrack tr = b.make_track(i + 1);
    for (std::int64_t k = k0; k < k0 + length; ++k) {
      const double frac = std::clamp((b.time(k) - t_cross) / duration + 0.5, 0.0, 1.0);
      const double x = b.center(from) + frac * (b.center(to) - b.center(from));
      b.push(tr, k, x, 50.0 + 20.0 * static_cast<double>(k - k0) / static_cast<double>(H), rng, false);
    }
    if (change) {
      out.lane_changes.push_back({tr.vehicle_id, t_cross, from, to});
    }
    out.dataset.tracks.emplace(tr.vehicle_id, std::move(tr));
  }
  return out;
}

void write_labels(const SynthOutput & out, std::ostream & os)
{
  os << "kind,event_id,vehicle_id,other_id,t,true_condition,true_outcome,conflict,courtesy_lc\n";
  for (const auto & m : out.merges) {
    os << "merge," << m.event_index << ',' << m.merger_id << ',' << m.highway_id << ',' << format_double(m.t_m)
       << ',' << format_double(m.lead_time) << ',' << (m.merger_first ? "merger_first" : "highway_first") << ','
       << m.conflict << ',' << m.courtesy_lc << '\n';
  }
  for (const auto & h : out.highway) {
    os << "highway,," << h.follower_id << ',' << h.leader_id << ',' << format_double(h.anchor_t) << ','
       << format_double(h.ttc) << ',' << (h.lane_change ? "lane_change" : "keep") << ",,\n";
  }
  for (const auto & c : out.lane_changes) {
    os << "lane_change,," << c.vehicle_id << ",," << format_double(c.t_cross) << ",," << c.from_lane << "->"
       << c.to_lane << ",,\n";
  }
}

PredictionInstance constant_velocity_predict(std::span<const double> t, const Points2 & history)
{
  const auto n = history.rows();
  if (n < 2 || t.size() != static_cast<std::size_t>(n)) {
    throw DataError("insufficient samples");
  }
  const Eigen::RowVector2d last = history.row(n - 1);
  const Eigen::RowVector2d vel = (last - history.row(n - 2)) / (t[n - 1] - t[n - 2]);
  PredictionMode mode;
  mode.probability = 1.0;
  mode.points.resize(kPredictionSteps + 1, 2);
  for (int k = 0; k <= kPredictionSteps; ++k) {
    mode.points.row(k) = last + (k * kPredictionStep) * vel;
  }
  PredictionInstance inst;
  inst.anchor_t = t[n - 1];
  inst.modes.push_back(std::move(mode));
  return inst;
}

PredictionInstance constant_velocity_predict(const PredictionRequest & request)
{
  auto inst = constant_velocity_predict(request.ego.t, request.ego.points);
  inst.request_id = request.request_id;
  inst.vehicle_id = request.ego_id;
  inst.anchor_t = request.anchor_t;
  return inst;
}

}  // namespace bb
