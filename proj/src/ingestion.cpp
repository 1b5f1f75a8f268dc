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

#include "bb/ingestion.hpp"

#include "bb/config_io.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace bb
{

namespace
{

std::vector<std::string_view> split_row(std::string_view line)
{
  if (!line.empty() && line.back() == '\r') {
    line.remove_suffix(1);
  }
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  for (auto & f : out) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) {
      f.remove_prefix(1);
    }
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) {
      f.remove_suffix(1);
    }
  }
  return out;
}

std::string lower(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {return std::tolower(c);});
  return out;
}

std::string row_context(const std::string & origin, std::size_t line)
{
  return origin + ": row " + std::to_string(line);
}

/// "bb-xxx v1,key=value,..." -> header map; throws when the tag differs.
WireHeader parse_wire_header(const std::string & line, const std::string & tag, const std::string & origin)
{
  const auto fields = split_row(line);
  if (fields.empty() || fields[0] != tag) {
    throw DataError(origin + ": expected header '" + tag + "'");
  }
  WireHeader header;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const auto eq = fields[i].find('=');
    if (eq == std::string_view::npos) {
      throw DataError(origin + ": malformed header field '" + std::string(fields[i]) + "'");
    }
    header[std::string(fields[i].substr(0, eq))] = std::string(fields[i].substr(eq + 1));
  }
  return header;
}

void write_wire_header(std::ostream & out, const std::string & tag, const WireHeader & header)
{
  out << tag;
  for (const auto & [k, v] : header) {
    out << ',' << k << '=' << v;
  }
  out << '\n';
}

void expect_columns(std::istream & in, const std::string & expected, const std::string & origin)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": missing column header");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != expected) {
    throw DataError(origin + ": expected columns '" + expected + "'");
  }
}

std::string opt_to_string(const std::optional<double> & v)
{
  return v ? format_double(*v) : std::string();
}

std::optional<double> parse_opt(std::string_view s, const std::string & ctx)
{
  if (s.empty()) {
    return std::nullopt;
  }
  return parse_double(s, ctx);
}

const std::array<std::string, 12> kNgsimRequired{
  "vehicle_id", "frame_id", "global_time", "local_x", "local_y", "global_x", "global_y",
  "v_length", "v_width", "v_class", "v_vel", "lane_id"};

const std::array<std::string, 12> kNgsimDisplay{
  "Vehicle_ID", "Frame_ID", "Global_Time", "Local_X", "Local_Y", "Global_X", "Global_Y",
  "v_Length", "v_Width", "v_Class", "v_Vel", "Lane_ID"};

}  // namespace

// ---------------------------------------------------------------------------

Dataset parse_ngsim_csv(std::istream & in, const SiteProfile & site, const std::string & origin, double raw_hz)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": empty file");
  }
  const auto header = split_row(line);
  std::array<std::size_t, kNgsimRequired.size()> col{};
  for (std::size_t k = 0; k < kNgsimRequired.size(); ++k) {
    const auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) {
          return lower(h) == kNgsimRequired[k];
        });
    if (it == header.end()) {
      throw DataError("missing column " + kNgsimDisplay[k]);
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;
  const double scale = site.raw_unit == RawUnit::feet ? kFeetToMeters : 1.0;

  struct Row
  {
    std::int64_t time_ms;
    VehicleState state;
    double length;
    double width;
    int klass;
    std::size_t line;
  };
  std::map<VehicleId, std::vector<Row>> rows;
  std::size_t lineno = 1;
  std::int64_t origin_ms = std::numeric_limits<std::int64_t>::max();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto f = split_row(line);
    const auto ctx = row_context(origin, lineno);
    if (f.size() < needed) {
      throw DataError(ctx + ": too few columns");
    }
    Row r;
    r.line = lineno;
    const VehicleId id = parse_int(f[col[0]], ctx);
    r.time_ms = parse_int(f[col[2]], ctx);
    r.state.x = parse_double(f[col[3]], ctx) * scale;
    r.state.y = parse_double(f[col[4]], ctx) * scale;
    r.state.gx = parse_double(f[col[5]], ctx) * scale;
    r.state.gy = parse_double(f[col[6]], ctx) * scale;
    r.length = parse_double(f[col[7]], ctx) * scale;
    r.width = parse_double(f[col[8]], ctx) * scale;
    r.klass = static_cast<int>(parse_int(f[col[9]], ctx));
    r.state.v = parse_double(f[col[10]], ctx) * scale;
    r.state.lane_id = static_cast<LaneId>(parse_int(f[col[11]], ctx));
    origin_ms = std::min(origin_ms, r.time_ms);
    rows[id].push_back(std::move(r));
  }

  Dataset ds;
  ds.site = site;
  ds.sample_hz = raw_hz;
  ds.time_origin_ms = rows.empty() ? 0 : origin_ms;
  for (auto & [id, list] : rows) {
    std::stable_sort(list.begin(), list.end(), [](const Row & a, const Row & b) {return a.time_ms < b.time_ms;});
    VehicleTrack track;
    track.vehicle_id = id;
    track.length = list.front().length;
    track.width = list.front().width;
    const int k = list.front().klass;
    track.klass = k == 1 ? VehicleClass::motorcycle : k == 3 ? VehicleClass::truck : VehicleClass::automobile;
    track.states.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0 && list[i].time_ms == list[i - 1].time_ms) {
        throw DataError(
                row_context(origin, list[i].line) + ": duplicate sample for vehicle " + std::to_string(id));
      }
      VehicleState s = list[i].state;
      s.t = static_cast<double>(list[i].time_ms - ds.time_origin_ms) / 1000.0;
      track.states.push_back(s);
    }
    ds.tracks.emplace(id, std::move(track));
  }
  return ds;
}

Dataset parse_ngsim_csv(const std::filesystem::path & path, const SiteProfile & site, double raw_hz)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return parse_ngsim_csv(in, site, path.string(), raw_hz);
}

void write_ngsim_csv(const Dataset & dataset, std::ostream & out)
{
  const double inv = dataset.site.raw_unit == RawUnit::feet ? 1.0 / kFeetToMeters : 1.0;
  out << "Vehicle_ID,Frame_ID,Total_Frames,Global_Time,Local_X,Local_Y,Global_X,Global_Y,"
    "v_Length,v_Width,v_Class,v_Vel,v_Acc,Lane_ID,Preceding,Following,Space_Headway,Time_Headway\n";
  for (const auto & [id, track] : dataset.tracks) {
    for (const auto & s : track.states) {
      const std::int64_t ms = dataset.time_origin_ms + time_key(s.t);
      out << id << ',' << std::llround(s.t * dataset.sample_hz) + 1 << ',' << track.states.size() << ','
          << ms << ',' << format_double(s.x * inv) << ',' << format_double(s.y * inv) << ','
          << format_double(s.gx.value_or(0.0) * inv) << ',' << format_double(s.gy.value_or(0.0) * inv) << ','
          << format_double(track.length * inv) << ',' << format_double(track.width * inv) << ','
          << static_cast<int>(track.klass) << ',' << format_double(s.v.value_or(0.0) * inv)
          << ",0," << s.lane_id << ",0,0,0,0\n";
    }
  }
}

Dataset resample(const Dataset & dataset, double target_hz)
{
  if (!(target_hz > 0.0)) {
    throw UsageError("resample: target rate must be positive");
  }
  const double ratio = dataset.sample_hz / target_hz;
  const auto step = std::llround(ratio);
  if (step < 1 || std::abs(ratio - static_cast<double>(step)) > 1e-9 * ratio) {
    throw DataError("non-integer decimation");
  }
  Dataset out;
  out.site = dataset.site;
  out.sample_hz = target_hz;
  out.time_origin_ms = dataset.time_origin_ms;
  for (const auto & [id, track] : dataset.tracks) {
    VehicleTrack t = track;
    t.states.clear();
    for (std::size_t i = 0; i < track.states.size(); i += static_cast<std::size_t>(step)) {
      t.states.push_back(track.states[i]);
    }
    out.tracks.emplace(id, std::move(t));
  }
  return out;
}

std::size_t prediction_stride(double sample_hz)
{
  const double samples = kPredictionStep * sample_hz;
  const auto n = std::llround(samples);
  if (n < 1 || std::abs(samples - static_cast<double>(n)) > 1e-6) {
    throw DataError("sample rate " + format_double(sample_hz) + " Hz is incompatible with the 0.4 s prediction step");
  }
  return static_cast<std::size_t>(n);
}

// ---------------------------------------------------------------------------

namespace
{
constexpr const char * kDatasetColumns = "vehicle_id,class,length,width,t,x,y,gx,gy,lane_id,v";
}

void write_dataset(const Dataset & dataset, std::ostream & out)
{
  write_wire_header(
    out, "bb-dataset v1",
    {{"sample_hz", format_double(dataset.sample_hz)},
      {"time_origin_ms", std::to_string(dataset.time_origin_ms)}});
  out << kDatasetColumns << '\n';
  for (const auto & [id, track] : dataset.tracks) {
    const std::string prefix = std::to_string(id) + ',' + std::to_string(static_cast<int>(track.klass)) + ',' +
      format_double(track.length) + ',' + format_double(track.width) + ',';
    for (const auto & s : track.states) {
      out << prefix << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
          << opt_to_string(s.gx) << ',' << opt_to_string(s.gy) << ',' << s.lane_id << ',' << opt_to_string(s.v)
          << '\n';
    }
  }
}

Dataset read_dataset(std::istream & in, const SiteProfile & site, const std::string & origin)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": empty file");
  }
  const auto header = parse_wire_header(line, "bb-dataset v1", origin);
  expect_columns(in, kDatasetColumns, origin);
  Dataset ds;
  ds.site = site;
  if (!header.count("sample_hz")) {
    throw DataError(origin + ": header lacks sample_hz");
  }
  ds.sample_hz = parse_double(header.at("sample_hz"), origin);
  ds.time_origin_ms = header.count("time_origin_ms") ? parse_int(header.at("time_origin_ms"), origin) : 0;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const auto f = split_row(line);
    const auto ctx = row_context(origin, lineno);
    if (f.size() != 11) {
      throw DataError(ctx + ": expected 11 columns");
    }
    const VehicleId id = parse_int(f[0], ctx);
    auto & track = ds.tracks[id];
    if (track.states.empty()) {
      track.vehicle_id = id;
      track.klass = static_cast<VehicleClass>(parse_int(f[1], ctx));
      track.length = parse_double(f[2], ctx);
      track.width = parse_double(f[3], ctx);
    }
    VehicleState s;
    s.t = parse_double(f[4], ctx);
    s.x = parse_double(f[5], ctx);
    s.y = parse_double(f[6], ctx);
    s.gx = parse_opt(f[7], ctx);
    s.gy = parse_opt(f[8], ctx);
    s.lane_id = static_cast<LaneId>(parse_int(f[9], ctx));
    s.v = parse_opt(f[10], ctx);
    if (!track.states.empty() && !(s.t > track.states.back().t)) {
      throw DataError(ctx + ": samples of vehicle " + std::to_string(id) + " out of order");
    }
    track.states.push_back(s);
  }
  return ds;
}

void save_dataset_dir(const Dataset & dataset, const std::filesystem::path & dir)
{
  std::filesystem::create_directories(dir);
  std::ofstream data(dir / "dataset.csv");
  write_dataset(dataset, data);
  std::ofstream site(dir / "site.cfg");
  site << format_key_values(to_key_values(dataset.site));
  if (!data || !site) {
    throw DataError("failed writing dataset to " + dir.string());
  }
}

Dataset load_dataset_dir(const std::filesystem::path & dir)
{
  const auto site = site_from_key_values(read_key_values(dir / "site.cfg"));
  std::ifstream in(dir / "dataset.csv");
  if (!in) {
    throw DataError("cannot open " + (dir / "dataset.csv").string());
  }
  return read_dataset(in, site, (dir / "dataset.csv").string());
}

// ---------------------------------------------------------------------------

std::string to_string(Split s)
{
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "train";
}

namespace
{

Split parse_split(std::string_view s, const std::string & ctx)
{
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  if (s == "test") return Split::test;
  throw DataError(ctx + ": unknown split '" + std::string(s) + "'");
}

}  // namespace

Split SplitAssignment::split_of(double t) const
{
  if (t < boundaries[0]) {
    return order[0];
  }
  if (t < boundaries[1]) {
    return order[1];
  }
  return order[2];
}

SplitAssignment split_dataset(const Dataset & dataset, std::array<double, 3> ratios, std::uint64_t seed)
{
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || *std::min_element(ratios.begin(), ratios.end()) < 0.0) {
    throw UsageError("ratios must sum to 1");
  }
  static const std::array<std::array<Split, 3>, 6> kOrders{{
    {Split::train, Split::validation, Split::test},
    {Split::train, Split::test, Split::validation},
    {Split::validation, Split::train, Split::test},
    {Split::validation, Split::test, Split::train},
    {Split::test, Split::train, Split::validation},
    {Split::test, Split::validation, Split::train},
  }};
  SplitAssignment out;
  out.order = kOrders[seed % kOrders.size()];

  std::vector<double> times;
  for (const auto & [id, track] : dataset.tracks) {
    for (const auto & s : track.states) {
      times.push_back(s.t);
    }
  }
  std::sort(times.begin(), times.end());
  const auto at_fraction = [&](double fraction) {
      const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(times.size())));
      return k >= times.size() ? std::numeric_limits<double>::infinity() : times[k];
    };
  const double first = ratios[static_cast<int>(out.order[0])];
  const double second = ratios[static_cast<int>(out.order[1])];
  out.boundaries = {at_fraction(first), at_fraction(first + second)};

  for (const auto & [id, track] : dataset.tracks) {
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= track.states.size(); ++i) {
      const Split cur = out.split_of(track.states[begin].t);
      if (i == track.states.size() || out.split_of(track.states[i].t) != cur) {
        out.pieces.push_back({id, cur, begin, i});
        out.samples[static_cast<int>(cur)] += static_cast<std::int64_t>(i - begin);
        begin = i;
      }
    }
  }
  return out;
}

Dataset apply_split(const Dataset & dataset, const SplitAssignment & assignment, const std::set<Split> & splits)
{
  Dataset out;
  out.site = dataset.site;
  out.sample_hz = dataset.sample_hz;
  out.time_origin_ms = dataset.time_origin_ms;
  std::map<VehicleId, std::vector<std::pair<std::size_t, std::size_t>>> ranges;
  for (const auto & p : assignment.pieces) {
    if (!splits.count(p.split)) {
      continue;
    }
    auto & r = ranges[p.vehicle_id];
    if (!r.empty() && r.back().second == p.begin) {
      r.back().second = p.end;
    } else {
      r.emplace_back(p.begin, p.end);
    }
  }
  for (const auto & [id, list] : ranges) {
    const VehicleTrack * src = dataset.find(id);
    if (src == nullptr) {
      throw DataError("split references unknown vehicle " + std::to_string(id));
    }
    // A vehicle split into disjoint selected pieces keeps its longest one.
    const auto best = std::max_element(list.begin(), list.end(), [](const auto & a, const auto & b) {
          return a.second - a.first < b.second - b.first;
        });
    if (best->second > src->states.size()) {
      throw DataError("split range exceeds track of vehicle " + std::to_string(id));
    }
    VehicleTrack t = *src;
    t.states.assign(src->states.begin() + best->first, src->states.begin() + best->second);
    out.tracks.emplace(id, std::move(t));
  }
  return out;
}

void write_split(const SplitAssignment & a, std::ostream & out)
{
  write_wire_header(
    out, "bb-split v1",
    {{"order", to_string(a.order[0]) + ";" + to_string(a.order[1]) + ";" + to_string(a.order[2])},
      {"boundaries", format_double(a.boundaries[0]) + ";" + format_double(a.boundaries[1])}});
  out << "vehicle_id,split,begin,end\n";
  for (const auto & p : a.pieces) {
    out << p.vehicle_id << ',' << to_string(p.split) << ',' << p.begin << ',' << p.end << '\n';
  }
}

SplitAssignment read_split(std::istream & in, const std::string & origin)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": empty file");
  }
  const auto header = parse_wire_header(line, "bb-split v1", origin);
  SplitAssignment a;
  const auto field = [&](const std::string & key) {
      if (!header.count(key)) {
        throw DataError(origin + ": header lacks " + key);
      }
      std::vector<std::string> parts;
      std::stringstream ss(header.at(key));
      std::string part;
      while (std::getline(ss, part, ';')) {
        parts.push_back(part);
      }
      return parts;
    };
  const auto order = field("order");
  const auto bounds = field("boundaries");
  if (order.size() != 3 || bounds.size() != 2) {
    throw DataError(origin + ": malformed split header");
  }
  for (int i = 0; i < 3; ++i) {
    a.order[i] = parse_split(order[i], origin);
  }
  a.boundaries = {parse_double(bounds[0], origin), parse_double(bounds[1], origin)};
  expect_columns(in, "vehicle_id,split,begin,end", origin);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const auto f = split_row(line);
    const auto ctx = row_context(origin, lineno);
    if (f.size() != 4) {
      throw DataError(ctx + ": expected 4 columns");
    }
    SplitPiece p{parse_int(f[0], ctx), parse_split(f[1], ctx),
      static_cast<std::size_t>(parse_int(f[2], ctx)), static_cast<std::size_t>(parse_int(f[3], ctx))};
    a.samples[static_cast<int>(p.split)] += static_cast<std::int64_t>(p.end - p.begin);
    a.pieces.push_back(p);
  }
  return a;
}

// ---------------------------------------------------------------------------

namespace
{

constexpr const char * kRequestColumns = "request_id,ego_id,anchor_t,role,neighbor_id,t,x,y";

std::optional<PredictionRequest> build_request_indexed(
  const Dataset & dataset, const SampleIndex & index, const RequestAnchor & anchor, double neighbor_radius)
{
  const VehicleTrack * ego = dataset.find(anchor.vehicle_id);
  if (ego == nullptr) {
    throw DataError("request for unknown vehicle " + std::to_string(anchor.vehicle_id));
  }
  const auto idx = ego->index_at(anchor.anchor_t, dataset.sample_hz);
  const std::size_t stride = prediction_stride(dataset.sample_hz);
  const std::size_t span = (kHistorySamples - 1) * stride;
  if (!idx || *idx < span) {
    return std::nullopt;
  }
  PredictionRequest req;
  req.request_id = anchor.request_id;
  req.ego_id = anchor.vehicle_id;
  req.anchor_t = ego->states[*idx].t;
  req.ego.vehicle_id = anchor.vehicle_id;
  req.ego.points.resize(kHistorySamples, 2);
  std::vector<double> times;
  for (int k = 0; k < kHistorySamples; ++k) {
    const auto & s = ego->states[*idx - span + k * stride];
    req.ego.t.push_back(s.t);
    req.ego.points.row(k) = s.position().transpose();
  }
  const Eigen::Vector2d ego_pos = ego->states[*idx].position();
  for (const auto & entry : index.at(req.anchor_t)) {
    const VehicleTrack & other = *entry.track;
    if (other.vehicle_id == ego->vehicle_id ||
      (entry.state().position() - ego_pos).norm() > neighbor_radius)
    {
      continue;
    }
    RequestTrack nb;
    nb.vehicle_id = other.vehicle_id;
    std::vector<Eigen::Vector2d> pts;
    for (const double t : req.ego.t) {
      if (const auto j = other.index_at(t, dataset.sample_hz)) {
        nb.t.push_back(other.states[*j].t);
        pts.push_back(other.states[*j].position());
      }
    }
    nb.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      nb.points.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
    }
    req.neighbors.push_back(std::move(nb));
  }
  return req;
}

void write_request_track(std::ostream & out, const PredictionRequest & req, const RequestTrack & tr, bool ego)
{
  const std::string prefix = std::to_string(req.request_id) + ',' + std::to_string(req.ego_id) + ',' +
    format_double(req.anchor_t) + (ego ? std::string(",ego,,") : ",neighbor," + std::to_string(tr.vehicle_id) + ",");
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out << prefix << format_double(tr.t[k]) << ',' << format_double(tr.points(r, 0)) << ','
        << format_double(tr.points(r, 1)) << '\n';
  }
}

}  // namespace

std::optional<PredictionRequest> build_request(
  const Dataset & dataset, const RequestAnchor & anchor, double neighbor_radius)
{
  const SampleIndex index(dataset);
  return build_request_indexed(dataset, index, anchor, neighbor_radius);
}

RequestWriteResult write_prediction_requests(
  const Dataset & dataset, std::span<const RequestAnchor> anchors, double neighbor_radius,
  const WireHeader & header, std::ostream & out)
{
  write_wire_header(out, "bb-req v1", header);
  out << kRequestColumns << '\n';
  RequestWriteResult result;
  if (anchors.empty()) {
    return result;
  }
  const SampleIndex index(dataset);
  for (const auto & anchor : anchors) {
    const auto req = build_request_indexed(dataset, index, anchor, neighbor_radius);
    if (!req) {
      result.skipped.push_back(anchor);
      continue;
    }
    write_request_track(out, *req, req->ego, true);
    for (const auto & nb : req->neighbors) {
      write_request_track(out, *req, nb, false);
    }
    ++result.written;
  }
  return result;
}

std::vector<PredictionRequest> read_prediction_requests(
  std::istream & in, const std::string & origin, WireHeader * header)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": empty file");
  }
  const auto h = parse_wire_header(line, "bb-req v1", origin);
  if (header != nullptr) {
    *header = h;
  }
  expect_columns(in, kRequestColumns, origin);

  struct Building
  {
    PredictionRequest req;
    std::vector<Eigen::Vector2d> ego_pts;
    std::map<VehicleId, std::pair<std::vector<double>, std::vector<Eigen::Vector2d>>> nbs;
  };
  std::vector<Building> list;
  std::unordered_map<std::int64_t, std::size_t> by_id;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const auto f = split_row(line);
    const auto ctx = row_context(origin, lineno);
    if (f.size() != 8) {
      throw DataError(ctx + ": expected 8 columns");
    }
    const std::int64_t rid = parse_int(f[0], ctx);
    auto it = by_id.find(rid);
    if (it == by_id.end()) {
      it = by_id.emplace(rid, list.size()).first;
      list.emplace_back();
      auto & r = list.back().req;
      r.request_id = rid;
      r.ego_id = parse_int(f[1], ctx);
      r.anchor_t = parse_double(f[2], ctx);
      r.ego.vehicle_id = r.ego_id;
    }
    auto & b = list[it->second];
    if (parse_int(f[1], ctx) != b.req.ego_id) {
      throw DataError(ctx + ": inconsistent ego_id for request " + std::to_string(rid));
    }
    const double t = parse_double(f[5], ctx);
    const Eigen::Vector2d p(parse_double(f[6], ctx), parse_double(f[7], ctx));
    if (f[3] == "ego") {
      b.req.ego.t.push_back(t);
      b.ego_pts.push_back(p);
    } else if (f[3] == "neighbor") {
      auto & nb = b.nbs[parse_int(f[4], ctx)];
      nb.first.push_back(t);
      nb.second.push_back(p);
    } else {
      throw DataError(ctx + ": role must be ego or neighbor");
    }
  }

  const auto to_points = [](const std::vector<Eigen::Vector2d> & pts) {
      Points2 m(static_cast<Eigen::Index>(pts.size()), 2);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        m.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
      }
      return m;
    };
  std::vector<PredictionRequest> out;
  out.reserve(list.size());
  for (auto & b : list) {
    b.req.ego.points = to_points(b.ego_pts);
    for (auto & [id, nb] : b.nbs) {
      b.req.neighbors.push_back({id, nb.first, to_points(nb.second)});
    }
    out.push_back(std::move(b.req));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Frame f)
{
  return f == Frame::local ? "local" : "global";
}

std::optional<FrameTransform> fit_frame_transform(const Dataset & dataset)
{
  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> pairs;
  for (const auto & [id, track] : dataset.tracks) {
    for (const auto & s : track.states) {
      if (s.gx && s.gy) {
        pairs.emplace_back(Eigen::Vector2d(*s.gx, *s.gy), s.position());
      }
    }
  }
  if (pairs.size() < 3) {
    return std::nullopt;
  }
  Eigen::Matrix2Xd src(2, static_cast<Eigen::Index>(pairs.size()));
  Eigen::Matrix2Xd dst(2, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    src.col(static_cast<Eigen::Index>(k)) = pairs[k].first;
    dst.col(static_cast<Eigen::Index>(k)) = pairs[k].second;
  }
  const Eigen::Matrix3d h = Eigen::umeyama(src, dst, false);
  FrameTransform tf;
  tf.rotation = h.topLeftCorner<2, 2>();
  tf.translation = h.topRightCorner<2, 1>();
  return tf;
}

const PredictionInstance * PredictionSet::find(VehicleId id, double anchor_t) const
{
  const auto it = instances.find({id, time_key(anchor_t)});
  return it == instances.end() ? nullptr : &it->second;
}

namespace
{
constexpr const char * kPredictionColumns = "request_id,ego_id,anchor_t,mode_index,mode_prob,step,x,y";
}

PredictionSet parse_predictions(std::istream & in, const Dataset & dataset, const std::string & origin)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(origin + ": empty file");
  }
  PredictionSet set;
  set.header = parse_wire_header(line, "bb-pred v1", origin);
  set.source = set.header.count("source") ? set.header.at("source") : std::string("model");
  if (set.header.count("frame")) {
    const auto & f = set.header.at("frame");
    if (f == "local") {
      set.frame = Frame::local;
    } else if (f == "global") {
      set.frame = Frame::global;
    } else {
      throw DataError(origin + ": frame must be local or global");
    }
  }
  expect_columns(in, kPredictionColumns, origin);

  std::optional<FrameTransform> transform;
  if (set.frame == Frame::global) {
    transform = fit_frame_transform(dataset);
    if (!transform) {
      throw DataError(origin + ": global-frame predictions need global coordinates in the dataset");
    }
  }

  struct Mode
  {
    double prob{0.0};
    std::map<int, Eigen::Vector2d> steps;
  };
  struct Building
  {
    VehicleId ego;
    double anchor_t;
    std::map<int, Mode> modes;
  };
  std::map<std::int64_t, Building> building;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const auto f = split_row(line);
    const auto ctx = row_context(origin, lineno);
    if (f.size() != 8) {
      throw DataError(ctx + ": expected 8 columns");
    }
    const std::int64_t rid = parse_int(f[0], ctx);
    const VehicleId ego = parse_int(f[1], ctx);
    const double anchor = parse_double(f[2], ctx);
    const int mode = static_cast<int>(parse_int(f[3], ctx));
    const double prob = parse_double(f[4], ctx);
    const int step = static_cast<int>(parse_int(f[5], ctx));
    const Eigen::Vector2d p(parse_double(f[6], ctx), parse_double(f[7], ctx));
    if (prob < 0.0 || !std::isfinite(prob)) {
      throw DataError(ctx + ": negative mode probability");
    }
    auto [it, fresh] = building.try_emplace(rid, Building{ego, anchor, {}});
    if (!fresh && (it->second.ego != ego || time_key(it->second.anchor_t) != time_key(anchor))) {
      throw DataError(ctx + ": inconsistent ego/anchor for request " + std::to_string(rid));
    }
    auto & m = it->second.modes[mode];
    if (m.steps.empty()) {
      m.prob = prob;
    } else if (m.prob != prob) {
      throw DataError(ctx + ": mode probability changes within a mode");
    }
    if (!m.steps.emplace(step, p).second) {
      throw DataError(ctx + ": duplicate step " + std::to_string(step));
    }
  }

  for (auto & [rid, b] : building) {
    const std::string ctx = origin + ": request " + std::to_string(rid);
    const VehicleTrack * track = dataset.find(b.ego);
    if (track == nullptr) {
      throw DataError(ctx + ": unknown vehicle_id " + std::to_string(b.ego));
    }
    const auto idx = track->index_at(b.anchor_t, dataset.sample_hz);
    if (!idx) {
      throw DataError(ctx + ": anchor_t is not a sample of vehicle " + std::to_string(b.ego));
    }
    PredictionInstance inst;
    inst.request_id = rid;
    inst.vehicle_id = b.ego;
    inst.anchor_t = track->states[*idx].t;
    double total = 0.0;
    for (auto & [mi, m] : b.modes) {
      if (m.steps.size() != kPredictionSteps || m.steps.begin()->first != 1 ||
        m.steps.rbegin()->first != kPredictionSteps)
      {
        throw DataError(ctx + ": horizon mismatch");
      }
      PredictionMode mode;
      mode.probability = m.prob;
      mode.points.resize(kPredictionSteps + 1, 2);
      const auto & anchor_state = track->states[*idx];
      if (transform && anchor_state.gx && anchor_state.gy) {
        mode.points.row(0) = transform->to_local(Eigen::Vector2d(*anchor_state.gx, *anchor_state.gy)).transpose();
      } else {
        mode.points.row(0) = anchor_state.position().transpose();
      }
      for (const auto & [step, p] : m.steps) {
        mode.points.row(step) = (transform ? transform->to_local(p) : p).transpose();
      }
      total += m.prob;
      inst.modes.push_back(std::move(mode));
    }
    if (!(total > 0.0)) {
      throw DataError(ctx + ": mode probabilities sum to zero");
    }
    if (std::abs(total - 1.0) > 1e-6) {
      ++set.normalized;
    }
    for (auto & mode : inst.modes) {
      mode.probability /= total;
    }
    if (!set.instances.emplace(std::make_pair(b.ego, time_key(inst.anchor_t)), std::move(inst)).second) {
      throw DataError(ctx + ": duplicate prediction for vehicle/anchor");
    }
  }
  return set;
}

PredictionSet parse_predictions(const std::filesystem::path & path, const Dataset & dataset)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return parse_predictions(in, dataset, path.string());
}

void write_predictions(
  std::span<const PredictionInstance> instances, const WireHeader & header, std::ostream & out)
{
  write_wire_header(out, "bb-pred v1", header);
  out << kPredictionColumns << '\n';
  for (const auto & inst : instances) {
    const std::string prefix = std::to_string(inst.request_id) + ',' + std::to_string(inst.vehicle_id) + ',' +
      format_double(inst.anchor_t) + ',';
    for (std::size_t m = 0; m < inst.modes.size(); ++m) {
      const auto & mode = inst.modes[m];
      if (mode.points.rows() != kPredictionSteps + 1) {
        throw DataError("write_predictions: mode must hold anchor plus 12 steps");
      }
      for (int k = 1; k <= kPredictionSteps; ++k) {
        out << prefix << m << ',' << format_double(mode.probability) << ',' << k << ','
            << format_double(mode.points(k, 0)) << ',' << format_double(mode.points(k, 1)) << '\n';
      }
    }
  }
}

}  // namespace bb
