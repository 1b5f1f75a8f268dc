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

#include "bb/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace bb
{

namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

const std::string & require(const KeyValues & kv, const std::string & key)
{
  const auto it = kv.find(key);
  if (it == kv.end()) {
    throw DataError("missing key " + key);
  }
  return it->second;
}

LaneRole parse_role(const std::string & s)
{
  if (s == "mainline") return LaneRole::mainline;
  if (s == "outermost_mainline") return LaneRole::outermost_mainline;
  if (s == "onramp") return LaneRole::onramp;
  if (s == "auxiliary") return LaneRole::auxiliary;
  if (s == "offramp") return LaneRole::offramp;
  throw DataError("unknown lane role '" + s + "'");
}

}  // namespace

KeyValues parse_key_values(std::istream & in, const std::string & origin)
{
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    kv[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return parse_key_values(in, path.string());
}

std::string format_key_values(const KeyValues & kv)
{
  std::string out;
  for (const auto & [k, v] : kv) {
    out += k + " = " + v + "\n";
  }
  return out;
}

std::string format_double(double v)
{
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string & context)
{
  const auto s = trim(text);
  if (s == "inf" || s == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (s == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  const char * begin = s.data();
  if (!s.empty() && s.front() == '+') {
    ++begin;
  }
  const auto res = std::from_chars(begin, s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(context + ": non-numeric value '" + s + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view text, const std::string & context)
{
  const auto s = trim(text);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // NGSIM stores some integer columns as "2.0" in re-exported files.
    const double d = parse_double(s, context);
    if (d != std::floor(d)) {
      throw DataError(context + ": non-integer value '" + s + "'");
    }
    return static_cast<std::int64_t>(d);
  }
  return v;
}

std::vector<double> parse_double_list(std::string_view text, const std::string & context)
{
  std::vector<double> out;
  if (trim(text).empty()) {
    return out;
  }
  for (const auto & part : split(text, ',')) {
    out.push_back(parse_double(part, context));
  }
  return out;
}

std::string format_double_list(const std::vector<double> & values)
{
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) {
      out += ",";
    }
    out += format_double(values[i]);
  }
  return out;
}

SiteProfile site_from_key_values(const KeyValues & kv)
{
  static const std::vector<std::string> known{
    "site_id", "name", "lane_roles", "lane_order", "lane_boundaries", "raw_unit", "merge_zone"};
  for (const auto & [k, v] : kv) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw DataError("site profile: unknown key " + k);
    }
  }
  SiteProfile site;
  const auto & id = require(kv, "site_id");
  if (id == "US101") {
    site.site_id = SiteId::us101;
  } else if (id == "I80") {
    site.site_id = SiteId::i80;
  } else if (id == "custom") {
    site.site_id = SiteId::custom;
  } else {
    throw DataError("site profile: unknown site_id " + id);
  }
  site.name = kv.count("name") ? kv.at("name") : id;
  for (const auto & entry : split(require(kv, "lane_roles"), ',')) {
    const auto parts = split(entry, ':');
    if (parts.size() != 2) {
      throw DataError("site profile: lane_roles entries must be lane:role");
    }
    site.lane_roles[static_cast<LaneId>(parse_int(parts[0], "lane_roles"))] = parse_role(parts[1]);
  }
  for (const double v : parse_double_list(require(kv, "lane_order"), "lane_order")) {
    site.lane_order.push_back(static_cast<LaneId>(v));
  }
  site.lane_boundaries = parse_double_list(require(kv, "lane_boundaries"), "lane_boundaries");
  const auto & unit = require(kv, "raw_unit");
  if (unit == "feet") {
    site.raw_unit = RawUnit::feet;
  } else if (unit == "meters") {
    site.raw_unit = RawUnit::meters;
  } else {
    throw DataError("site profile: raw_unit must be feet or meters");
  }
  const auto zone = parse_double_list(require(kv, "merge_zone"), "merge_zone");
  if (zone.size() != 2) {
    throw DataError("site profile: merge_zone needs two values");
  }
  site.merge_zone_begin = zone[0];
  site.merge_zone_end = zone[1];
  validate_site(site, false);
  return site;
}

KeyValues to_key_values(const SiteProfile & site)
{
  KeyValues kv;
  kv["site_id"] = to_string(site.site_id);
  kv["name"] = site.name;
  std::string roles;
  for (const auto & [lane, r] : site.lane_roles) {
    if (!roles.empty()) {
      roles += ",";
    }
    roles += std::to_string(lane) + ":" + to_string(r);
  }
  kv["lane_roles"] = roles;
  std::string order;
  for (const auto lane : site.lane_order) {
    if (!order.empty()) {
      order += ",";
    }
    order += std::to_string(lane);
  }
  kv["lane_order"] = order;
  kv["lane_boundaries"] = format_double_list(site.lane_boundaries);
  kv["raw_unit"] = site.raw_unit == RawUnit::feet ? "feet" : "meters";
  kv["merge_zone"] = format_double(site.merge_zone_begin) + "," + format_double(site.merge_zone_end);
  return kv;
}

SiteProfile builtin_site(SiteId id)
{
  // Lane edges approximate the 12 ft NGSIM lanes; recorded Lane_IDs take
  // precedence, so these only matter for predicted trajectories.
  SiteProfile site;
  site.site_id = id;
  site.raw_unit = RawUnit::feet;
  const auto edges = [](int lanes) {
      std::vector<double> e;
      for (int i = 0; i <= lanes; ++i) {
        e.push_back(i * 12.0 * kFeetToMeters);
      }
      return e;
    };
  switch (id) {
    case SiteId::us101:
      site.name = "US101";
      site.lane_roles = {
        {1, LaneRole::mainline}, {2, LaneRole::mainline}, {3, LaneRole::mainline},
        {4, LaneRole::mainline}, {5, LaneRole::outermost_mainline}, {6, LaneRole::auxiliary},
        {7, LaneRole::onramp}, {8, LaneRole::offramp}};
      site.lane_order = {1, 2, 3, 4, 5};
      site.lane_boundaries = edges(8);
      site.merge_zone_begin = 0.0;
      site.merge_zone_end = 2100.0 * kFeetToMeters;
      break;
    case SiteId::i80:
      site.name = "I80";
      site.lane_roles = {
        {1, LaneRole::mainline}, {2, LaneRole::mainline}, {3, LaneRole::mainline},
        {4, LaneRole::mainline}, {5, LaneRole::mainline}, {6, LaneRole::outermost_mainline},
        {7, LaneRole::onramp}};
      site.lane_order = {1, 2, 3, 4, 5, 6};
      site.lane_boundaries = edges(7);
      site.merge_zone_begin = 0.0;
      site.merge_zone_end = 1650.0 * kFeetToMeters;
      break;
    case SiteId::custom:
      throw UsageError("no built-in profile for custom sites");
  }
  return site;
}

SiteProfile load_site(const std::string & name_or_path)
{
  std::string lower = name_or_path;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {return std::tolower(c);});
  if (lower == "us101") {
    return builtin_site(SiteId::us101);
  }
  if (lower == "i80") {
    return builtin_site(SiteId::i80);
  }
  return site_from_key_values(read_key_values(name_or_path));
}

AnalysisConfig config_from_key_values(const KeyValues & kv)
{
  AnalysisConfig c;
  for (const auto & [k, v] : kv) {
    const std::string ctx = "config " + k;
    if (k == "lookbacks") {
      c.lookbacks = parse_double_list(v, ctx);
    } else if (k == "conflict_threshold") {
      c.conflict_threshold = parse_double(v, ctx);
    } else if (k == "safety_margin") {
      c.safety_margin = parse_double(v, ctx);
    } else if (k == "lead_bin_width") {
      c.lead_bin_width = parse_double(v, ctx);
    } else if (k == "lead_bin_min") {
      c.lead_bin_min = parse_double(v, ctx);
    } else if (k == "lead_bin_max") {
      c.lead_bin_max = parse_double(v, ctx);
    } else if (k == "ttc_bin_edges") {
      c.ttc_bin_edges = parse_double_list(v, ctx);
    } else if (k == "lc_dwell") {
      c.lc_dwell = parse_double(v, ctx);
    } else if (k == "neighbor_radius") {
      c.neighbor_radius = parse_double(v, ctx);
    } else if (k == "min_count") {
      c.min_count = static_cast<int>(parse_int(v, ctx));
    } else if (k == "highway_anchor_cadence") {
      c.highway_anchor_cadence = parse_double(v, ctx);
    } else if (k == "stopped_speed") {
      c.stopped_speed = parse_double(v, ctx);
    } else if (k == "ttc_equal_speed") {
      c.ttc_equal_speed = parse_double(v, ctx);
    } else if (k == "extrapolation_cap") {
      c.extrapolation_cap = parse_double(v, ctx);
    } else {
      throw UsageError("config: unknown key " + k);
    }
  }
  c.validate();
  return c;
}

KeyValues to_key_values(const AnalysisConfig & c)
{
  return {
    {"lookbacks", format_double_list(c.lookbacks)},
    {"conflict_threshold", format_double(c.conflict_threshold)},
    {"safety_margin", format_double(c.safety_margin)},
    {"lead_bin_width", format_double(c.lead_bin_width)},
    {"lead_bin_min", format_double(c.lead_bin_min)},
    {"lead_bin_max", format_double(c.lead_bin_max)},
    {"ttc_bin_edges", format_double_list(c.ttc_bin_edges)},
    {"lc_dwell", format_double(c.lc_dwell)},
    {"neighbor_radius", format_double(c.neighbor_radius)},
    {"min_count", std::to_string(c.min_count)},
    {"highway_anchor_cadence", format_double(c.highway_anchor_cadence)},
    {"stopped_speed", format_double(c.stopped_speed)},
    {"ttc_equal_speed", format_double(c.ttc_equal_speed)},
    {"extrapolation_cap", format_double(c.extrapolation_cap)},
  };
}

}  // namespace bb
