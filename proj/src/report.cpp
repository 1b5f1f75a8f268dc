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

#include "bb/report.hpp"

#include "bb/config_io.hpp"
#include "bb/digest.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>

namespace bb
{

namespace
{

using Json = nlohmann::ordered_json;

/// JSON has no infinities; edges and sentinels are written as strings then.
Json number(double v)
{
  if (std::isfinite(v)) {
    return v;
  }
  return format_double(v);
}

Json curve_json(const BinnedCurve & c)
{
  Json bins = Json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    bins.push_back({
        {"lower", number(c.lower[i])},
        {"upper", number(c.upper[i])},
        {"center", number(c.centers[i])},
        {"value", number(c.values[static_cast<Eigen::Index>(i)])},
        {"count", c.counts[i]},
        {"masked", static_cast<bool>(c.masked[i])},
      });
  }
  return {{"bins", bins}, {"dropped", c.dropped}};
}

Json safety_json(const SafetyStats & s)
{
  Json cells = Json::array();
  for (const auto & [key, cell] : s.cells) {
    cells.push_back({
        {"scenario", to_string(key.first)},
        {"lane_change_status", key.second ? "changed" : "not_changed"},
        {"interactions", cell.interactions},
        {"unsafe", cell.unsafe},
        {"pct", cell.pct()},
        {"zero_denominator", cell.zero_denominator()},
      });
  }
  for (const bool changed : {true, false}) {
    const auto t = s.total(changed);
    cells.push_back({
        {"scenario", "all"},
        {"lane_change_status", changed ? "changed" : "not_changed"},
        {"interactions", t.interactions},
        {"unsafe", t.unsafe},
        {"pct", t.pct()},
        {"zero_denominator", t.zero_denominator()},
      });
  }
  return {{"frame", to_string(s.frame)}, {"missing", s.missing}, {"cells", cells}};
}

Json config_json(const AnalysisConfig & c)
{
  Json j = Json::object();
  for (const auto & [k, v] : to_key_values(c)) {
    j[k] = v;
  }
  return j;
}

std::string tau_text(double tau)
{
  return format_double(tau);
}

void write_curve_rows(
  std::ostream & out, const std::string & site, const std::string & source, double tau, const BinnedCurve & c)
{
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << site << ',' << source << ',' << format_double(tau) << ',' << format_double(c.lower[i]) << ','
        << format_double(c.upper[i]) << ',' << format_double(c.centers[i]) << ','
        << format_double(c.values[static_cast<Eigen::Index>(i)]) << ',' << c.counts[i] << ','
        << (c.masked[i] ? 1 : 0) << '\n';
  }
}

constexpr const char * kCurveColumns = "site,source,tau,bin_lower,bin_upper,bin_center,value,count,masked\n";

void write_text(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << text;
}

template<class Writer>
void write_csv(const std::filesystem::path & path, Writer && writer)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  writer(out);
}

}  // namespace

std::string report_json(const BehaviorReport & report)
{
  Json j;
  j["site"] = report.site;
  j["config_digest"] = report.config_digest;
  j["config"] = config_json(report.config);
  j["counts"] = {
    {"merge_events", report.merge_events},
    {"highway_anchors", report.highway_anchors},
    {"faster_lane_changes", report.faster_lane_changes},
  };
  Json sources = Json::array();
  for (const auto & s : report.sources) {
    Json src;
    src["source"] = s.source;
    Json per_tau = Json::array();
    for (const double tau : report.config.lookbacks) {
      Json t;
      t["tau"] = tau;
      if (const auto it = s.pass_first.find(tau); it != s.pass_first.end()) {
        t["pass_first"] = curve_json(it->second.curve);
        t["pass_first"]["resolved"] = it->second.resolved;
        t["pass_first"]["undetermined"] = it->second.undetermined;
      } else {
        t["pass_first"] = nullptr;
      }
      if (const auto it = s.courtesy.find(tau); it != s.courtesy.end()) {
        const auto & c = it->second;
        t["courtesy"] = {
          {"table", {{c.table.a, c.table.b}, {c.table.c, c.table.d}}},
          {"p_value", c.p_value},
          {"shoulder_exits", c.shoulder_exits},
        };
      }
      if (const auto it = s.highway_lc.find(tau); it != s.highway_lc.end()) {
        t["highway_lc"] = curve_json(it->second.curve);
        t["highway_lc"]["lane_changes"] = it->second.lane_changes;
        t["highway_lc"]["missing"] = it->second.missing;
      }
      per_tau.push_back(std::move(t));
    }
    src["lookbacks"] = std::move(per_tau);
    if (s.rmse) {
      Json rm = Json::array();
      for (std::size_t i = 0; i < s.rmse->horizons.size(); ++i) {
        rm.push_back({{"horizon", s.rmse->horizons[i]}, {"rmse", s.rmse->rmse[i]}});
      }
      src["rmse"] = {{"instances", s.rmse->instances}, {"excluded", s.rmse->excluded}, {"by_horizon", rm}};
    }
    sources.push_back(std::move(src));
  }
  j["sources"] = std::move(sources);
  Json r2 = Json::array();
  for (const auto & e : report.r2) {
    Json x = {{"metric", e.metric}, {"source", e.source}, {"tau", e.tau}};
    x["r2"] = e.value ? Json(number(*e.value)) : Json(nullptr);
    if (!e.error.empty()) {
      x["error"] = e.error;
    }
    r2.push_back(std::move(x));
  }
  j["r2"] = std::move(r2);
  Json safety = Json::array();
  for (const auto & f : report.safety) {
    Json x = {{"source", f.source}};
    x["local"] = f.local ? safety_json(*f.local) : Json(nullptr);
    x["global"] = f.global ? safety_json(*f.global) : Json(nullptr);
    safety.push_back(std::move(x));
  }
  j["safety"] = std::move(safety);
  return j.dump(2) + "\n";
}

void write_passfirst_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out)
{
  out << "# manifest=" << manifest << '\n' << kCurveColumns;
  for (const auto & s : report.sources) {
    for (const auto & [tau, r] : s.pass_first) {
      write_curve_rows(out, report.site, s.source, tau, r.curve);
    }
  }
}

void write_courtesy_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out)
{
  out << "# manifest=" << manifest << '\n'
      << "site,source,tau,conflict_lc,conflict_no_lc,noconflict_lc,noconflict_no_lc,p_value,shoulder_exits\n";
  for (const auto & s : report.sources) {
    for (const auto & [tau, c] : s.courtesy) {
      out << report.site << ',' << s.source << ',' << tau_text(tau) << ',' << c.table.a << ',' << c.table.b << ','
          << c.table.c << ',' << c.table.d << ',' << format_double(c.p_value) << ',' << c.shoulder_exits << '\n';
    }
  }
}

void write_highwaylc_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out)
{
  out << "# manifest=" << manifest << '\n' << kCurveColumns;
  for (const auto & s : report.sources) {
    for (const auto & [tau, r] : s.highway_lc) {
      write_curve_rows(out, report.site, s.source, tau, r.curve);
    }
  }
}

void write_rmse_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out)
{
  out << "# manifest=" << manifest << '\n' << "site,source,horizon,rmse,instances\n";
  for (const auto & s : report.sources) {
    if (!s.rmse) {
      continue;
    }
    for (std::size_t i = 0; i < s.rmse->horizons.size(); ++i) {
      out << report.site << ',' << s.source << ',' << format_double(s.rmse->horizons[i]) << ','
          << format_double(s.rmse->rmse[i]) << ',' << s.rmse->instances << '\n';
    }
  }
}

void write_safety_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out)
{
  out << "# manifest=" << manifest << '\n'
      << "site,source,frame,scenario,lane_change_status,interactions,unsafe,pct,zero_denominator\n";
  const auto row = [&](const SafetyStats & s, const std::string & scenario, bool changed, const SafetyCell & c) {
      out << report.site << ',' << s.source << ',' << to_string(s.frame) << ',' << scenario << ','
          << (changed ? "changed" : "not_changed") << ',' << c.interactions << ',' << c.unsafe << ','
          << format_double(c.pct()) << ',' << (c.zero_denominator() ? 1 : 0) << '\n';
    };
  for (const auto & f : report.safety) {
    for (const auto * stats : {f.local ? &*f.local : nullptr, f.global ? &*f.global : nullptr}) {
      if (stats == nullptr) {
        continue;
      }
      for (const auto & [key, cell] : stats->cells) {
        row(*stats, to_string(key.first), key.second, cell);
      }
      for (const bool changed : {true, false}) {
        row(*stats, "all", changed, stats->total(changed));
      }
    }
  }
}

ReportDigests write_report_dir(
  const BehaviorReport & report, const std::map<std::string, std::string> & input_digests,
  const std::filesystem::path & dir)
{
  std::filesystem::create_directories(dir);
  const std::string text = report_json(report);
  ReportDigests d;
  d.report = sha256_hex(text);

  Json manifest;
  manifest["tool"] = "behavior-bench";
  manifest["version"] = BB_VERSION;
  manifest["config"] = config_json(report.config);
  manifest["config_digest"] = report.config_digest;
  manifest["inputs"] = Json::object();
  for (const auto & [name, digest] : input_digests) {
    manifest["inputs"][name] = digest;
  }
  manifest["report_digest"] = d.report;
  d.manifest = sha256_hex(manifest.dump());
  manifest["manifest_digest"] = d.manifest;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  manifest["generated_at"] = stamp;

  write_text(dir / "report.json", text);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_csv(dir / "fig6_passfirst.csv", [&](std::ostream & o) { write_passfirst_csv(report, d.manifest, o); });
  write_csv(dir / "fig7_courtesy.csv", [&](std::ostream & o) { write_courtesy_csv(report, d.manifest, o); });
  write_csv(dir / "fig8_highwaylc.csv", [&](std::ostream & o) { write_highwaylc_csv(report, d.manifest, o); });
  write_csv(dir / "table1_rmse.csv", [&](std::ostream & o) { write_rmse_csv(report, d.manifest, o); });
  write_csv(dir / "safety.csv", [&](std::ostream & o) { write_safety_csv(report, d.manifest, o); });
  write_csv(dir / "events.csv", [&](std::ostream & o) {
      o << "# manifest=" << d.manifest << '\n';
      write_events_csv(report.events, o);
    });
  return d;
}

}  // namespace bb
