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

// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on any FAIL.

#include "bb/cli.hpp"
#include "bb/config_io.hpp"
#include "bb/pipeline.hpp"
#include "bb/stats.hpp"
#include "bb/synth.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace
{

enum class Verdict { pass, fail, skip };

struct Outcome
{
  Verdict verdict{Verdict::fail};
  std::string detail;
};

Outcome verdict(bool ok, std::string detail)
{
  return {ok ? Verdict::pass : Verdict::fail, std::move(detail)};
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double rel_err(double got, double want)
{
  if (got == want) {
    return 0.0;
  }
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// Routes instances through the bb-pred text format and back.
bb::PredictionSet round_trip(const bb::PredictionSet & set, const bb::Dataset & ds)
{
  std::vector<bb::PredictionInstance> instances;
  for (const auto & [key, inst] : set.instances) {
    instances.push_back(inst);
  }
  std::stringstream ss;
  bb::write_predictions(instances, {{"source", set.source}, {"frame", "local"}}, ss);
  return bb::parse_predictions(ss, ds, "round-trip");
}

bb::PredictionSet cv_predictions(const bb::Dataset & ds, std::span<const bb::RequestAnchor> anchors, double radius)
{
  std::stringstream req;
  bb::write_prediction_requests(ds, anchors, radius, {}, req);
  std::vector<bb::PredictionInstance> instances;
  for (const auto & r : bb::read_prediction_requests(req, "requests")) {
    instances.push_back(bb::constant_velocity_predict(r));
  }
  std::stringstream pred;
  bb::write_predictions(instances, {{"source", "cv"}, {"frame", "local"}}, pred);
  return bb::parse_predictions(pred, ds, "cv");
}

// ---------------------------------------------------------------------------

Outcome fisher_oracle()
{
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::int64_t tables = 0;
  for (int a = 0; a <= 30; ++a) {
    for (int b = 0; a + b <= 30; ++b) {
      for (int c = 0; a + b + c <= 30; ++c) {
        for (int d = 0; a + b + c + d <= 30; ++d) {
          const double got = bb::fisher_exact_two_sided({a, b, c, d});
          worst = std::max(worst, rel_err(got, oracle::fisher(a, b, c, d)));
          ++tables;
        }
      }
    }
  }
  // Exact rational enumeration, computed offline.
  struct Spot
  {
    bb::Table2x2 t;
    double p;
  };
  const Spot spots[] = {
    {{2500, 2500, 2400, 2600}, 0.047653613555240622},
    {{3000, 2000, 2000, 3000}, 2.1323175603342133e-89},
    {{100, 4900, 130, 4870}, 0.052815915719708513},
    {{1, 4999, 7, 4993}, 0.070203130484072812},
  };
  double worst_spot = 0.0;
  for (const auto & s : spots) {
    worst_spot = std::max(worst_spot, rel_err(bb::fisher_exact_two_sided(s.t), s.p));
  }
  const double secs = seconds_since(t0);
  return verdict(worst <= 1e-10 && worst_spot <= 1e-7 && secs < 30.0,
    std::to_string(tables) + " tables, max rel err " + fmt(worst) + "; N=1e4 max rel err " + fmt(worst_spot) +
      "; " + fmt(secs) + " s");
}

Outcome passfirst_recovery()
{
  const auto t0 = std::chrono::steady_clock::now();
  bb::SynthParams p = fixture::small_params(8000, 0, 2024);
  p.pass_first_logistic_scale = 0.5;
  const auto out = bb::generate_merge_dataset(p);
  const bb::AnalysisConfig config;
  const auto nat = bb::analyze_naturalistic(out.dataset, config);
  const std::vector<bb::PredictionSet> sets{
    round_trip(fixture::truth_predictions(out.dataset, nat.anchors), out.dataset)};
  const auto report = bb::evaluate(out.dataset, config, sets);
  const auto & curve = report.sources.at(0).pass_first.at(5.0).curve;

  double worst = 0.0;
  std::int64_t min_count = -1;
  int bins = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.masked[i]) {
      continue;
    }
    ++bins;
    const double want = oracle::logistic_bin_mean(curve.lower[i], curve.upper[i], p.pass_first_logistic_scale);
    worst = std::max(worst, std::abs(curve.values[static_cast<Eigen::Index>(i)] - want));
    min_count = min_count < 0 ? curve.counts[i] : std::min(min_count, curve.counts[i]);
  }
  std::optional<double> r2;
  for (const auto & e : report.r2) {
    if (e.metric == "pass_first" && e.source == "model:truth" && e.tau == 5.0) {
      r2 = e.value;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = bins > 0 && min_count >= 200 && worst <= 0.05 && r2 && std::abs(*r2 - 1.0) <= 1e-12 && secs < 60.0;
  return verdict(ok, std::to_string(bins) + " bins, min " + std::to_string(min_count) + " events/bin, max |err| " +
                       fmt(worst) + ", R2 " + (r2 ? fmt(*r2) : std::string("n/a")) + "; " + fmt(secs) + " s");
}

Outcome courtesy_significance()
{
  const bb::AnalysisConfig config;
  auto courtesy_p = [&](double pc, double pn, std::uint64_t seed) {
    bb::SynthParams p = fixture::small_params(500, 0, seed);
    p.courtesy_p_conflict = pc;
    p.courtesy_p_noconflict = pn;
    const auto out = bb::generate_merge_dataset(p);
    return bb::courtesy_lc_table(bb::extract_merge_events(out.dataset, config), 5.0).p_value;
  };
  const double p_alt = courtesy_p(0.6, 0.05, 1);
  int rejections = 0;
  constexpr int kSeeds = 200;
  for (int s = 0; s < kSeeds; ++s) {
    rejections += courtesy_p(0.2, 0.2, 1000 + static_cast<std::uint64_t>(s)) < 0.05 ? 1 : 0;
  }
  return verdict(p_alt < 0.001 && rejections <= kSeeds / 10,
    "p=" + fmt(p_alt) + "; null rejections " + std::to_string(rejections) + "/" + std::to_string(kSeeds));
}

Outcome baseline_rmse()
{
  bb::SynthParams p = fixture::small_params(0, 0, 5);
  p.noise_sigma_lateral = 0.0;
  const auto ds = bb::generate_lane_change_tracks(p, 200, 0).dataset;
  std::vector<bb::RequestAnchor> anchors;
  for (const auto & [id, tr] : ds.tracks) {
    anchors.push_back({static_cast<std::int64_t>(anchors.size()), id, tr.first_time() + 3.0});
  }
  const auto set = cv_predictions(ds, anchors, 50.0);
  const std::vector<double> horizons{1, 2, 3, 4, 5};
  const auto exact = bb::rmse_by_horizon(set, ds, horizons);

  auto shifted = set;
  for (auto & [key, inst] : shifted.instances) {
    inst.modes[0].points.bottomRows(bb::kPredictionSteps).rowwise() += Eigen::RowVector2d(0.6, 0.8);
  }
  const auto offset = bb::rmse_by_horizon(shifted, ds, horizons);
  double worst_exact = 0.0;
  double worst_offset = 0.0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    worst_exact = std::max(worst_exact, exact.rmse[i]);
    worst_offset = std::max(worst_offset, std::abs(offset.rmse[i] - 1.0));
  }
  const bool complete = exact.instances == 200 && exact.excluded == 0;
  return verdict(complete && worst_exact <= 1e-9 && worst_offset <= 1e-9,
    "max rmse " + fmt(worst_exact) + " m, offset max |rmse-1| " + fmt(worst_offset) + " m over 200 tracks x 5 horizons");
}

Outcome safety_oracle()
{
  const bb::AnalysisConfig config;
  int checks = 0;
  int mismatches = 0;
  std::int64_t unsafe_seen = 0;
  auto compare = [&](const bb::TrajectorySource & source, const std::vector<bb::SafetyInstance> & inst,
                   const bb::Dataset & ds) {
    const auto got = bb::count_unsafe(source, inst, ds, config);
    ++checks;
    mismatches += got == oracle::brute_force_unsafe(source, inst, ds, config) ? 0 : 1;
    unsafe_seen += got.total(false).unsafe + got.total(true).unsafe;
    return got;
  };

  for (const std::uint64_t seed : {31u, 32u, 33u}) {
    const auto out = bb::generate_dataset(fixture::small_params(120, 120, seed));
    const auto nat = bb::analyze_naturalistic(out.dataset, config);
    std::vector<bb::SafetyInstance> inst;
    std::vector<bb::RequestAnchor> anchors;
    for (const auto & a : nat.anchors) {
      inst.push_back({a.anchor.vehicle_id, a.anchor.anchor_t, a.scenario});
      anchors.push_back(a.anchor);
    }
    // Every vehicle as ego once per second as well.
    std::vector<bb::SafetyInstance> dense;
    for (const auto & [id, tr] : out.dataset.tracks) {
      for (std::size_t i = 0; i < tr.states.size(); i += 10) {
        dense.push_back({id, tr.states[i].t, bb::Scenario::highway});
      }
    }
    const bb::NaturalisticSource natural(out.dataset);
    compare(natural, inst, out.dataset);
    compare(natural, dense, out.dataset);
    const auto cv = cv_predictions(out.dataset, anchors, config.neighbor_radius);
    compare(bb::PredictedSource(cv, out.dataset.site), inst, out.dataset);
    const auto shifted = fixture::truth_predictions(out.dataset, nat.anchors, {0.5, 1.0});
    compare(bb::PredictedSource(shifted, out.dataset.site), inst, out.dataset);
  }

  bool margin_ok = true;
  for (const auto & [gap, expected] : {std::pair{0.59, 1}, std::pair{0.61, 0}}) {
    const auto ds = fixture::near_margin_dataset(gap);
    const std::vector<bb::SafetyInstance> inst{{1, 2.0, bb::Scenario::highway}, {2, 2.0, bb::Scenario::highway}};
    const auto got = compare(bb::NaturalisticSource(ds), inst, ds);
    margin_ok = margin_ok && got.total(false) == bb::SafetyCell{2, 2 * expected};
  }
  return verdict(mismatches == 0 && margin_ok && unsafe_seen > 0,
    std::to_string(checks - mismatches) + "/" + std::to_string(checks) + " recounts match, " +
      std::to_string(unsafe_seen) + " unsafe interactions; gap 0.59/0.61 m " + (margin_ok ? "unsafe/safe" : "WRONG"));
}

Outcome lane_change_detector()
{
  bb::SynthParams p = fixture::small_params(0, 0, 77);
  p.noise_sigma_lateral = 0.2;
  const auto out = bb::generate_lane_change_tracks(p, 1000, 500);
  const bb::AnalysisConfig config;
  std::map<bb::VehicleId, const bb::LaneChangeLabel *> labels;
  for (const auto & l : out.lane_changes) {
    labels[l.vehicle_id] = &l;
  }
  int false_positives = 0;
  int recalled = 0;
  for (const auto & [id, tr] : out.dataset.tracks) {
    const auto found = bb::detect_lane_changes(tr, out.dataset.site, config.lc_dwell, out.dataset.sample_hz);
    const auto it = labels.find(id);
    if (it == labels.end()) {
      false_positives += found.empty() ? 0 : 1;
      continue;
    }
    const auto & l = *it->second;
    if (found.size() == 1 && found[0].from_lane == l.from_lane && found[0].to_lane == l.to_lane &&
      std::abs(found[0].t_lc - l.t_cross) <= 1.5)
    {
      ++recalled;
    }
  }
  return verdict(false_positives == 0 && recalled == 500,
    std::to_string(false_positives) + " false positives on 1000 lane-keeping tracks; recall " +
      std::to_string(recalled) + "/500");
}

bool same_curve(const bb::BinnedCurve & a, const bb::BinnedCurve & b, double & worst)
{
  if (a.counts != b.counts || a.masked != b.masked || a.values.size() != b.values.size()) {
    return false;
  }
  if (a.values.size() > 0) {
    worst = std::max(worst, (a.values - b.values).cwiseAbs().maxCoeff());
  }
  return true;
}

Outcome source_symmetry()
{
  const auto out = bb::generate_dataset(fixture::small_params(300, 300, 41));
  const bb::AnalysisConfig config;
  const auto nat = bb::analyze_naturalistic(out.dataset, config);
  const std::vector<bb::PredictionSet> sets{
    round_trip(fixture::truth_predictions(out.dataset, nat.anchors), out.dataset)};
  const auto report = bb::evaluate(out.dataset, config, sets);
  const auto & a = report.sources.at(0);
  const auto & b = report.sources.at(1);

  bool counts_equal = a.pass_first.size() == b.pass_first.size() && a.courtesy.size() == b.courtesy.size() &&
                      a.highway_lc.size() == b.highway_lc.size();
  double worst = 0.0;
  int compared = 0;
  for (const auto & [tau, r] : a.pass_first) {
    const auto & o = b.pass_first.at(tau);
    counts_equal = counts_equal && same_curve(r.curve, o.curve, worst) && r.resolved == o.resolved &&
                   r.undetermined == o.undetermined;
    ++compared;
  }
  for (const auto & [tau, r] : a.courtesy) {
    const auto & o = b.courtesy.at(tau);
    counts_equal = counts_equal && r.table == o.table && r.shoulder_exits == o.shoulder_exits;
    worst = std::max(worst, std::abs(r.p_value - o.p_value));
    ++compared;
  }
  for (const auto & [tau, r] : a.highway_lc) {
    const auto & o = b.highway_lc.at(tau);
    counts_equal =
      counts_equal && same_curve(r.curve, o.curve, worst) && r.lane_changes == o.lane_changes && r.missing == o.missing;
    ++compared;
  }
  const auto & sa = *report.safety.at(0).local;
  const auto & sb = *report.safety.at(1).local;
  counts_equal = counts_equal && sa == sb;
  ++compared;
  return verdict(counts_equal && worst < 1e-12,
    std::to_string(compared) + " metric groups, counts " + (counts_equal ? "identical" : "DIFFER") +
      ", max proportion diff " + fmt(worst));
}

Outcome evaluate_determinism()
{
  const fs::path dir = fs::temp_directory_path() / ("bb_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto run = [&](std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = bb::cli::run(args, out, err);
    if (code != 0) {
      throw std::runtime_error(err.str());
    }
    return out.str();
  };
  std::string a;
  std::string b;
  try {
    const auto d = [&](const char * name) { return (dir / name).string(); };
    run({"synth", "--out", d("ds"), "--seed", "8"});
    run({"requests", "--dataset", d("ds"), "--out", d("req.csv")});
    run({"predict-cv", "--requests", d("req.csv"), "--out", d("cv.csv"), "--source", "cv"});
    a = run({"evaluate", "--dataset", d("ds"), "--predictions", d("cv.csv"), "--out", d("a")});
    b = run({"--threads", "1", "evaluate", "--dataset", d("ds"), "--predictions", d("cv.csv"), "--out", d("b")});
  } catch (const std::exception & e) {
    fs::remove_all(dir);
    return {Verdict::fail, e.what()};
  }
  fs::remove_all(dir);
  auto digest = [](const std::string & s) {
    const auto pos = s.find("report_digest=");
    return pos == std::string::npos ? std::string() : s.substr(pos + 14, 64);
  };
  return verdict(!digest(a).empty() && digest(a) == digest(b), "report_digest " + digest(a));
}

Outcome ngsim_reference()
{
  const char * env = std::getenv("BB_NGSIM_DIR");
  if (env == nullptr || *env == '\0') {
    return {Verdict::skip, "BB_NGSIM_DIR not set"};
  }
  const bb::AnalysisConfig config;
  struct SiteTotals
  {
    std::int64_t merges{0};
    std::int64_t faster{0};
    bb::Table2x2 courtesy{};
    int files{0};
  };
  std::map<std::string, SiteTotals> totals;
  for (const auto & entry : fs::directory_iterator(env)) {
    std::string name = entry.path().filename().string();
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.path().extension() != ".csv") {
      continue;
    }
    const std::string site = name.rfind("us101", 0) == 0 ? "us101" : (name.rfind("i80", 0) == 0 ? "i80" : "");
    if (site.empty()) {
      continue;
    }
    // Recording periods reuse vehicle ids, so each file is analysed on its own.
    const auto ds = bb::parse_ngsim_csv(entry.path(), bb::load_site(site));
    const auto report = bb::evaluate(ds, config, {});
    auto & t = totals[site];
    t.merges += report.merge_events;
    t.faster += report.faster_lane_changes;
    const auto & table = report.sources.at(0).courtesy.at(5.0).table;
    t.courtesy = {t.courtesy.a + table.a, t.courtesy.b + table.b, t.courtesy.c + table.c, t.courtesy.d + table.d};
    ++t.files;
  }
  if (totals.size() != 2) {
    return {Verdict::fail, "expected us101*.csv and i80*.csv files in " + std::string(env)};
  }
  auto within = [](double got, double want, double tol) { return std::abs(got - want) <= tol * want; };
  const auto & us = totals["us101"];
  const auto & i80 = totals["i80"];
  const double p = bb::fisher_exact_two_sided(us.courtesy);
  const bool ok = within(static_cast<double>(us.merges), 111, 0.10) && within(static_cast<double>(i80.merges), 147, 0.10) &&
                  within(static_cast<double>(us.faster), 1180, 0.15) &&
                  within(static_cast<double>(i80.faster), 1635, 0.15) && p >= 0.01 && p <= 0.10;
  return verdict(ok, "merges us101=" + std::to_string(us.merges) + " i80=" + std::to_string(i80.merges) +
                       "; faster-lane changes us101=" + std::to_string(us.faster) + " i80=" + std::to_string(i80.faster) +
                       "; us101 courtesy p=" + fmt(p));
}

}  // namespace

int main()
{
  const std::pair<const char *, std::function<Outcome()>> criteria[] = {
    {"fisher exact test vs enumeration oracle", fisher_oracle},
    {"synthetic pass-first recovery", passfirst_recovery},
    {"courtesy lane-change significance", courtesy_significance},
    {"constant-velocity rmse zero case", baseline_rmse},
    {"safety count vs brute force", safety_oracle},
    {"lane-change detector", lane_change_detector},
    {"source symmetry", source_symmetry},
    {"evaluate determinism", evaluate_determinism},
    {"NGSIM reference counts", ngsim_reference},
  };
  bool failed = false;
  int n = 0;
  for (const auto & [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception & e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const char * tag = o.verdict == Verdict::pass ? "PASS" : (o.verdict == Verdict::skip ? "SKIP" : "FAIL");
    failed = failed || o.verdict == Verdict::fail;
    std::cout << tag << ' ' << n << ' ' << name << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
