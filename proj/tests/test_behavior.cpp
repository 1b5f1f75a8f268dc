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

#include "bb/pipeline.hpp"
#include "bb/synth.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

namespace
{

bb::MergeEvent event_with(double lead, bool conflict, bool lc)
{
  bb::MergeEvent ev;
  bb::LookbackRecord r;
  r.tau = 5.0;
  r.status = bb::RecordStatus::ok;
  r.lead_time = lead;
  r.conflict = conflict;
  r.highway_lane_change = lc;
  r.pass_order = lead > 0 ? bb::PassOrder::merger_first : bb::PassOrder::highway_first;
  ev.lookbacks.push_back(r);
  return ev;
}

bb::SourceMetrics with_curve(std::vector<double> values)
{
  bb::SourceMetrics m;
  m.source = "x";
  bb::PassFirstResult r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    r.curve.lower.push_back(static_cast<double>(i));
    r.curve.upper.push_back(static_cast<double>(i) + 1);
    r.curve.centers.push_back(static_cast<double>(i) + 0.5);
    r.curve.counts.push_back(20);
    r.curve.masked.push_back(false);
  }
  r.curve.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  m.pass_first.emplace(5.0, r);
  return m;
}

}  // namespace

TEST_CASE("pass-first: step generator gives a step curve")
{
  auto p = fixture::small_params(300, 0);
  p.pass_first_logistic_scale = 0.0;
  const auto out = bb::generate_merge_dataset(p);
  const auto events = bb::extract_merge_events(out.dataset, bb::AnalysisConfig{});
  const auto r = bb::pass_first_curve(events, 5.0, bb::AnalysisConfig{});
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    if (r.curve.masked[i]) {
      continue;
    }
    CHECK(r.curve.values[static_cast<Eigen::Index>(i)] == (r.curve.lower[i] >= 0.0 ? 1.0 : 0.0));
  }
  CHECK(r.undetermined == 0);
}

TEST_CASE("pass-first: no resolvable events is an error")
{
  std::vector<bb::MergeEvent> none;
  CHECK_THROWS_AS(bb::pass_first_curve(none, 5.0, bb::AnalysisConfig{}), bb::DataError);
}

TEST_CASE("pass-first: monotone under a monotone generator")
{
  auto p = fixture::small_params(1200, 0);
  const auto out = bb::generate_merge_dataset(p);
  const auto r = bb::pass_first_curve(bb::extract_merge_events(out.dataset, bb::AnalysisConfig{}), 5.0, {});
  double last = -1.0;
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    if (!r.curve.masked[i]) {
      CHECK(r.curve.values[static_cast<Eigen::Index>(i)] >= last);
      last = r.curve.values[static_cast<Eigen::Index>(i)];
    }
  }
}

TEST_CASE("courtesy: table layout and degenerate conflict row")
{
  std::vector<bb::MergeEvent> events;
  for (int i = 0; i < 30; ++i) {
    events.push_back(event_with(3.0, false, i % 5 == 0));
  }
  auto r = bb::courtesy_lc_table(events, 5.0);
  CHECK(r.table == bb::Table2x2{0, 0, 6, 24});
  CHECK(r.p_value == 1.0);
  events.push_back(event_with(0.2, true, true));
  r = bb::courtesy_lc_table(events, 5.0);
  CHECK(r.table == bb::Table2x2{1, 0, 6, 24});
}

TEST_CASE("highway curve: lane change iff TTC in (0, 3)")
{
  const auto out = bb::generate_highway_dataset(fixture::small_params(0, 600));
  const bb::AnalysisConfig config;
  const auto nat = bb::analyze_naturalistic(out.dataset, config);
  const bb::NaturalisticSource source(out.dataset);
  const auto r = bb::highway_lc_curve(nat.highway, source, 5.0, out.dataset.site, config);
  for (std::size_t i = 0; i < r.curve.size(); ++i) {
    if (r.curve.masked[i]) {
      continue;
    }
    const bool inside = r.curve.lower[i] >= 0.0 && r.curve.upper[i] <= 3.0;
    CHECK(r.curve.values[static_cast<Eigen::Index>(i)] == (inside ? 1.0 : 0.0));
  }
  CHECK(r.missing == 0);
}

TEST_CASE("highway curve: zero threshold means no lane changes")
{
  auto p = fixture::small_params(0, 200);
  p.lc_ttc_threshold = 0.0;
  const auto out = bb::generate_highway_dataset(p);
  const bb::AnalysisConfig config;
  const auto nat = bb::analyze_naturalistic(out.dataset, config);
  const auto r = bb::highway_lc_curve(nat.highway, bb::NaturalisticSource(out.dataset), 5.0, out.dataset.site, config);
  CHECK(r.lane_changes == 0);
  CHECK(bb::count_faster_lane_changes(out.dataset, {}, config) == 0);
}

TEST_CASE("highway anchors without a lead are skipped")
{
  auto out = bb::generate_highway_dataset(fixture::small_params(0, 10));
  for (const auto & label : out.highway) {
    out.dataset.tracks.erase(label.leader_id);
  }
  CHECK(bb::extract_highway_anchors(out.dataset, {}, bb::AnalysisConfig{}).empty());
}

TEST_CASE("rmse: identity, offset and translation")
{
  auto p = fixture::small_params(0, 40);
  p.lc_ttc_threshold = 0.0;
  const auto ds = bb::generate_highway_dataset(p).dataset;
  // Anchors with 5 s of recorded future.
  std::vector<bb::ScenarioAnchor> anchors;
  for (const auto & [id, tr] : ds.tracks) {
    anchors.push_back({{0, id, tr.states[28].t}, bb::Scenario::highway});
  }
  const std::vector<double> horizons{1, 2, 3, 4};
  const auto exact = bb::rmse_by_horizon(fixture::truth_predictions(ds, anchors), ds, horizons);
  for (const double e : exact.rmse) {
    CHECK(e <= 1e-9);
  }
  const auto shifted = bb::rmse_by_horizon(fixture::truth_predictions(ds, anchors, {1.0, 0.0}), ds, horizons);
  for (const double e : shifted.rmse) {
    CHECK(std::abs(e - 1.0) <= 1e-9);
  }

  auto moved = ds;
  const Eigen::Vector2d shift(13.0, -250.0);
  for (auto & [id, tr] : moved.tracks) {
    for (auto & s : tr.states) {
      s.x += shift.x();
      s.y += shift.y();
    }
  }
  auto preds = fixture::truth_predictions(ds, anchors, {0.3, -0.7});
  const auto base = bb::rmse_by_horizon(preds, ds, horizons);
  for (auto & [key, inst] : preds.instances) {
    inst.modes[0].points.rowwise() += shift.transpose();
  }
  const auto after = bb::rmse_by_horizon(preds, moved, horizons);
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    CHECK(after.rmse[i] == doctest::Approx(base.rmse[i]).epsilon(1e-9));
  }
}

TEST_CASE("rmse: empty set is an error")
{
  const auto ds = bb::generate_highway_dataset(fixture::small_params(0, 2)).dataset;
  const std::vector<double> horizons{1};
  CHECK_THROWS_AS(bb::rmse_by_horizon(bb::PredictionSet{}, ds, horizons), bb::DataError);
}

TEST_CASE("rmse: predictions extrapolate past the last step")
{
  bb::PredictionInstance inst;
  bb::PredictionMode m;
  m.points.resize(13, 2);
  for (int k = 0; k <= 12; ++k) {
    m.points.row(k) << 0.0, 8.0 * k;
  }
  inst.modes.push_back(m);
  CHECK(bb::predicted_position(inst, 5.0).y() == doctest::Approx(100.0));
  CHECK(bb::predicted_position(inst, 1.0).y() == doctest::Approx(20.0));
}

TEST_CASE("compare sources: copy, mean and anti-correlated")
{
  const auto ref = with_curve({0.1, 0.3, 0.6, 0.9});
  const std::vector<bb::SourceMetrics> copy{ref, with_curve({0.1, 0.3, 0.6, 0.9})};
  CHECK(*bb::compare_sources(copy)[0].value == doctest::Approx(1.0));
  const std::vector<bb::SourceMetrics> mean{ref, with_curve({0.475, 0.475, 0.475, 0.475})};
  CHECK(*bb::compare_sources(mean)[0].value == doctest::Approx(0.0));
  const std::vector<bb::SourceMetrics> anti{ref, with_curve({0.9, 0.6, 0.3, 0.1})};
  CHECK(*bb::compare_sources(anti)[0].value < 0.0);
}

TEST_CASE("conditions are shared across sources")
{
  const auto out = bb::generate_dataset(fixture::small_params(150, 150));
  const auto nat = bb::analyze_naturalistic(out.dataset, bb::AnalysisConfig{});
  auto preds = fixture::truth_predictions(out.dataset, nat.anchors, {0.0, 3.0});
  const auto report = bb::evaluate(out.dataset, bb::AnalysisConfig{}, std::vector<bb::PredictionSet>{preds});
  REQUIRE(report.sources.size() == 2);
  const auto & a = report.sources[0];
  const auto & b = report.sources[1];
  for (const auto & [tau, r] : a.highway_lc) {
    CHECK(r.curve.counts == b.highway_lc.at(tau).curve.counts);
  }
  for (const auto & [tau, r] : a.courtesy) {
    const auto & t = b.courtesy.at(tau).table;
    CHECK(r.table.a + r.table.b == t.a + t.b);
    CHECK(r.table.c + r.table.d == t.c + t.d);
  }
}
