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
#include "bb/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

namespace
{

const char * kHeader =
  "Vehicle_ID,Frame_ID,Total_Frames,Global_Time,Local_X,Local_Y,Global_X,Global_Y,v_Length,v_Width,v_Class,"
  "v_Vel,v_Acc,Lane_ID,Preceding,Following,Space_Headway,Time_Headway\n";

std::string ngsim_rows(const std::string & header, const std::string & rows)
{
  return header + rows;
}

bb::SiteProfile feet_site()
{
  auto site = bb::synth_site();
  site.raw_unit = bb::RawUnit::feet;
  return site;
}

bb::Dataset parse(const std::string & text, const bb::SiteProfile & site)
{
  std::istringstream in(text);
  return bb::parse_ngsim_csv(in, site, "mem");
}

bb::Dataset linear_dataset(int vehicles, int samples, double hz, bool sequential)
{
  bb::Dataset ds;
  ds.site = bb::synth_site();
  ds.sample_hz = hz;
  for (int v = 0; v < vehicles; ++v) {
    bb::VehicleTrack tr;
    tr.vehicle_id = v + 1;
    tr.length = 4.5;
    tr.width = 1.8;
    const int offset = sequential ? v * samples : 0;
    for (int k = 0; k < samples; ++k) {
      bb::VehicleState s;
      s.t = (offset + k) / hz;
      s.x = 1.8 + 3.6 * (v % 3);
      s.y = 10.0 * v + 20.0 * k / hz;
      s.lane_id = 1 + v % 3;
      tr.states.push_back(s);
    }
    ds.tracks.emplace(tr.vehicle_id, std::move(tr));
  }
  return ds;
}

}  // namespace

TEST_CASE("ngsim: feet converted to meters")
{
  const auto ds = parse(
    ngsim_rows(
      kHeader,
      "1,1,3,1113433136100,6,10,100,200,15,6,2,30,0,1,0,0,0,0\n"
      "1,2,3,1113433136200,6,11,100,201,15,6,2,30,0,1,0,0,0,0\n"
      "1,3,3,1113433136300,6,12,100,202,15,6,2,30,0,1,0,0,0,0\n"),
    feet_site());
  const auto & tr = ds.tracks.at(1);
  REQUIRE(tr.states.size() == 3);
  CHECK(tr.states[0].y == doctest::Approx(3.048).epsilon(1e-15));
  CHECK(tr.states[1].y == doctest::Approx(3.3528).epsilon(1e-15));
  CHECK(tr.states[2].y == doctest::Approx(3.6576).epsilon(1e-15));
  CHECK(tr.states[1].t == doctest::Approx(0.1));
  CHECK(tr.length == doctest::Approx(15 * 0.3048));
  CHECK(*tr.states[0].gx == doctest::Approx(30.48));
  CHECK(ds.time_origin_ms == 1113433136100);
}

TEST_CASE("ngsim: missing column is named")
{
  std::string header = kHeader;
  header.replace(header.find(",Lane_ID"), 8, "");
  CHECK_THROWS_WITH_AS(parse(ngsim_rows(header, ""), feet_site()), doctest::Contains("missing column Lane_ID"),
    bb::DataError);
}

TEST_CASE("ngsim: header match ignores case")
{
  std::string header = kHeader;
  for (auto & ch : header) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  CHECK_NOTHROW(parse(ngsim_rows(header, "1,1,1,1000,6,10,1,1,15,6,2,30,0,1,0,0,0,0\n"), feet_site()));
}

TEST_CASE("ngsim: non-numeric cell reports the row")
{
  CHECK_THROWS_WITH_AS(
    parse(ngsim_rows(kHeader, "1,1,1,1000,6,10,1,1,15,6,2,30,0,1,0,0,0,0\n2,1,1,1000,six,10,1,1,15,6,2,30,0,1,0,0,0,0\n"),
      feet_site()),
    doctest::Contains("row 3"), bb::DataError);
}

TEST_CASE("ngsim: duplicate vehicle time is rejected")
{
  CHECK_THROWS_AS(
    parse(ngsim_rows(kHeader, "1,1,1,1000,6,10,1,1,15,6,2,30,0,1,0,0,0,0\n1,1,1,1000,6,10,1,1,15,6,2,30,0,1,0,0,0,0\n"),
      feet_site()),
    bb::DataError);
}

TEST_CASE("ngsim: write then parse keeps positions")
{
  bb::SynthParams p;
  p.n_events = 3;
  p.n_highway = 3;
  auto ds = bb::generate_dataset(p).dataset;
  ds.site.raw_unit = bb::RawUnit::feet;
  std::stringstream buf;
  bb::write_ngsim_csv(ds, buf);
  const auto back = bb::parse_ngsim_csv(buf, ds.site, "mem");
  REQUIRE(back.tracks.size() == ds.tracks.size());
  for (const auto & [id, tr] : ds.tracks) {
    const auto & o = back.tracks.at(id);
    REQUIRE(o.states.size() == tr.states.size());
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      CHECK(std::abs(o.states[i].x - tr.states[i].x) < 1e-9);
      CHECK(std::abs(o.states[i].y - tr.states[i].y) < 1e-9);
    }
  }
}

TEST_CASE("resample: decimation, identity and bad ratio")
{
  const auto ds = linear_dataset(1, 8, 10.0, false);
  const auto r = bb::resample(ds, 2.5);
  const auto & st = r.tracks.at(1).states;
  REQUIRE(st.size() == 2);
  CHECK(st[0].t == ds.tracks.at(1).states[0].t);
  CHECK(st[1].y == ds.tracks.at(1).states[4].y);
  const auto same = bb::resample(r, 2.5);
  CHECK(same.tracks.at(1).states.size() == 2);
  CHECK_THROWS_WITH_AS(bb::resample(ds, 3.0), "non-integer decimation", bb::DataError);
}

TEST_CASE("resample: uniform spacing at 2.5 Hz")
{
  const auto r = bb::resample(linear_dataset(4, 97, 10.0, false), 2.5);
  for (const auto & [id, tr] : r.tracks) {
    for (std::size_t i = 1; i < tr.states.size(); ++i) {
      CHECK(std::abs(tr.states[i].t - tr.states[i - 1].t - 0.4) < 1e-6);
    }
  }
}

TEST_CASE("split: ratios, determinism and partition")
{
  const auto ds = linear_dataset(100, 10, 10.0, true);
  const auto a = bb::split_dataset(ds, {0.7, 0.1, 0.2}, 0);
  std::array<int, 3> counts{0, 0, 0};
  for (const auto & p : a.pieces) {
    ++counts[static_cast<int>(p.split)];
  }
  CHECK(counts == std::array<int, 3>{70, 10, 20});
  const auto b = bb::split_dataset(ds, {0.7, 0.1, 0.2}, 0);
  CHECK(a.boundaries == b.boundaries);
  CHECK(a.pieces.size() == b.pieces.size());
  CHECK_THROWS_WITH_AS(bb::split_dataset(ds, {0.5, 0.5, 0.5}, 0), "ratios must sum to 1", bb::UsageError);
}

TEST_CASE("split: overlapping tracks are cut and every sample lands once")
{
  const auto ds = linear_dataset(30, 200, 10.0, false);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto a = bb::split_dataset(ds, {0.7, 0.1, 0.2}, seed);
    std::int64_t total = 0;
    for (const auto n : a.samples) {
      total += n;
    }
    CHECK(total == 30 * 200);
    CHECK(std::abs(a.samples[0] / 6000.0 - 0.7) < 0.02);
    CHECK(std::abs(a.samples[1] / 6000.0 - 0.1) < 0.02);
    CHECK(std::abs(a.samples[2] / 6000.0 - 0.2) < 0.02);
    std::stringstream buf;
    bb::write_split(a, buf);
    const auto back = bb::read_split(buf, "mem");
    CHECK(back.order == a.order);
    CHECK(back.pieces.size() == a.pieces.size());
    const auto test = bb::apply_split(ds, back, {bb::Split::test});
    std::size_t n = 0;
    for (const auto & [id, tr] : test.tracks) {
      n += tr.states.size();
    }
    CHECK(static_cast<std::int64_t>(n) == a.samples[2]);
  }
}

TEST_CASE("requests: history boundary, skipping and empty list")
{
  const auto ds = linear_dataset(2, 40, 10.0, false);
  const bb::RequestAnchor exact{0, 1, 2.8};
  const bb::RequestAnchor short_history{1, 1, 2.0};
  std::vector<bb::RequestAnchor> anchors{exact, short_history};
  std::stringstream buf;
  const auto res = bb::write_prediction_requests(ds, anchors, 50.0, {{"config_digest", "x"}}, buf);
  CHECK(res.written == 1);
  CHECK(res.skipped.size() == 1);
  bb::WireHeader header;
  const auto reqs = bb::read_prediction_requests(buf, "mem", &header);
  REQUIRE(reqs.size() == 1);
  CHECK(header.at("config_digest") == "x");
  CHECK(reqs[0].ego.points.rows() == 8);
  CHECK(reqs[0].ego.t.front() == doctest::Approx(0.0));
  REQUIRE(reqs[0].neighbors.size() == 1);
  CHECK(reqs[0].neighbors[0].vehicle_id == 2);

  std::stringstream empty;
  CHECK(bb::write_prediction_requests(ds, {}, 50.0, {}, empty).written == 0);
  CHECK(bb::read_prediction_requests(empty, "mem").empty());
}

namespace
{

std::string prediction_text(const std::string & rows, const std::string & header = "bb-pred v1,frame=local,source=m")
{
  return header + "\nrequest_id,ego_id,anchor_t,mode_index,mode_prob,step,x,y\n" + rows;
}

std::string mode_rows(int steps, double prob, int mode = 0, int vehicle = 1)
{
  std::string out;
  for (int k = 1; k <= steps; ++k) {
    out += "0," + std::to_string(vehicle) + ",3," + std::to_string(mode) + "," + bb::format_double(prob) + "," +
      std::to_string(k) + ",1.8," + std::to_string(60 + 8 * k) + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("predictions: parse, normalise and reject")
{
  const auto ds = linear_dataset(2, 80, 10.0, false);
  {
    std::istringstream in(prediction_text(mode_rows(12, 1.0)));
    const auto set = bb::parse_predictions(in, ds, "mem");
    REQUIRE(set.instances.size() == 1);
    const auto * inst = set.find(1, 3.0);
    REQUIRE(inst != nullptr);
    CHECK(inst->modes[0].probability == 1.0);
    CHECK(inst->modes[0].points.rows() == 13);
    CHECK(set.normalized == 0);
  }
  {
    std::istringstream in(prediction_text(mode_rows(12, 2.0, 0) + mode_rows(12, 2.0, 1)));
    const auto set = bb::parse_predictions(in, ds, "mem");
    const auto * inst = set.find(1, 3.0);
    CHECK(inst->modes[0].probability == 0.5);
    CHECK(inst->modes[1].probability == 0.5);
    CHECK(set.normalized == 1);
  }
  {
    std::istringstream in(prediction_text(mode_rows(10, 1.0)));
    CHECK_THROWS_WITH_AS(bb::parse_predictions(in, ds, "mem"), doctest::Contains("horizon mismatch"), bb::DataError);
  }
  {
    std::istringstream in(prediction_text(mode_rows(12, -1.0)));
    CHECK_THROWS_WITH_AS(bb::parse_predictions(in, ds, "mem"), doctest::Contains("negative mode probability"),
      bb::DataError);
  }
  {
    std::istringstream in(prediction_text(mode_rows(12, 1.0, 0, 99)));
    CHECK_THROWS_WITH_AS(bb::parse_predictions(in, ds, "mem"), doctest::Contains("unknown vehicle_id"), bb::DataError);
  }
}

TEST_CASE("predictions: write then parse")
{
  const auto ds = linear_dataset(1, 80, 10.0, false);
  bb::PredictionInstance inst;
  inst.request_id = 4;
  inst.vehicle_id = 1;
  inst.anchor_t = 3.0;
  bb::PredictionMode m;
  m.points.resize(13, 2);
  for (int k = 0; k <= 12; ++k) {
    m.points.row(k) << 1.8 + 0.01 * k, 60.0 + 8.0 * k + 1.0 / 3.0;
  }
  inst.modes = {m};
  std::stringstream buf;
  bb::write_predictions(std::vector<bb::PredictionInstance>{inst}, {{"frame", "local"}, {"source", "x"}}, buf);
  const auto set = bb::parse_predictions(buf, ds, "mem");
  const auto * got = set.find(1, 3.0);
  REQUIRE(got != nullptr);
  CHECK(got->request_id == 4);
  CHECK(set.source == "x");
  for (int k = 1; k <= 12; ++k) {
    CHECK(got->modes[0].points(k, 0) == m.points(k, 0));
    CHECK(got->modes[0].points(k, 1) == m.points(k, 1));
  }
}

TEST_CASE("frame transform: recovers the synthetic rigid map")
{
  bb::SynthParams p;
  p.n_events = 4;
  p.n_highway = 4;
  const auto ds = bb::generate_dataset(p).dataset;
  const auto tf = bb::fit_frame_transform(ds);
  REQUIRE(tf.has_value());
  for (const auto & [id, tr] : ds.tracks) {
    for (const auto & s : tr.states) {
      const Eigen::Vector2d local = tf->to_local(Eigen::Vector2d(*s.gx, *s.gy));
      CHECK((local - s.position()).norm() < 1e-6);
    }
  }
}
