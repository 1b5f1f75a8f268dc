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

#ifndef BB_TESTS__FIXTURES_HPP_
#define BB_TESTS__FIXTURES_HPP_

#include "bb/core_model.hpp"
#include "bb/ingestion.hpp"
#include "bb/pipeline.hpp"
#include "bb/synth.hpp"

#include <span>

namespace fixture
{

/// Prediction set whose single mode replays the recorded future, shifted by `offset`.
inline bb::PredictionSet truth_predictions(
  const bb::Dataset & ds, std::span<const bb::ScenarioAnchor> anchors, Eigen::Vector2d offset = Eigen::Vector2d::Zero(),
  const std::string & source = "truth")
{
  bb::PredictionSet set;
  set.source = source;
  const std::size_t stride = bb::prediction_stride(ds.sample_hz);
  for (const auto & a : anchors) {
    const auto & tr = *ds.find(a.anchor.vehicle_id);
    const auto idx = tr.index_at(a.anchor.anchor_t, ds.sample_hz);
    if (!idx || *idx + bb::kPredictionSteps * stride >= tr.states.size()) {
      continue;
    }
    bb::PredictionInstance inst;
    inst.request_id = a.anchor.request_id;
    inst.vehicle_id = a.anchor.vehicle_id;
    inst.anchor_t = tr.states[*idx].t;
    bb::PredictionMode m;
    m.points.resize(bb::kPredictionSteps + 1, 2);
    for (int k = 0; k <= bb::kPredictionSteps; ++k) {
      const Eigen::Vector2d p = tr.states[*idx + k * stride].position() + (k == 0 ? Eigen::Vector2d::Zero() : offset);
      m.points.row(k) = p.transpose();
    }
    inst.modes.push_back(m);
    set.instances.emplace(std::make_pair(inst.vehicle_id, bb::time_key(inst.anchor_t)), std::move(inst));
  }
  return set;
}

inline bb::SynthParams small_params(int events = 60, int highway = 60, std::uint64_t seed = 3)
{
  bb::SynthParams p;
  p.n_events = events;
  p.n_highway = highway;
  p.seed = seed;
  return p;
}

/// Leader and follower in one lane at equal speed, `gap` metres bumper to bumper.
inline bb::Dataset near_margin_dataset(double gap)
{
  bb::Dataset ds;
  ds.site = bb::synth_site();
  ds.sample_hz = 10.0;
  for (int v = 0; v < 2; ++v) {
    bb::VehicleTrack tr;
    tr.vehicle_id = v + 1;
    tr.length = 4.5;
    tr.width = 1.8;
    for (int k = 0; k <= 100; ++k) {
      bb::VehicleState s;
      s.t = k / 10.0;
      s.x = 1.5 * 3.6;
      s.y = 10.0 + k + (v == 1 ? 4.5 + gap : 0.0);
      s.lane_id = 2;
      tr.states.push_back(s);
    }
    ds.tracks.emplace(tr.vehicle_id, std::move(tr));
  }
  return ds;
}

}  // namespace fixture

#endif  // BB_TESTS__FIXTURES_HPP_
