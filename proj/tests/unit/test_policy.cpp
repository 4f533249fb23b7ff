// SPDX-License-Identifier: Apache-2.0
//
// Copyright (C) 2026 The vibe-beam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "scripted_port.hpp"

#include "vibe/errors.hpp"
#include "vibe/geometry.hpp"
#include "vibe/policy.hpp"

#include <doctest.h>

#include <cmath>

using namespace vibe;
using vibe::test::ScriptedPort;
using vibe::test::ue_profile;

namespace {
Beambook book(std::size_t n) { return make_uniform_beambook(n, deg2rad(-45.0), deg2rad(45.0), UlaConfig{16, 0.5}); }

// Only UE beam `good` clears the threshold (10 dB vs -10 dB elsewhere).
std::vector<double> single_peak(std::size_t n, BeamIndex good)
{
    std::vector<double> s(n, -10.0);
    s.at(good) = 10.0;
    return s;
}
}  // namespace

TEST_CASE("offsets round half away from zero")
{
    CHECK(round_offset(1.5) == 2);
    CHECK(round_offset(-1.5) == -2);
    CHECK(round_offset(1.4) == 1);
    CHECK(round_offset(-0.4) == 0);
}

TEST_CASE("session history keeps a FIFO window")
{
    SessionMemory m(3);
    for (int v : {1, 2, 3, 4})
        m.append(v);
    CHECK(m.size() == 3);
    CHECK(m.history().front() == 2);
    CHECK(m.mean() == doctest::Approx(3.0));
    m.clear();
    CHECK(m.empty());
    CHECK(m.mean() == 0.0);
    CHECK_THROWS_AS(SessionMemory(0), ConfigError);
}

TEST_CASE("accepted prediction costs one measurement on the partner pair")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 20)));
    SessionMemory mem;
    const auto d = vibe_ma_select(BeamIndex{20}, 0.0, mem, port);
    CHECK(d.path == DecisionPath::accepted_prediction);
    CHECK(d.n_beams == 1);
    CHECK(d.k_ue == 20);
    CHECK(d.k_bs == 43);
    CHECK(port.count() == 1);
    CHECK(mem.empty());
    REQUIRE(mem.last_pair);
    CHECK(*mem.last_pair == BeamPair{20, 43});
}

TEST_CASE("refinement alternates sides and finds b_pred - 2 at the fifth measurement")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 18)));
    SessionMemory mem;
    const auto d = vibe_ma_select(BeamIndex{20}, 0.0, mem, port);
    CHECK(d.path == DecisionPath::refined);
    CHECK(d.k_ue == 18);
    CHECK(d.n_beams == 5);
    CHECK(port.count() == 5);
    const std::vector<BeamIndex> order{20, 21, 19, 22, 18};
    REQUIRE(port.log.size() == order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(port.log[i].first == order[i]);
        CHECK(port.log[i].second == 63 - order[i]);
    }
    REQUIRE(mem.size() == 1);
    CHECK(mem.history().back() == -2);
}

TEST_CASE("delta_max of one probes only the immediate neighbours")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 21)));
    SessionMemory mem;
    const auto d = vibe_ma_select(BeamIndex{20}, 0.0, mem, port, VibeParams{1, 8});
    CHECK(d.path == DecisionPath::refined);
    CHECK(d.k_ue == 21);
    CHECK(d.n_beams == 2);
    CHECK(mem.history().back() == 1);

    ScriptedPort far(b, b, ue_profile(single_peak(64, 23)));
    SessionMemory mem2;
    const auto miss = vibe_ma_select(BeamIndex{20}, 0.0, mem2, far, VibeParams{1, 8});
    CHECK(miss.path == DecisionPath::best_effort);
    CHECK(miss.n_beams == 3);
    CHECK_FALSE(miss.met_threshold);
}

TEST_CASE("history mean adjusts the prediction before refining")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 22)));
    SessionMemory mem;
    mem.append(2);
    mem.append(2);
    const auto d = vibe_ma_select(BeamIndex{20}, 0.0, mem, port);
    CHECK(d.path == DecisionPath::accepted_adjusted);
    CHECK(d.k_ue == 22);
    CHECK(d.n_beams == 2);
    CHECK(mem.size() == 2);  // adjusted success adds nothing

    // adjusted beam misses: refinement is centred on it
    ScriptedPort port2(b, b, ue_profile(single_peak(64, 23)));
    const auto d2 = vibe_ma_select(BeamIndex{20}, 0.0, mem, port2);
    CHECK(d2.path == DecisionPath::refined);
    CHECK(d2.n_beams == 3);
    CHECK(port2.log[1].first == 22);
    CHECK(port2.log[2].first == 23);
    CHECK(mem.history().back() == 1);
}

TEST_CASE("adjusted beam is clamped to the book")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 63)));
    SessionMemory mem;
    mem.append(5);
    const auto d = vibe_ma_select(BeamIndex{61}, 0.0, mem, port);
    CHECK(d.path == DecisionPath::accepted_adjusted);
    CHECK(d.k_ue == 63);
}

TEST_CASE("refinement near the edge skips off-book candidates")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(std::vector<double>(64, -10.0)));
    SessionMemory mem;
    const auto d = vibe_ma_select(BeamIndex{1}, 0.0, mem, port);
    CHECK(d.path == DecisionPath::best_effort);
    // b_pred, then +1, -1, +2, +3, +4, +5 (-2..-5 fall off the book)
    CHECK(d.n_beams == 7);
    CHECK(port.count() == 7);
    CHECK(mem.empty());
}

TEST_CASE("a decision never measures more than 2 + 2 delta_max beams")
{
    const Beambook b = book(64);
    for (BeamIndex pred = 0; pred < 64; pred += 7) {
        ScriptedPort port(b, b, ue_profile(std::vector<double>(64, -10.0)));
        SessionMemory mem;
        mem.append(3);
        const auto d = vibe_ma_select(pred, 0.0, mem, port);
        CHECK(d.n_beams <= 12);
        CHECK(d.n_beams == port.count());
    }
}

TEST_CASE("best effort returns the strongest beam measured in the decision")
{
    const Beambook b = book(64);
    std::vector<double> s(64, -20.0);
    s[20] = -3.0;  // the prediction itself is the strongest
    s[22] = -5.0;
    ScriptedPort port(b, b, ue_profile(s));
    SessionMemory mem;
    const auto d = vibe_ma_select(BeamIndex{20}, 0.0, mem, port);
    CHECK(d.path == DecisionPath::best_effort);
    CHECK(d.k_ue == 20);
    CHECK(d.snr_db == -3.0);
    CHECK(d.n_beams == 11);
    CHECK(*mem.last_pair == BeamPair{20, 43});
}

TEST_CASE("missed detection holds the previous pair and refines from it")
{
    const Beambook b = book(64);
    std::vector<double> s = single_peak(64, 30);
    ScriptedPort port(b, b, ue_profile(s));
    SessionMemory mem;
    mem.last_pair = BeamPair{30, 33};
    const auto held = vibe_ma_select(std::nullopt, 0.0, mem, port);
    CHECK(held.path == DecisionPath::held);
    CHECK(held.n_beams == 1);
    CHECK(held.k_ue == 30);

    ScriptedPort moved(b, b, ue_profile(single_peak(64, 31)));
    const auto d = vibe_ma_select(std::nullopt, 0.0, mem, moved);
    CHECK(d.path == DecisionPath::refined);
    CHECK(d.k_ue == 31);
    CHECK(d.n_beams == 2);
}

TEST_CASE("missed detection without a previous pair sweeps")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 40)), -5.0);
    SessionMemory mem;
    const auto d = vibe_ma_select(std::nullopt, 0.0, mem, port);
    CHECK(d.path == DecisionPath::fallback_sweep);
    CHECK(d.n_beams == 8 + 64);
    CHECK(port.count() == 72);
    REQUIRE(mem.last_pair);
}

TEST_CASE("camera-only measures only the predicted pair")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 10)));
    auto p = make_policy(PolicyParams{PolicyKind::camera_only});
    const auto d = p->select(PolicyInput{BeamIndex{12}, 0.0, 0.0}, port);
    CHECK(d.path == DecisionPath::camera_only);
    CHECK(d.n_beams == 1);
    CHECK_FALSE(d.met_threshold);
    const auto h = p->select(PolicyInput{std::nullopt, 0.0, 0.0}, port);
    CHECK(h.path == DecisionPath::held);
    CHECK(h.k_ue == 12);
    CHECK(port.count() == 2);
}

TEST_CASE("exhaustive measures every pair and breaks ties low")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, [](BeamIndex u, BeamIndex k) { return (u == 5 || u == 9) && k == 7 ? 3.0 : 0.0; });
    const auto d = exhaustive_oracle(port, 1.0);
    CHECK(d.n_beams == 4096);
    CHECK(port.count() == 4096);
    CHECK(d.k_ue == 5);
    CHECK(d.k_bs == 7);
    CHECK(d.met_threshold);
}

TEST_CASE("hierarchical sweep: sectors then one sector pair")
{
    const Beambook b = book(64);
    ScriptedPort port(b, b, [](BeamIndex u, BeamIndex k) { return u == 17 && k == 46 ? 8.0 : -1.0; });
    const auto d = nr_hierarchical_select(port, 8, 0.0);
    CHECK(d.n_beams == 72);
    CHECK(port.count() == 72);
    CHECK(port.weight_calls == 8);
    CHECK(port.log.size() == 64);
    CHECK(d.path == DecisionPath::hierarchical);
    // every sector scores alike here, so the first sector wins
    CHECK(port.log.front() == std::pair<BeamIndex, BeamIndex>{0, 56});

    CHECK_THROWS_AS(nr_hierarchical_select(port, 7, 0.0), ConfigError);
    const Beambook small = book(8);
    ScriptedPort p2(small, small, [](BeamIndex, BeamIndex) { return 0.0; });
    CHECK(nr_hierarchical_select(p2, 2, 0.0).n_beams == 2 + 16);
}

TEST_CASE("sector beam has the expected subarray and unit norm")
{
    const Beambook b = book(64);
    const CVec w = sector_beam(b, 0, 8);
    CHECK(w.size() == 16);
    CHECK(w.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(sector_beam(b, 60, 8), OutOfRange);
    // main lobe sits inside the sector
    const double center = 0.5 * (b.angle(0) + b.angle(7));
    const CVec a = steering_vector(center, b.ula());
    const CVec away = steering_vector(b.angle(40), b.ula());
    CHECK(std::norm(w.dot(a)) > 10.0 * std::norm(w.dot(away)));
}

TEST_CASE("MLP correction rounds the regressor output")
{
    const Beambook b = book(64);
    MlpModel model(MlpShape{OffsetFeatures::kDim, 4, 4}, 0.0);
    // output = final bias
    model.parameters()(model.parameters().size() - 1) = 1.4;
    model.set_trained(true);
    ScriptedPort port(b, b, ue_profile(single_peak(64, 21)));
    SessionMemory mem;
    const auto d = vibe_mlp_select(BeamIndex{20}, 0.0, model, FeatureVector::Zero(5), mem, port);
    CHECK(d.path == DecisionPath::accepted_adjusted);
    CHECK(d.k_ue == 21);
    CHECK(d.n_beams == 2);

    MlpModel untrained(MlpShape{5, 4, 4}, 0.0);
    CHECK_THROWS_AS(vibe_mlp_select(BeamIndex{20}, 0.0, untrained, FeatureVector::Zero(5), mem, port),
                    ModelNotReady);
    PolicyParams pp{PolicyKind::vibe_mlp};
    CHECK_THROWS_AS(make_policy(pp), ModelNotReady);
    auto wrong = std::make_shared<MlpModel>(MlpShape{3, 4, 4}, 0.0);
    wrong->set_trained(true);
    pp.model = wrong;
    CHECK_THROWS_AS(make_policy(pp), ShapeError);
}

TEST_CASE("offset features")
{
    OffsetFeatures f;
    FeatureVector x = f.make(0, 64, 5.0);
    CHECK(x(0) == -1.0);
    CHECK(x(1) == 0.0);
    CHECK(x(4) == 0.5);
    f.record(1);
    f.record(-2);
    f.record(3);
    f.record(4);
    x = f.make(63, 64, 0.0);
    CHECK(x(0) == 1.0);
    CHECK(x(1) == 4.0);
    CHECK(x(2) == 3.0);
    CHECK(x(3) == -2.0);
    CHECK(OffsetFeatures::names().size() == OffsetFeatures::kDim);
}

TEST_CASE("policy names round-trip")
{
    for (auto k : {PolicyKind::vibe_ma, PolicyKind::vibe_mlp, PolicyKind::camera_only, PolicyKind::nr_hier,
                   PolicyKind::exhaustive})
        CHECK(parse_policy(to_string(k)) == k);
    CHECK_THROWS_AS(parse_policy("greedy"), ConfigError);
    PolicyParams p;
    p.delta_max = 0;
    CHECK_THROWS_AS(make_policy(p), ConfigError);
    const Beambook b = book(8);
    ScriptedPort port(b, b, ue_profile(std::vector<double>(8, 0.0)));
    SessionMemory mem;
    CHECK_THROWS_AS(local_beam_refinement(3, 0.0, port, 0, mem), ConfigError);
}

TEST_CASE("measuring outside the book throws and does not count")
{
    const Beambook b = book(8);
    ScriptedPort port(b, b, [](BeamIndex, BeamIndex) { return 0.0; });
    CHECK_THROWS_AS(port.measure(8, 0), OutOfRange);
    CHECK(port.count() == 0);
}
