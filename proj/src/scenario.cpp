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

#include "vibe/scenario.hpp"

#include "vibe/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace vibe {

namespace {

std::string where(const std::string& source, const YAML::Node& node)
{
    const YAML::Mark m = node.Mark();
    if (m.line < 0)
        return source + " (override)";
    return source + ":" + std::to_string(m.line + 1);
}

class Section {
public:
    Section(YAML::Node node, std::string path, const std::string& source)
        : node_(std::move(node)), path_(std::move(path)), source_(source)
    {
        present_ = node_.IsDefined() && !node_.IsNull();
        if (present_ && !node_.IsMap())
            throw ConfigError(where(source_, node_) + ": '" + path_ + "' must be a mapping");
    }

    bool has(const std::string& key)
    {
        seen_.insert(key);
        if (!present_)
            return false;
        const YAML::Node v = get(key);
        return v.IsDefined() && !v.IsNull();
    }

    YAML::Node raw(const std::string& key)
    {
        seen_.insert(key);
        return present_ ? get(key) : YAML::Node(YAML::NodeType::Undefined);
    }

    Section section(const std::string& key) { return Section(raw(key), qualified(key), source_); }

    double number(const std::string& key, double fallback)
    {
        if (!has(key))
            return fallback;
        const YAML::Node v = get(key);
        const std::string text = scalar(key, v);
        std::string lower = text;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower == "inf" || lower == "+inf" || lower == ".inf" || lower == "+.inf")
            return std::numeric_limits<double>::infinity();
        if (lower == "-inf" || lower == "-.inf")
            return -std::numeric_limits<double>::infinity();
        try {
            std::size_t used = 0;
            const double d = std::stod(text, &used);
            if (used == text.size())
                return d;
        } catch (const std::logic_error&) {
        }
        throw ConfigError(where(source_, v) + ": '" + qualified(key) + "' expects a number, got '" + text + "'");
    }

    std::uint64_t count(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key))
            return fallback;
        const YAML::Node v = get(key);
        const std::string text = scalar(key, v);
        try {
            std::size_t used = 0;
            const long long n = std::stoll(text, &used);
            if (used == text.size() && n >= 0)
                return static_cast<std::uint64_t>(n);
        } catch (const std::logic_error&) {
        }
        throw ConfigError(where(source_, v) + ": '" + qualified(key) + "' expects a non-negative integer, got '" +
                          text + "'");
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        if (!has(key))
            return fallback;
        return scalar(key, get(key));
    }

    bool flag(const std::string& key, bool fallback)
    {
        if (!has(key))
            return fallback;
        const std::string t = scalar(key, get(key));
        if (t == "true" || t == "yes" || t == "on")
            return true;
        if (t == "false" || t == "no" || t == "off")
            return false;
        throw ConfigError(where(source_, get(key)) + ": '" + qualified(key) + "' expects true or false");
    }

    Vec2 point(const std::string& key, const Vec2& fallback)
    {
        if (!has(key))
            return fallback;
        const YAML::Node v = get(key);
        if (!v.IsSequence() || v.size() != 2)
            throw ConfigError(where(source_, v) + ": '" + qualified(key) + "' expects [x, y]");
        Vec2 p;
        for (std::size_t i = 0; i < 2; ++i) {
            try {
                p(static_cast<Eigen::Index>(i)) = v[i].as<double>();
            } catch (const YAML::Exception&) {
                throw ConfigError(where(source_, v[i]) + ": '" + qualified(key) + "' expects numbers");
            }
        }
        return p;
    }

    template <class E> E choice(const std::string& key, E fallback, std::initializer_list<std::pair<const char*, E>> options)
    {
        if (!has(key))
            return fallback;
        const std::string t = scalar(key, get(key));
        std::string expected;
        for (const auto& [name, value] : options) {
            if (t == name)
                return value;
            expected += expected.empty() ? name : std::string(", ") + name;
        }
        throw ConfigError(where(source_, get(key)) + ": '" + qualified(key) + "' must be one of " + expected +
                          ", got '" + t + "'");
    }

    /// Rejects keys that were never asked for.
    void finish() const
    {
        if (!present_)
            return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key))
                throw ConfigError(where(source_, kv.first) + ": unknown key '" + qualified(key) + "'");
        }
    }

private:
    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    // Const lookup: never inserts the key into the document.
    YAML::Node get(const std::string& key) const { return std::as_const(node_)[key]; }

    std::string scalar(const std::string& key, const YAML::Node& v) const
    {
        if (!v.IsScalar())
            throw ConfigError(where(source_, v) + ": '" + qualified(key) + "' expects a scalar value");
        return v.Scalar();
    }

    YAML::Node node_;
    bool present_ = false;
    std::string path_;
    const std::string& source_;
    std::set<std::string> seen_;
};

void apply_override(YAML::Node& root, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' must look like key.path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string k; std::getline(ss, k, '.');) {
        if (k.empty())
            throw ConfigError("override '" + assignment + "' has an empty key");
        keys.push_back(k);
    }
    YAML::Node cur;
    cur.reset(root);
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        if (!cur[keys[i]] || !cur[keys[i]].IsMap())
            cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
        YAML::Node next = cur[keys[i]];
        cur.reset(next);
    }
    YAML::Node parsed;
    try {
        parsed = YAML::Load(value);
    } catch (const YAML::Exception& e) {
        throw ConfigError("override '" + assignment + "': " + e.what());
    }
    cur[keys.back()] = parsed;
}

BeambookSpec parse_book(Section s)
{
    BeambookSpec b;
    b.count = s.count("count", b.count);
    b.min_deg = s.number("min_deg", b.min_deg);
    b.max_deg = s.number("max_deg", b.max_deg);
    b.ula.n_elements = s.count("elements", b.ula.n_elements);
    b.ula.element_spacing_wavelengths = s.number("spacing_wavelengths", b.ula.element_spacing_wavelengths);
    s.finish();
    return b;
}

std::string resolve(const std::string& base_dir, const std::string& path)
{
    if (path.empty())
        return path;
    const std::filesystem::path p(path);
    return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

TrajectorySpec parse_trajectory(Section s, const std::string& base_dir)
{
    TrajectorySpec spec;
    const std::string kind = s.text("kind", "rotation");
    spec.duration_s = s.number("duration_s", -1.0);
    if (kind == "rotation") {
        RotationParams r;
        r.position = s.point("position_m", r.position);
        r.start_yaw = deg2rad(s.number("start_yaw_deg", rad2deg(r.start_yaw)));
        r.angular_speed_deg_s = s.number("angular_speed_deg_s", r.angular_speed_deg_s);
        r.arc_deg = s.number("arc_deg", r.arc_deg);
        spec.params = r;
    } else if (kind == "linear") {
        LinearPathParams l;
        l.start = s.point("start_m", l.start);
        l.road_heading = deg2rad(s.number("road_heading_deg", rad2deg(l.road_heading)));
        l.path_length_m = s.number("path_length_m", l.path_length_m);
        const bool mph = s.has("speed_mph");
        const bool mps = s.has("speed_mps");
        if (mph && mps)
            throw ConfigError("trajectory: give speed_mph or speed_mps, not both");
        if (mph)
            l.speed_mps = s.number("speed_mph", 0.0) * kMetersPerSecondPerMph;
        else
            l.speed_mps = s.number("speed_mps", l.speed_mps);
        l.boresight_offset_deg = s.number("boresight_offset_deg", l.boresight_offset_deg);
        spec.params = l;
    } else if (kind == "waypoints") {
        const std::string file = s.text("file", "");
        if (file.empty())
            throw ConfigError("trajectory: waypoint trajectories need 'file'");
        spec.params = WaypointFile{resolve(base_dir, file)};
    } else {
        throw ConfigError("trajectory.kind must be rotation, linear or waypoints, got '" + kind + "'");
    }
    s.finish();
    return spec;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::string& source, const std::string& base_dir,
                              const std::vector<std::string>& overrides)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root || root.IsNull())
        root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides)
        apply_override(root, o);

    ScenarioConfig sc;
    Section top(root, "", source);
    sc.name = top.text("name", sc.name);
    sc.seed = top.count("seed", sc.seed);
    sc.calibration_seed = top.count("calibration_seed", sc.seed + 1);
    sc.mode = top.choice<EvalMode>("mode", sc.mode, {{"offline", EvalMode::offline}, {"online", EvalMode::online}});
    sc.decision_period_s = top.number("decision_period_s", sc.decision_period_s);

    {
        Section t = top.section("threshold");
        const bool q = t.has("quantile");
        const bool a = t.has("absolute_db");
        if (q && a)
            throw ConfigError(source + ": threshold takes either quantile or absolute_db");
        if (a)
            sc.threshold = {ThresholdSpec::Kind::absolute_db, t.number("absolute_db", 0.0)};
        else
            sc.threshold = {ThresholdSpec::Kind::quantile, t.number("quantile", sc.threshold.value)};
        t.finish();
    }

    sc.trajectory = parse_trajectory(top.section("trajectory"), base_dir);

    {
        Section b = top.section("bs");
        sc.bs_position = b.point("position_m", sc.bs_position);
        sc.bs_yaw = deg2rad(b.number("yaw_deg", rad2deg(sc.bs_yaw)));
        sc.bs_boresight = b.choice<BsBoresight>("boresight", sc.bs_boresight,
                                                {{"antiparallel", BsBoresight::antiparallel},
                                                 {"fixed", BsBoresight::fixed}});
        b.finish();
    }
    {
        Section m = top.section("mounts");
        sc.mounts.camera_yaw_in_mcs = deg2rad(m.number("camera_yaw_deg", 0.0));
        sc.mounts.radio_yaw_in_mcs = deg2rad(m.number("radio_yaw_deg", 0.0));
        m.finish();
    }
    {
        Section books = top.section("beambook");
        sc.ue_book = parse_book(books.section("ue"));
        sc.bs_book = parse_book(books.section("bs"));
        books.finish();
    }
    {
        Section c = top.section("channel");
        sc.channel.carrier_frequency_hz = c.number("carrier_hz", sc.channel.carrier_frequency_hz);
        sc.channel.tx_power_dbm = c.number("tx_power_dbm", sc.channel.tx_power_dbm);
        sc.channel.noise_power_dbm = c.number("noise_power_dbm", sc.channel.noise_power_dbm);
        sc.channel.rician_k_db = c.number("rician_k_db", sc.channel.rician_k_db);
        c.finish();
    }
    {
        Section d = top.section("detector");
        const double fov_deg = d.number("fov_deg", 60.0);
        const auto width = static_cast<int>(d.count("image_width_px", 640));
        const double pitch = d.number("pixel_pitch_m", 3.0e-6);
        sc.detector.intrinsics = CameraIntrinsics::from_fov(deg2rad(fov_deg), width, pitch);
        sc.detector.max_angular_error = deg2rad(d.number("max_angular_error_deg", 2.0));
        sc.detector.pixel_noise_std_px = d.number("pixel_noise_std_px", 0.0);
        sc.detector.miss_probability = d.number("miss_probability", 0.0);
        sc.detector.nominal_y_px = d.number("nominal_y_px", sc.detector.nominal_y_px);
        sc.replay_file = resolve(base_dir, d.text("replay_file", ""));
        sc.replay_max_age_s = d.number("replay_max_age_s", sc.replay_max_age_s);
        d.finish();
    }
    {
        Section p = top.section("policy");
        sc.policy.kind = parse_policy(p.text("name", std::string(to_string(sc.policy.kind))));
        sc.policy.delta_max = p.count("delta_max", sc.policy.delta_max);
        sc.policy.history_window = p.count("history_window", sc.policy.history_window);
        sc.policy.nr_sectors = p.count("nr_sectors", sc.policy.nr_sectors);
        sc.model_file = resolve(base_dir, p.text("model_file", ""));
        p.finish();
    }
    {
        Section t = top.section("timing");
        sc.timing.image_processing_s = t.number("image_processing_s", sc.timing.image_processing_s);
        sc.timing.beam_config_s = t.number("beam_config_s", sc.timing.beam_config_s);
        sc.timing.stabilize_measure_s = t.number("stabilize_measure_s", sc.timing.stabilize_measure_s);
        sc.timing.fixed_overhead_s = t.number("fixed_overhead_s", sc.timing.fixed_overhead_s);
        sc.timing.stabilize_per_measurement = t.flag("stabilize_per_measurement", true);
        t.finish();
    }
    top.finish();

    try {
        sc.validate();
        sc.ue_book.build();
        sc.bs_book.build();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return sc;
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_scenario(buf.str(), path, dir.empty() ? "." : dir, overrides);
}

}  // namespace vibe
