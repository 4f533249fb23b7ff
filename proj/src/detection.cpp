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

#include "vibe/detection.hpp"

#include "vibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vibe {

std::string_view to_string(DetectionLabel label)
{
    switch (label) {
    case DetectionLabel::radio: return "radio";
    case DetectionLabel::small_cell: return "small_cell";
    case DetectionLabel::streetlight: return "streetlight";
    case DetectionLabel::other: return "other";
    }
    return "other";
}

DetectionLabel parse_label(std::string_view text)
{
    if (text == "radio")
        return DetectionLabel::radio;
    if (text == "small_cell")
        return DetectionLabel::small_cell;
    if (text == "streetlight")
        return DetectionLabel::streetlight;
    if (text == "other")
        return DetectionLabel::other;
    throw ConfigError("unknown detection label '" + std::string(text) + "'");
}

void DetectorConfig::validate() const
{
    intrinsics.validate();
    if (!(max_angular_error >= 0.0))
        throw ConfigError("detector max angular error must be non-negative");
    if (!(pixel_noise_std_px >= 0.0))
        throw ConfigError("detector pixel noise must be non-negative");
    if (!(miss_probability >= 0.0 && miss_probability <= 1.0))
        throw ConfigError("detector miss probability must lie in [0, 1]");
}

namespace {

double clip_to_frame(double x, const CameraIntrinsics& c)
{
    const double last = std::nextafter(static_cast<double>(c.image_width_px), 0.0);
    return std::clamp(x, 0.0, last);
}

double project_clipped(double theta, const CameraIntrinsics& c)
{
    const double lim = std::nextafter(0.5 * kPi, 0.0);
    return clip_to_frame(ccs_angle_to_pixel(std::clamp(theta, -lim, lim), c), c);
}

}  // namespace

std::optional<Detection> detect(const Pose& ue_pose, const Vec2& bs_position, double camera_yaw_in_mcs,
                                const DetectorConfig& config, Rng& rng)
{
    const auto& cam = config.intrinsics;
    const double theta = wrap_angle(los_angle_wcs(ue_pose, bs_position) - ue_pose.yaw - camera_yaw_in_mcs);
    if (std::abs(theta) > cam.fov_half_angle())
        return std::nullopt;

    // Draw every variate even on a miss so the stream stays aligned across
    // configurations that differ only in miss probability.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u_miss = unit(rng);
    const double u_err = unit(rng);
    const double u_conf = unit(rng);
    const double jitter = config.pixel_noise_std_px > 0.0
                              ? std::normal_distribution<double>(0.0, config.pixel_noise_std_px)(rng)
                              : 0.0;
    if (u_miss < config.miss_probability)
        return std::nullopt;

    const double delta = config.max_angular_error;
    const double eps = delta * (2.0 * u_err - 1.0);
    double x = project_clipped(theta + eps, cam) + jitter;
    x = clip_to_frame(x, cam);

    const double err = pixel_to_ccs_angle(x, cam) - theta;
    if (err > delta)
        x = project_clipped(theta + delta, cam);
    else if (err < -delta)
        x = project_clipped(theta - delta, cam);

    Detection d;
    d.x_px = x;
    d.y_px = config.nominal_y_px;
    d.label = DetectionLabel::radio;
    d.confidence = 0.5 + 0.5 * u_conf;
    return d;
}

SyntheticDetector::SyntheticDetector(DetectorConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed)
{
    config_.validate();
}

std::optional<Detection> SyntheticDetector::observe(const FrameContext& frame)
{
    return detect(frame.ue_pose, frame.bs_position, frame.mounts.camera_yaw_in_mcs, config_, rng_);
}

ReplayDetector::ReplayDetector(std::vector<Row> rows, CameraIntrinsics intrinsics, double max_age_s)
    : rows_(std::move(rows)), intrinsics_(intrinsics), max_age_s_(max_age_s)
{
    intrinsics_.validate();
    if (!(max_age_s_ >= 0.0))
        throw ConfigError("replay max age must be non-negative");
    std::stable_sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.time_s < b.time_s; });
}

ReplayDetector ReplayDetector::from_stream(std::istream& in, CameraIntrinsics intrinsics, double max_age_s)
{
    std::vector<Row> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        if (line.compare(first, 6, "time_s") == 0)
            continue;  // header
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        Row r;
        std::string label;
        if (!(fields >> r.time_s >> r.detection.x_px >> r.detection.y_px >> label >> r.detection.confidence))
            throw ConfigError("replay table line " + std::to_string(line_no) + ": expected 5 fields");
        r.detection.label = parse_label(label);
        if (!(r.detection.confidence >= 0.0 && r.detection.confidence <= 1.0))
            throw ConfigError("replay table line " + std::to_string(line_no) + ": confidence outside [0, 1]");
        if (!(r.detection.x_px >= 0.0 && r.detection.x_px < intrinsics.image_width_px))
            throw ConfigError("replay table line " + std::to_string(line_no) + ": x_px outside the image");
        rows.push_back(r);
    }
    return ReplayDetector(std::move(rows), intrinsics, max_age_s);
}

ReplayDetector ReplayDetector::from_file(const std::string& path, CameraIntrinsics intrinsics, double max_age_s)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open replay table '" + path + "'");
    return from_stream(in, intrinsics, max_age_s);
}

std::optional<Detection> ReplayDetector::observe(const FrameContext& frame)
{
    const auto it = std::upper_bound(rows_.begin(), rows_.end(), frame.t,
                                     [](double t, const Row& r) { return t < r.time_s; });
    if (it == rows_.begin())
        return std::nullopt;
    const Row& row = *(it - 1);
    if (frame.t - row.time_s > max_age_s_)
        return std::nullopt;
    return row.detection;
}

}  // namespace vibe
