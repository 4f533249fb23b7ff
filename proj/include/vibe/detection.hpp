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

#pragma once

#include "vibe/channel.hpp"
#include "vibe/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vibe {

enum class DetectionLabel { radio, small_cell, streetlight, other };

std::string_view to_string(DetectionLabel label);
DetectionLabel parse_label(std::string_view text);

/// One bounding-box center reported by the camera stage.
struct Detection {
    double x_px = 0.0;
    double y_px = 0.0;
    DetectionLabel label = DetectionLabel::radio;
    double confidence = 1.0;
};

struct DetectorConfig {
    CameraIntrinsics intrinsics = CameraIntrinsics::from_fov(deg2rad(60.0), 640, 3.0e-6);
    double max_angular_error = deg2rad(2.0);  // hard bound on the recovered-angle error
    double pixel_noise_std_px = 0.0;
    double miss_probability = 0.0;
    double nominal_y_px = 240.0;

    void validate() const;
};

/// Synthetic camera stage. Returns nothing when the BS is outside the
/// horizontal field of view or a miss is drawn. Otherwise the reported center
/// is the projection of the true camera-frame angle plus a uniform angular
/// error in [-max_angular_error, +max_angular_error] and Gaussian pixel
/// jitter, clipped so that the angle recovered from the pixel never deviates
/// from the truth by more than max_angular_error.
std::optional<Detection> detect(const Pose& ue_pose, const Vec2& bs_position, double camera_yaw_in_mcs,
                                const DetectorConfig& config, Rng& rng);

/// What the camera sees at one decision epoch.
struct FrameContext {
    double t = 0.0;
    Pose ue_pose;
    Vec2 bs_position{0.0, 0.0};
    MountConfig mounts;
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual std::optional<Detection> observe(const FrameContext& frame) = 0;
    virtual const CameraIntrinsics& intrinsics() const = 0;
};

class SyntheticDetector final : public Detector {
public:
    SyntheticDetector(DetectorConfig config, std::uint64_t seed);

    std::optional<Detection> observe(const FrameContext& frame) override;
    const CameraIntrinsics& intrinsics() const override { return config_.intrinsics; }

private:
    DetectorConfig config_;
    Rng rng_;
};

/// Replays logged detections from a `time_s,x_px,y_px,label,confidence`
/// table. A frame uses the most recent row no older than `max_age_s`; frames
/// without such a row are misses.
class ReplayDetector final : public Detector {
public:
    struct Row {
        double time_s = 0.0;
        Detection detection;
    };

    ReplayDetector(std::vector<Row> rows, CameraIntrinsics intrinsics, double max_age_s);

    static ReplayDetector from_stream(std::istream& in, CameraIntrinsics intrinsics, double max_age_s);
    static ReplayDetector from_file(const std::string& path, CameraIntrinsics intrinsics, double max_age_s);

    std::optional<Detection> observe(const FrameContext& frame) override;
    const CameraIntrinsics& intrinsics() const override { return intrinsics_; }

private:
    std::vector<Row> rows_;
    CameraIntrinsics intrinsics_;
    double max_age_s_;
};

}  // namespace vibe
