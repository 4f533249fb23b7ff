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

#include <Eigen/Core>

#include <numbers>
#include <utility>

namespace vibe {

// All geometry lives in the azimuth plane. World frame: X east, Y north.
// Yaw and bearings are measured from the frame's +Y axis, positive
// clockwise (toward +X).

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

struct Pose {
    Vec2 position{0.0, 0.0};
    double yaw = 0.0;  // radians, kept in (-pi, pi]

    Pose() = default;
    Pose(Vec2 p, double yaw_rad) : position(std::move(p)), yaw(wrap_angle(yaw_rad)) {}
};

/// Pinhole camera, horizontal axis only.
struct CameraIntrinsics {
    double focal_length_m = 3.0e-3;
    double pixel_pitch_m = 3.0e-6;
    double principal_point_px = 320.0;
    int image_width_px = 640;

    /// atan(width * pitch / (2 f)).
    double fov_half_angle() const;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Intrinsics whose full horizontal field of view is `fov_rad`, with the
    /// principal point at the image center.
    static CameraIntrinsics from_fov(double fov_rad, int image_width_px, double pixel_pitch_m);
};

/// Camera and radio yaw with respect to the vehicle body.
struct MountConfig {
    double camera_yaw_in_mcs = 0.0;
    double radio_yaw_in_mcs = 0.0;
};

/// Bearing from `from` to `to` in the world frame. Throws DegenerateGeometry
/// for coincident points.
double bearing(const Vec2& from, const Vec2& to);

/// Bearing of the BS seen from the vehicle, in world coordinates.
double los_angle_wcs(const Pose& ue_pose, const Vec2& bs_position);

/// Pinhole back-projection of a horizontal pixel to a camera-frame angle.
double pixel_to_ccs_angle(double x_center_px, const CameraIntrinsics& intrinsics);

/// Forward projection of a camera-frame angle; the result may lie outside the
/// image.
double ccs_angle_to_pixel(double theta_ccs, const CameraIntrinsics& intrinsics);

/// Camera frame to radio frame: adds the camera mount yaw and removes the radio
/// mount yaw.
double ccs_to_rcs(double theta_ccs, const MountConfig& mounts);

struct RcsAngles {
    double theta_ue = 0.0;  // BS direction in the UE radio frame (clockwise positive)
    double theta_bs = 0.0;  // UE direction in the BS radio frame
};

/// Radio-frame angle of the UE as seen by a BS with boresight yaw `bs_yaw`.
///
/// BS radio-frame angles are measured counter-clockwise from the BS boresight.
/// With facing boresights this makes the two radio-frame angles mirror images,
/// which is the pairing the beam initialization relies on.
double bs_rcs_angle(const Vec2& bs_position, double bs_yaw, const Vec2& ue_position);

/// Ground-truth radio-frame angles at both ends of the link. `ue_pose` is the
/// vehicle pose; the radio sits at the vehicle origin with yaw
/// `mounts.radio_yaw_in_mcs`.
RcsAngles true_rcs_angles(const Pose& ue_pose, const Pose& bs_pose, const MountConfig& mounts);

/// Boresight yaw (world frame) a BS must have to face the UE radio head-on,
/// i.e. anti-parallel to the UE radio boresight.
double antiparallel_bs_yaw(const Pose& ue_pose, const MountConfig& mounts);

}  // namespace vibe
