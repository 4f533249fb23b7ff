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

#include "vibe/geometry.hpp"

#include "vibe/errors.hpp"

#include <cmath>
#include <string>

namespace vibe {

double wrap_angle(double rad)
{
    double r = std::remainder(rad, 2.0 * kPi);  // [-pi, pi]
    if (r <= -kPi)
        r += 2.0 * kPi;
    return r;
}

double CameraIntrinsics::fov_half_angle() const
{
    return std::atan(static_cast<double>(image_width_px) * pixel_pitch_m / (2.0 * focal_length_m));
}

void CameraIntrinsics::validate() const
{
    if (!(focal_length_m > 0.0))
        throw ConfigError("camera focal length must be positive");
    if (!(pixel_pitch_m > 0.0))
        throw ConfigError("camera pixel pitch must be positive");
    if (image_width_px < 1)
        throw ConfigError("camera image width must be at least one pixel");
    if (!(principal_point_px >= 0.0 && principal_point_px < image_width_px))
        throw ConfigError("camera principal point must lie inside the image");
}

CameraIntrinsics CameraIntrinsics::from_fov(double fov_rad, int image_width_px, double pixel_pitch_m)
{
    if (!(fov_rad > 0.0 && fov_rad < kPi))
        throw ConfigError("camera field of view must lie in (0, 180) degrees");
    CameraIntrinsics c;
    c.image_width_px = image_width_px;
    c.pixel_pitch_m = pixel_pitch_m;
    c.principal_point_px = 0.5 * image_width_px;
    c.focal_length_m = image_width_px * pixel_pitch_m / (2.0 * std::tan(0.5 * fov_rad));
    c.validate();
    return c;
}

double bearing(const Vec2& from, const Vec2& to)
{
    const Vec2 d = to - from;
    if (d.x() == 0.0 && d.y() == 0.0)
        throw DegenerateGeometry("bearing between coincident positions");
    return wrap_angle(std::atan2(d.x(), d.y()));
}

double los_angle_wcs(const Pose& ue_pose, const Vec2& bs_position)
{
    return bearing(ue_pose.position, bs_position);
}

double pixel_to_ccs_angle(double x_center_px, const CameraIntrinsics& intrinsics)
{
    if (!(x_center_px >= 0.0 && x_center_px < intrinsics.image_width_px))
        throw OutOfFrame("pixel " + std::to_string(x_center_px) + " outside image of width " +
                         std::to_string(intrinsics.image_width_px));
    return std::atan2((x_center_px - intrinsics.principal_point_px) * intrinsics.pixel_pitch_m,
                      intrinsics.focal_length_m);
}

double ccs_angle_to_pixel(double theta_ccs, const CameraIntrinsics& intrinsics)
{
    if (!(std::abs(theta_ccs) < 0.5 * kPi))
        throw BehindCamera("camera-frame angle " + std::to_string(theta_ccs) + " rad has no projection");
    return intrinsics.principal_point_px +
           intrinsics.focal_length_m * std::tan(theta_ccs) / intrinsics.pixel_pitch_m;
}

double ccs_to_rcs(double theta_ccs, const MountConfig& mounts)
{
    return wrap_angle(theta_ccs + mounts.camera_yaw_in_mcs - mounts.radio_yaw_in_mcs);
}

double bs_rcs_angle(const Vec2& bs_position, double bs_yaw, const Vec2& ue_position)
{
    return wrap_angle(-wrap_angle(bearing(bs_position, ue_position) - bs_yaw));
}

RcsAngles true_rcs_angles(const Pose& ue_pose, const Pose& bs_pose, const MountConfig& mounts)
{
    RcsAngles out;
    const double to_bs = bearing(ue_pose.position, bs_pose.position);
    out.theta_ue = wrap_angle(to_bs - ue_pose.yaw - mounts.radio_yaw_in_mcs);
    out.theta_bs = bs_rcs_angle(bs_pose.position, bs_pose.yaw, ue_pose.position);
    return out;
}

double antiparallel_bs_yaw(const Pose& ue_pose, const MountConfig& mounts)
{
    return wrap_angle(ue_pose.yaw + mounts.radio_yaw_in_mcs + kPi);
}

}  // namespace vibe
