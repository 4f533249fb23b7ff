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

#include "vibe/geometry.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace vibe {

enum class TrajectoryKind { rotation, linear_path, waypoint_list };

/// Vehicle spinning in place. Yaw advances clockwise at a constant rate.
struct RotationParams {
    Vec2 position{0.0, 0.0};
    double start_yaw = 0.0;          // rad
    double angular_speed_deg_s = 1.0;
    double arc_deg = 180.0;
};

/// Constant-speed drive along a straight road with the body (and radio)
/// turned `boresight_offset_deg` from the direction of travel.
struct LinearPathParams {
    Vec2 start{0.0, 0.0};
    double road_heading = 0.5 * kPi;  // rad, direction of travel (default east)
    double path_length_m = 80.0;
    double speed_mps = 2.2352;
    double boresight_offset_deg = -90.0;
};

struct Waypoint {
    double t = 0.0;
    Vec2 position{0.0, 0.0};
    double yaw = 0.0;  // rad
};

class Trajectory {
public:
    /// Duration is arc / speed. A zero-speed rotation needs an explicit
    /// duration and a zero arc.
    static Trajectory rotation(const RotationParams& p, double duration_s = -1.0);
    /// Duration is length / speed unless given explicitly.
    static Trajectory linear_path(const LinearPathParams& p, double duration_s = -1.0);
    /// Poses are interpolated linearly; yaw follows the shorter arc. The first
    /// waypoint must sit at t = 0.
    static Trajectory waypoints(std::vector<Waypoint> points);

    static Trajectory waypoints_from_stream(std::istream& in);
    static Trajectory waypoints_from_file(const std::string& path);

    TrajectoryKind kind() const;
    double duration() const { return duration_; }
    const auto& params() const { return params_; }

    /// Throws OutOfRange outside [0, duration].
    Pose pose_at(double t) const;
    Vec2 velocity_at(double t) const;
    /// rad/s, clockwise positive.
    double yaw_rate_at(double t) const;

private:
    using Params = std::variant<RotationParams, LinearPathParams, std::vector<Waypoint>>;
    Trajectory(Params p, double duration);
    void check_time(double t) const;
    std::size_t segment(double t) const;

    Params params_;
    double duration_;
};

/// Magnitude of the rate of change (deg/s) of the BS bearing relative to the
/// vehicle body.
double angular_rate_at(const Trajectory& traj, double t, const Vec2& bs_position);

/// Perpendicular standoff that makes a straight pass at `speed_mps` peak at
/// `peak_rate_deg_s` at closest approach (rate = v / d).
double standoff_for_peak_rate(double speed_mps, double peak_rate_deg_s);

inline constexpr double kMetersPerSecondPerMph = 0.44704;

}  // namespace vibe
