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

#include "vibe/mobility.hpp"

#include "vibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vibe {

namespace {
template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

Vec2 heading_unit(double heading) { return Vec2(std::sin(heading), std::cos(heading)); }
}  // namespace

Trajectory::Trajectory(Params p, double duration) : params_(std::move(p)), duration_(duration)
{
    if (!(duration_ > 0.0))
        throw ConfigError("trajectory duration must be positive");
}

Trajectory Trajectory::rotation(const RotationParams& p, double duration_s)
{
    if (!(p.angular_speed_deg_s >= 0.0))
        throw ConfigError("rotation speed must be non-negative");
    if (!(p.arc_deg >= 0.0))
        throw ConfigError("rotation arc must be non-negative");
    if (p.angular_speed_deg_s == 0.0) {
        if (p.arc_deg != 0.0)
            throw ConfigError("a zero-speed rotation cannot cover a non-zero arc");
        if (!(duration_s > 0.0))
            throw ConfigError("a zero-speed rotation needs an explicit duration");
        return Trajectory(p, duration_s);
    }
    const double natural = p.arc_deg / p.angular_speed_deg_s;
    if (duration_s > 0.0 && std::abs(duration_s - natural) > 1e-9 * std::max(1.0, natural))
        throw ConfigError("rotation duration must equal arc / speed");
    return Trajectory(p, natural);
}

Trajectory Trajectory::linear_path(const LinearPathParams& p, double duration_s)
{
    if (!(p.speed_mps >= 0.0))
        throw ConfigError("path speed must be non-negative");
    if (!(p.path_length_m >= 0.0))
        throw ConfigError("path length must be non-negative");
    if (duration_s > 0.0) {
        if (p.speed_mps * duration_s > p.path_length_m * (1.0 + 1e-12))
            throw ConfigError("path duration runs past the end of the road");
        return Trajectory(p, duration_s);
    }
    if (p.speed_mps == 0.0)
        throw ConfigError("a stationary path needs an explicit duration");
    return Trajectory(p, p.path_length_m / p.speed_mps);
}

Trajectory Trajectory::waypoints(std::vector<Waypoint> points)
{
    if (points.size() < 2)
        throw ConfigError("a waypoint trajectory needs at least two points");
    if (points.front().t != 0.0)
        throw ConfigError("the first waypoint must be at t = 0");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].t > points[i - 1].t))
            throw ConfigError("waypoint times must be strictly increasing");
    const double duration = points.back().t;
    return Trajectory(std::move(points), duration);
}

Trajectory Trajectory::waypoints_from_stream(std::istream& in)
{
    std::vector<Waypoint> pts;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || line.compare(first, 6, "time_s") == 0)
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        Waypoint w;
        double x = 0, y = 0, yaw_deg = 0;
        if (!(fields >> w.t >> x >> y >> yaw_deg))
            throw ConfigError("waypoint table line " + std::to_string(line_no) + ": expected 4 fields");
        w.position = Vec2(x, y);
        w.yaw = wrap_angle(deg2rad(yaw_deg));
        pts.push_back(w);
    }
    return waypoints(std::move(pts));
}

Trajectory Trajectory::waypoints_from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open waypoint table '" + path + "'");
    return waypoints_from_stream(in);
}

TrajectoryKind Trajectory::kind() const
{
    return std::visit(overloaded{[](const RotationParams&) { return TrajectoryKind::rotation; },
                                 [](const LinearPathParams&) { return TrajectoryKind::linear_path; },
                                 [](const std::vector<Waypoint>&) { return TrajectoryKind::waypoint_list; }},
                      params_);
}

void Trajectory::check_time(double t) const
{
    if (!(t >= 0.0 && t <= duration_))
        throw OutOfRange("time " + std::to_string(t) + " s outside trajectory [0, " + std::to_string(duration_) +
                         "]");
}

std::size_t Trajectory::segment(double t) const
{
    const auto& pts = std::get<std::vector<Waypoint>>(params_);
    const auto it = std::upper_bound(pts.begin(), pts.end(), t, [](double v, const Waypoint& w) { return v < w.t; });
    const auto idx = static_cast<std::size_t>(it - pts.begin());
    return std::clamp<std::size_t>(idx, 1, pts.size() - 1) - 1;
}

Pose Trajectory::pose_at(double t) const
{
    check_time(t);
    return std::visit(
        overloaded{
            [&](const RotationParams& p) { return Pose(p.position, p.start_yaw + deg2rad(p.angular_speed_deg_s) * t); },
            [&](const LinearPathParams& p) {
                return Pose(p.start + heading_unit(p.road_heading) * (p.speed_mps * t),
                            p.road_heading + deg2rad(p.boresight_offset_deg));
            },
            [&](const std::vector<Waypoint>& pts) {
                const std::size_t i = segment(t);
                const Waypoint& a = pts[i];
                const Waypoint& b = pts[i + 1];
                const double s = (t - a.t) / (b.t - a.t);
                return Pose(a.position + (b.position - a.position) * s, a.yaw + wrap_angle(b.yaw - a.yaw) * s);
            }},
        params_);
}

Vec2 Trajectory::velocity_at(double t) const
{
    check_time(t);
    return std::visit(overloaded{[](const RotationParams&) { return Vec2(0.0, 0.0); },
                                 [](const LinearPathParams& p) { return Vec2(heading_unit(p.road_heading) * p.speed_mps); },
                                 [&](const std::vector<Waypoint>& pts) {
                                     const std::size_t i = segment(t);
                                     return Vec2((pts[i + 1].position - pts[i].position) / (pts[i + 1].t - pts[i].t));
                                 }},
                      params_);
}

double Trajectory::yaw_rate_at(double t) const
{
    check_time(t);
    return std::visit(overloaded{[](const RotationParams& p) { return deg2rad(p.angular_speed_deg_s); },
                                 [](const LinearPathParams&) { return 0.0; },
                                 [&](const std::vector<Waypoint>& pts) {
                                     const std::size_t i = segment(t);
                                     return wrap_angle(pts[i + 1].yaw - pts[i].yaw) / (pts[i + 1].t - pts[i].t);
                                 }},
                      params_);
}

double angular_rate_at(const Trajectory& traj, double t, const Vec2& bs_position)
{
    const Pose pose = traj.pose_at(t);
    const Vec2 r = bs_position - pose.position;
    const double r2 = r.squaredNorm();
    if (r2 == 0.0)
        throw DegenerateGeometry("vehicle coincides with the BS");
    const Vec2 rdot = -traj.velocity_at(t);
    // d/dt atan2(rx, ry)
    const double bearing_rate = (r.y() * rdot.x() - r.x() * rdot.y()) / r2;
    return rad2deg(std::abs(bearing_rate - traj.yaw_rate_at(t)));
}

double standoff_for_peak_rate(double speed_mps, double peak_rate_deg_s)
{
    if (!(peak_rate_deg_s > 0.0))
        throw ConfigError("peak angular rate must be positive");
    return speed_mps / deg2rad(peak_rate_deg_s);
}

}  // namespace vibe
