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

#include "vibe/codebook.hpp"

#include "vibe/errors.hpp"
#include "vibe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vibe {

void UlaConfig::validate() const
{
    if (n_elements < 1)
        throw ConfigError("ULA needs at least one element");
    if (!(element_spacing_wavelengths > 0.0))
        throw ConfigError("ULA element spacing must be positive");
}

CVec steering_vector(double theta, const UlaConfig& ula)
{
    const auto n = static_cast<Eigen::Index>(ula.n_elements);
    const double amp = 1.0 / std::sqrt(static_cast<double>(ula.n_elements));
    const double k = 2.0 * kPi * ula.element_spacing_wavelengths * std::sin(theta);
    CVec a(n);
    for (Eigen::Index i = 0; i < n; ++i)
        a(i) = std::polar(amp, k * static_cast<double>(i));
    return a;
}

Beambook::Beambook(std::vector<double> angles, std::vector<CVec> weights, double theta_min, double theta_max,
                   UlaConfig ula)
    : angles_(std::move(angles)), weights_(std::move(weights)), theta_min_(theta_min), theta_max_(theta_max),
      ula_(ula)
{
    ula_.validate();
    if (angles_.empty())
        throw ConfigError("beambook must contain at least one beam");
    if (angles_.size() != weights_.size())
        throw ShapeError("beambook angle and weight counts differ");
    for (std::size_t k = 0; k < angles_.size(); ++k) {
        if (k > 0 && !(angles_[k] > angles_[k - 1]))
            throw ConfigError("beambook angles must be strictly increasing");
        if (angles_[k] < theta_min_ || angles_[k] > theta_max_)
            throw ConfigError("beambook angle outside [theta_min, theta_max]");
        if (static_cast<std::size_t>(weights_[k].size()) != ula_.n_elements)
            throw ShapeError("beam weight length does not match the array size");
        if (std::abs(weights_[k].norm() - 1.0) > 1e-12)
            throw ConfigError("beam weight " + std::to_string(k) + " is not unit norm");
    }
}

double Beambook::spacing() const
{
    if (angles_.size() < 2)
        return 0.0;
    return (angles_.back() - angles_.front()) / static_cast<double>(angles_.size() - 1);
}

Beambook make_uniform_beambook(std::size_t count, double theta_min, double theta_max, const UlaConfig& ula)
{
    if (count < 2)
        throw ConfigError("a uniform beambook needs at least two beams");
    if (!(theta_min < theta_max))
        throw ConfigError("beambook span must satisfy theta_min < theta_max");
    if (theta_min < -0.5 * kPi || theta_max > 0.5 * kPi)
        throw ConfigError("beambook span must lie within +-90 degrees");

    std::vector<double> angles(count);
    std::vector<CVec> weights;
    weights.reserve(count);
    const double step = (theta_max - theta_min) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) {
        // pin the last angle so rounding cannot push it past theta_max
        angles[k] = (k + 1 == count) ? theta_max : theta_min + step * static_cast<double>(k);
        weights.push_back(steering_vector(angles[k], ula));
    }
    return Beambook(std::move(angles), std::move(weights), theta_min, theta_max, ula);
}

BeamIndex quantize_to_beam(double theta_rcs, const Beambook& book)
{
    const auto& a = book.angles();
    const auto it = std::lower_bound(a.begin(), a.end(), theta_rcs);
    if (it == a.begin())
        return 0;
    if (it == a.end())
        return a.size() - 1;
    const auto hi = static_cast<BeamIndex>(it - a.begin());
    const BeamIndex lo = hi - 1;
    return std::abs(a[lo] - theta_rcs) <= std::abs(a[hi] - theta_rcs) ? lo : hi;
}

double opposite_azimuth_angle(double theta_ue_rcs)
{
    const double opposite = wrap_angle(theta_ue_rcs + kPi);
    // BS boresight is the UE boresight turned by pi, and its frame is
    // counter-clockwise positive.
    return wrap_angle(-wrap_angle(opposite - kPi));
}

BeamIndex opposite_azimuth_beam(BeamIndex k_ue, const Beambook& ue_book, const Beambook& bs_book)
{
    if (k_ue >= ue_book.size())
        throw OutOfRange("UE beam index " + std::to_string(k_ue) + " outside beambook");
    return quantize_to_beam(opposite_azimuth_angle(ue_book.angle(k_ue)), bs_book);
}

std::vector<BeamIndex> opposite_azimuth_table(const Beambook& ue_book, const Beambook& bs_book)
{
    std::vector<BeamIndex> table(ue_book.size());
    for (BeamIndex k = 0; k < ue_book.size(); ++k)
        table[k] = opposite_azimuth_beam(k, ue_book, bs_book);
    return table;
}

double beam_gain(const Beambook& book, BeamIndex k, double theta)
{
    return std::norm(book.weight(k).dot(steering_vector(theta, book.ula())));
}

}  // namespace vibe
