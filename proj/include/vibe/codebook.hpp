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

#include <complex>
#include <cstddef>
#include <vector>

namespace vibe {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Zero-based index into a beambook.
using BeamIndex = std::size_t;

struct UlaConfig {
    std::size_t n_elements = 16;
    double element_spacing_wavelengths = 0.5;

    void validate() const;
};

/// Unit-norm ULA response: element n has phase 2*pi*d*n*sin(theta) and
/// magnitude 1/sqrt(N).
CVec steering_vector(double theta, const UlaConfig& ula);

/// Fixed set of analog beams. `weights[k]` is the steering vector toward
/// `angles[k]`; a link applies it as w^H on receive and w on transmit, which
/// is the matched filter for a channel built from the same steering vectors.
class Beambook {
public:
    Beambook(std::vector<double> angles, std::vector<CVec> weights, double theta_min, double theta_max,
             UlaConfig ula);

    std::size_t size() const { return angles_.size(); }
    double angle(BeamIndex k) const { return angles_.at(k); }
    const CVec& weight(BeamIndex k) const { return weights_.at(k); }
    const std::vector<double>& angles() const { return angles_; }
    double theta_min() const { return theta_min_; }
    double theta_max() const { return theta_max_; }
    const UlaConfig& ula() const { return ula_; }

    /// Mean spacing between adjacent beam angles.
    double spacing() const;

private:
    std::vector<double> angles_;
    std::vector<CVec> weights_;
    double theta_min_;
    double theta_max_;
    UlaConfig ula_;
};

/// `count` beams spaced uniformly over [theta_min, theta_max], both endpoints
/// included.
Beambook make_uniform_beambook(std::size_t count, double theta_min, double theta_max, const UlaConfig& ula);

/// Closest beam by absolute angular distance. Angles outside the span clamp to
/// the nearest endpoint beam; exact ties go to the lower index.
BeamIndex quantize_to_beam(double theta_rcs, const Beambook& book);

/// UE radio-frame angle -> estimated BS radio-frame angle, assuming the two
/// boresights face each other. The UE-frame estimate is the opposite azimuth
/// (theta + pi); in the BS frame that is the mirror image -theta.
double opposite_azimuth_angle(double theta_ue_rcs);

/// BS beam paired with UE beam `k_ue`.
BeamIndex opposite_azimuth_beam(BeamIndex k_ue, const Beambook& ue_book, const Beambook& bs_book);

/// Precomputed opposite-azimuth partner of every UE beam.
std::vector<BeamIndex> opposite_azimuth_table(const Beambook& ue_book, const Beambook& bs_book);

/// Normalized power gain |w^H a(theta)|^2 of beam `k`, in [0, 1].
double beam_gain(const Beambook& book, BeamIndex k, double theta);

}  // namespace vibe
