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

#include "vibe/channel.hpp"

#include "vibe/errors.hpp"
#include "vibe/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace vibe {

namespace {
constexpr double kSpeedOfLight = 299'792'458.0;
}

void ChannelConfig::validate() const
{
    if (!(carrier_frequency_hz > 0.0))
        throw ConfigError("carrier frequency must be positive");
    if (std::isnan(rician_k_db))
        throw ConfigError("Rician K must be a number or +inf");
    if (!(noise_power_dbm < tx_power_dbm))
        throw ConfigError("noise power must lie below transmit power");
}

double free_space_amplitude(double distance_m, double carrier_frequency_hz)
{
    if (!(distance_m > 0.0))
        throw DegenerateGeometry("link distance must be positive");
    const double lambda = kSpeedOfLight / carrier_frequency_hz;
    return lambda / (4.0 * kPi * distance_m);
}

LinkState realize_channel(const LinkGeometry& geometry, const UlaConfig& bs_ula, const UlaConfig& ue_ula,
                          const ChannelConfig& config, Rng& rng, double timestamp)
{
    LinkState link;
    link.path_gain = cd(free_space_amplitude(geometry.distance_m, config.carrier_frequency_hz), 0.0);
    link.theta_ue_true = geometry.theta_ue;
    link.theta_bs_true = geometry.theta_bs;
    link.timestamp = timestamp;

    const double nb = static_cast<double>(bs_ula.n_elements);
    const double nu = static_cast<double>(ue_ula.n_elements);
    const CVec a_bs = steering_vector(geometry.theta_bs, bs_ula);
    const CVec a_ue = steering_vector(geometry.theta_ue, ue_ula);
    link.h_matrix = (std::sqrt(nb * nu) * link.path_gain) * (a_bs * a_ue.adjoint());

    if (config.fading_enabled()) {
        const double k = std::pow(10.0, config.rician_k_db / 10.0);
        link.h_matrix *= std::sqrt(k / (k + 1.0));
        // each entry CN(0, |alpha|^2/(K+1)): real and imaginary parts share the variance
        const double sigma = std::abs(link.path_gain) * std::sqrt(1.0 / (k + 1.0) / 2.0);
        std::normal_distribution<double> gauss(0.0, sigma);
        for (Eigen::Index c = 0; c < link.h_matrix.cols(); ++c)
            for (Eigen::Index r = 0; r < link.h_matrix.rows(); ++r) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                link.h_matrix(r, c) += cd(re, im);
            }
    }
    return link;
}

double amplitude_to_snr_db(double amplitude, const ChannelConfig& config)
{
    if (!(amplitude > 0.0))
        return kSnrFloorDb;
    return std::max(kSnrFloorDb, config.tx_power_dbm + 20.0 * std::log10(amplitude) - config.noise_power_dbm);
}

double measure_snr(const LinkState& link, const CVec& w_ue, const CVec& w_bs, const ChannelConfig& config)
{
    if (w_ue.size() != link.h_matrix.cols() || w_bs.size() != link.h_matrix.rows())
        throw ShapeError("beam weight dimensions do not match the channel matrix");
    const cd y = w_bs.dot(link.h_matrix * w_ue);
    return amplitude_to_snr_db(std::abs(y), config);
}

double single_antenna_snr_db(const LinkState& link, const ChannelConfig& config)
{
    return amplitude_to_snr_db(std::abs(link.path_gain), config);
}

}  // namespace vibe
