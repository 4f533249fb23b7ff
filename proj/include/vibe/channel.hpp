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

#include "vibe/codebook.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace vibe {

using Rng = std::mt19937_64;

/// Link budget and small-scale fading of the LoS uplink.
struct ChannelConfig {
    double carrier_frequency_hz = 60e9;
    double tx_power_dbm = 0.0;
    double noise_power_dbm = -80.0;  // sigma^2 over the signal bandwidth
    /// Power ratio of the LoS component to the diffuse component. +inf
    /// disables fading.
    double rician_k_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 1;

    bool fading_enabled() const { return std::isfinite(rician_k_db); }
    void validate() const;
};

/// Geometric input of one channel realization.
struct LinkGeometry {
    double theta_ue = 0.0;  // UE radio frame
    double theta_bs = 0.0;  // BS radio frame
    double distance_m = 1.0;
};

/// Uplink channel H (N_B x N_U) at one instant.
struct LinkState {
    CMat h_matrix;
    double theta_ue_true = 0.0;
    double theta_bs_true = 0.0;
    cd path_gain{0.0, 0.0};  // free-space amplitude alpha
    double timestamp = 0.0;
};

/// Friis free-space amplitude lambda / (4 pi d) with zero phase.
double free_space_amplitude(double distance_m, double carrier_frequency_hz);

/// Rank-one LoS channel sqrt(N_B N_U) alpha a_B(theta_bs) a_U(theta_ue)^H.
/// With fading enabled the LoS term is scaled by sqrt(K/(K+1)) and an i.i.d.
/// CN(0, |alpha|^2/(K+1)) diffuse matrix is added, so E||H||_F^2 is unchanged.
LinkState realize_channel(const LinkGeometry& geometry, const UlaConfig& bs_ula, const UlaConfig& ue_ula,
                          const ChannelConfig& config, Rng& rng, double timestamp = 0.0);

/// SNR in dB: tx_power + 20 log10 |w_bs^H H w_ue| - noise_power.
double measure_snr(const LinkState& link, const CVec& w_ue, const CVec& w_bs, const ChannelConfig& config);

/// SNR in dB of the matched single-antenna link, tx_power + 20 log10|alpha| - noise_power.
double single_antenna_snr_db(const LinkState& link, const ChannelConfig& config);

/// Convert a received amplitude |w_bs^H H w_ue| to SNR in dB. Zero amplitude
/// maps to a finite floor instead of -inf.
double amplitude_to_snr_db(double amplitude, const ChannelConfig& config);

inline constexpr double kSnrFloorDb = -300.0;

}  // namespace vibe
