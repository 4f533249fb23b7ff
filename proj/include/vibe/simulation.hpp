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
#include "vibe/codebook.hpp"
#include "vibe/detection.hpp"
#include "vibe/geometry.hpp"
#include "vibe/mobility.hpp"
#include "vibe/policy.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vibe {

/// Per-decision latency budget. A decision with n measurements costs
///   fixed + image + n * (config + stabilize)
/// or, when stabilization is charged once per decision,
///   fixed + image + stabilize + n * config.
struct TimingModel {
    double image_processing_s = 0.075;
    double beam_config_s = 0.050;
    double stabilize_measure_s = 0.050;
    double fixed_overhead_s = 0.056;
    bool stabilize_per_measurement = true;

    void validate() const;
    double decision_time(std::size_t n_measurements) const;
    /// Offset from decision start at which the k-th (1-based) measurement is taken.
    double measurement_time(std::size_t k) const;
};

struct BeambookSpec {
    std::size_t count = 64;
    double min_deg = -45.0;
    double max_deg = 45.0;
    UlaConfig ula;

    Beambook build() const;
};

struct WaypointFile {
    std::string path;
};

struct TrajectorySpec {
    std::variant<RotationParams, LinearPathParams, WaypointFile> params = RotationParams{};
    double duration_s = -1.0;  // negative: natural duration

    Trajectory build() const;
};

enum class BsBoresight {
    antiparallel,  // BS boresight kept facing opposite to the UE radio boresight
    fixed,         // BS yaw fixed in the world
};

enum class EvalMode { offline, online };

std::string_view to_string(EvalMode mode);

struct ThresholdSpec {
    enum class Kind { absolute_db, quantile };
    Kind kind = Kind::quantile;
    double value = 0.95;
};

struct ScenarioConfig {
    std::string name = "scenario";
    TrajectorySpec trajectory;
    Vec2 bs_position{0.0, 5.0};
    double bs_yaw = kPi;
    BsBoresight bs_boresight = BsBoresight::antiparallel;
    MountConfig mounts;
    BeambookSpec ue_book;
    BeambookSpec bs_book;
    ChannelConfig channel;
    DetectorConfig detector;
    std::string replay_file;  // empty: synthetic detector
    double replay_max_age_s = 0.5;
    PolicyParams policy;
    std::string model_file;  // vibe-mlp weights, loaded when policy.model is unset
    TimingModel timing;
    EvalMode mode = EvalMode::offline;
    double decision_period_s = 0.25;
    ThresholdSpec threshold;
    std::uint64_t seed = 1;
    std::uint64_t calibration_seed = 2;

    void validate() const;
};

struct AlignmentRecord {
    double t = 0.0;
    PolicyKind policy = PolicyKind::vibe_ma;
    PolicyDecision decision;
    double gamma_th_db = 0.0;
    double T_b = 0.0;
    bool outage = false;
    double snr_margin_db = 0.0;  // gamma_th - gamma
};

struct RunResult {
    std::vector<AlignmentRecord> records;
    double gamma_th_db = 0.0;
    std::size_t measurements = 0;  // total over every port used in the run
};

/// Called after each decision with what the policy saw and what it chose.
using DecisionObserver = std::function<void(const PolicyInput&, const PolicyDecision&)>;

/// Type-7 sample quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double p);

/// Best-pair SNR of the exhaustive sweep at every epoch of the trajectory,
/// geometry frozen per epoch, channel drawn from the calibration seed.
std::vector<double> calibration_snrs(const ScenarioConfig& scenario);

/// Threshold met by fraction q of the calibration distribution, i.e. its
/// (1 - q) sample quantile. Throws ConfigError when fewer than two epochs fit
/// the trajectory.
std::vector<double> compute_quantile_thresholds(const ScenarioConfig& scenario, const std::vector<double>& quantiles);

double resolve_threshold(const ScenarioConfig& scenario);

/// Runs the closed loop with the given threshold. When `records_out` is set,
/// the header and each record are written as they are produced.
RunResult run_scenario(const ScenarioConfig& scenario, double gamma_th_db, std::ostream* records_out = nullptr,
                       const DecisionObserver& observer = {});
RunResult run_scenario(const ScenarioConfig& scenario, std::ostream* records_out = nullptr);

struct Summary {
    PolicyKind policy = PolicyKind::vibe_ma;
    double gamma_th_db = 0.0;
    std::size_t n_records = 0;
    double outage_pct = 0.0;
    double mean_T_b_s = 0.0;
    double median_T_b_s = 0.0;
    double mean_n_beams = 0.0;
    std::size_t n_fallback = 0;
};

/// Throws ConfigError for an empty record list.
Summary summarize(const std::vector<AlignmentRecord>& records);

/// Fraction of records with margin <= x at each grid point.
std::vector<double> margin_cdf(const std::vector<AlignmentRecord>& records, const std::vector<double>& grid_db);

/// -30 dB to +30 dB in 0.5 dB steps.
std::vector<double> default_margin_grid();

/// (features, realized offset) pairs from a ViBE-MA run: one sample per
/// decision that had a prediction and met the threshold.
std::vector<OffsetSample> generate_offset_dataset(ScenarioConfig scenario, double gamma_th_db);

// CSV output. Every file starts with a schema comment line.
void write_records_header(std::ostream& out);
void write_record(std::ostream& out, const AlignmentRecord& r);
void write_records_csv(std::ostream& out, const std::vector<AlignmentRecord>& records);
std::vector<AlignmentRecord> read_records_csv(std::istream& in);
void write_summary_header(std::ostream& out);
/// `with_fallback = false` leaves n_fallback empty (unknown for records read
/// back from CSV).
void write_summary_row(std::ostream& out, const Summary& s, bool with_fallback = true);
void write_margin_cdf_header(std::ostream& out);
void write_margin_cdf_rows(std::ostream& out, const std::vector<AlignmentRecord>& records,
                           const std::vector<double>& grid_db);
void write_thresholds_csv(std::ostream& out, const std::vector<double>& quantiles, const std::vector<double>& values);

/// Fixed-point formatting used by every CSV writer.
std::string format_number(double v, int decimals = 6);

}  // namespace vibe
