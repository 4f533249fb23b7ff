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
#include "vibe/mlp.hpp"

#include <cstddef>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vibe {

/// Pilot-measurement capability shared by every policy. Each call to
/// measure() or measure_weights() increments count() by exactly one.
class MeasurementPort {
public:
    MeasurementPort(const Beambook& ue_book, const Beambook& bs_book);
    virtual ~MeasurementPort() = default;
    MeasurementPort(const MeasurementPort&) = delete;
    MeasurementPort& operator=(const MeasurementPort&) = delete;

    /// SNR (dB) of the beam pair (k_ue, k_bs).
    double measure(BeamIndex k_ue, BeamIndex k_bs);
    /// SNR (dB) with arbitrary unit-norm weights, e.g. sector beams.
    double measure_weights(const CVec& w_ue, const CVec& w_bs);

    std::size_t count() const { return count_; }
    const Beambook& ue_book() const { return *ue_book_; }
    const Beambook& bs_book() const { return *bs_book_; }
    /// Opposite-azimuth BS partner of a UE beam.
    BeamIndex partner(BeamIndex k_ue) const { return partner_.at(k_ue); }

protected:
    virtual double do_measure(BeamIndex k_ue, BeamIndex k_bs) = 0;
    virtual double do_measure_weights(const CVec& w_ue, const CVec& w_bs) = 0;

private:
    const Beambook* ue_book_;
    const Beambook* bs_book_;
    std::vector<BeamIndex> partner_;
    std::size_t count_ = 0;
};

struct BeamPair {
    BeamIndex k_ue = 0;
    BeamIndex k_bs = 0;
    bool operator==(const BeamPair&) const = default;
};

/// Offset history and the last decision, carried between decisions.
class SessionMemory {
public:
    explicit SessionMemory(std::size_t window = 5);

    /// Appends a signed beam offset, evicting the oldest beyond the window.
    void append(int offset);
    bool empty() const { return hist_.empty(); }
    std::size_t size() const { return hist_.size(); }
    std::size_t window() const { return window_; }
    double mean() const;
    const std::deque<int>& history() const { return hist_; }

    std::optional<BeamPair> last_pair;

    void clear();

private:
    std::deque<int> hist_;
    std::size_t window_;
};

/// How a decision was reached; lets tests account for every branch.
enum class DecisionPath {
    accepted_prediction,  // predicted beam met the threshold
    accepted_adjusted,    // history- or model-adjusted beam met the threshold
    refined,              // local refinement found a beam meeting the threshold
    best_effort,          // nothing met the threshold; strongest measured beam returned
    held,                 // no detection; previous pair re-measured
    fallback_sweep,       // no detection and no previous pair; hierarchical sweep
    camera_only,
    exhaustive,
    hierarchical,
};

std::string_view to_string(DecisionPath path);

struct PolicyDecision {
    BeamIndex k_ue = 0;
    BeamIndex k_bs = 0;
    double snr_db = 0.0;
    std::size_t n_beams = 0;
    bool met_threshold = false;
    DecisionPath path = DecisionPath::best_effort;
};

/// Rounds half away from zero.
int round_offset(double offset);

/// Alternating search b_c+1, b_c-1, b_c+2, b_c-2, ... up to +-delta_max along
/// the UE beam index, each UE beam paired with its opposite-azimuth BS beam.
/// Returns the first candidate meeting the threshold and appends its signed
/// offset to the history; otherwise returns the strongest candidate with
/// met_threshold = false and leaves the history untouched. Candidates off the
/// beambook are skipped without a measurement. n_beams counts only the probes
/// made here; if none were possible the decision has n_beams = 0.
PolicyDecision local_beam_refinement(BeamIndex b_c, double gamma_th_db, MeasurementPort& port, std::size_t delta_max,
                                     SessionMemory& memory);

struct VibeParams {
    std::size_t delta_max = 5;
    std::size_t nr_sectors = 8;  // for the no-detection fallback
};

/// Camera-primed selection with offset tracking. A missing prediction re-uses
/// the previous pair when there is one and otherwise runs the hierarchical
/// sweep. The returned beam is never weaker than the best one measured.
PolicyDecision vibe_ma_select(std::optional<BeamIndex> b_pred, double gamma_th_db, SessionMemory& memory,
                              MeasurementPort& port, const VibeParams& params = {});

/// Feature layout shared by training data and runtime inference:
/// [normalized b_pred, last three realized offsets (newest first, zero
/// padded), bearing rate / 10 deg/s].
class OffsetFeatures {
public:
    static constexpr std::size_t kDim = 5;
    static std::vector<std::string> names();

    FeatureVector make(BeamIndex b_pred, std::size_t book_size, double angular_rate_deg_s) const;
    void record(int realized_offset);
    void clear() { recent_.clear(); }

private:
    std::deque<int> recent_;
};

/// Like vibe_ma_select, but the correction after a failed prediction comes
/// from the regressor instead of the history mean. Throws ModelNotReady for an
/// untrained model.
PolicyDecision vibe_mlp_select(std::optional<BeamIndex> b_pred, double gamma_th_db, const MlpModel& model,
                               const FeatureVector& features, SessionMemory& memory, MeasurementPort& port,
                               const VibeParams& params = {});

/// Measures every pair; ties go to the lexicographically lowest (k_ue, k_bs).
PolicyDecision exhaustive_oracle(MeasurementPort& port, double gamma_th_db = -std::numeric_limits<double>::infinity());

/// Two-stage sweep: n_sectors wide sector-beam pairs, then every narrow pair
/// inside the winning sector at both ends.
PolicyDecision nr_hierarchical_select(MeasurementPort& port, std::size_t n_sectors, double gamma_th_db);

/// Wide beam covering beams [first, first + count) of `book`, formed by a
/// subarray whose main lobe roughly spans the sector.
CVec sector_beam(const Beambook& book, BeamIndex first, std::size_t count);

enum class PolicyKind { vibe_ma, vibe_mlp, camera_only, nr_hier, exhaustive };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);

struct PolicyParams {
    PolicyKind kind = PolicyKind::vibe_ma;
    std::size_t delta_max = 5;
    std::size_t history_window = 5;
    std::size_t nr_sectors = 8;
    std::shared_ptr<const MlpModel> model;
};

struct PolicyInput {
    std::optional<BeamIndex> b_pred;
    double gamma_th_db = 0.0;
    double angular_rate_deg_s = 0.0;
};

/// Stateful policy used by the simulation loop.
class BeamPolicy {
public:
    virtual ~BeamPolicy() = default;
    virtual PolicyDecision select(const PolicyInput& input, MeasurementPort& port) = 0;
    virtual PolicyKind kind() const = 0;
};

std::unique_ptr<BeamPolicy> make_policy(const PolicyParams& params);

}  // namespace vibe
