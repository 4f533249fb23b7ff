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

#include "vibe/policy.hpp"

#include "vibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vibe {

MeasurementPort::MeasurementPort(const Beambook& ue_book, const Beambook& bs_book)
    : ue_book_(&ue_book), bs_book_(&bs_book), partner_(opposite_azimuth_table(ue_book, bs_book))
{
}

double MeasurementPort::measure(BeamIndex k_ue, BeamIndex k_bs)
{
    if (k_ue >= ue_book_->size() || k_bs >= bs_book_->size())
        throw OutOfRange("beam pair outside the beambooks");
    ++count_;
    return do_measure(k_ue, k_bs);
}

double MeasurementPort::measure_weights(const CVec& w_ue, const CVec& w_bs)
{
    ++count_;
    return do_measure_weights(w_ue, w_bs);
}

SessionMemory::SessionMemory(std::size_t window) : window_(window)
{
    if (window_ == 0)
        throw ConfigError("history window must be at least 1");
}

void SessionMemory::append(int offset)
{
    hist_.push_back(offset);
    while (hist_.size() > window_)
        hist_.pop_front();
}

double SessionMemory::mean() const
{
    if (hist_.empty())
        return 0.0;
    return static_cast<double>(std::accumulate(hist_.begin(), hist_.end(), 0L)) / static_cast<double>(hist_.size());
}

void SessionMemory::clear()
{
    hist_.clear();
    last_pair.reset();
}

std::string_view to_string(DecisionPath path)
{
    switch (path) {
    case DecisionPath::accepted_prediction: return "accepted_prediction";
    case DecisionPath::accepted_adjusted: return "accepted_adjusted";
    case DecisionPath::refined: return "refined";
    case DecisionPath::best_effort: return "best_effort";
    case DecisionPath::held: return "held";
    case DecisionPath::fallback_sweep: return "fallback_sweep";
    case DecisionPath::camera_only: return "camera_only";
    case DecisionPath::exhaustive: return "exhaustive";
    case DecisionPath::hierarchical: return "hierarchical";
    }
    return "?";
}

int round_offset(double offset) { return static_cast<int>(std::round(offset)); }

namespace {

BeamIndex clamp_beam(long k, std::size_t size)
{
    return static_cast<BeamIndex>(std::clamp<long>(k, 0, static_cast<long>(size) - 1));
}

PolicyDecision measured(MeasurementPort& port, BeamIndex k_ue, double gamma_th_db, DecisionPath path)
{
    PolicyDecision d;
    d.k_ue = k_ue;
    d.k_bs = port.partner(k_ue);
    d.snr_db = port.measure(d.k_ue, d.k_bs);
    d.n_beams = 1;
    d.met_threshold = d.snr_db >= gamma_th_db;
    d.path = path;
    return d;
}

void keep_stronger(PolicyDecision& best, const PolicyDecision& candidate)
{
    if (candidate.n_beams > 0 && candidate.snr_db > best.snr_db) {
        best.k_ue = candidate.k_ue;
        best.k_bs = candidate.k_bs;
        best.snr_db = candidate.snr_db;
    }
}

// No detection this frame and nothing to refine from: re-measure the last
// pair, or sweep when there is none.
PolicyDecision hold_or_sweep(double gamma_th_db, SessionMemory& memory, MeasurementPort& port, std::size_t nr_sectors)
{
    PolicyDecision d;
    if (memory.last_pair) {
        d.k_ue = memory.last_pair->k_ue;
        d.k_bs = memory.last_pair->k_bs;
        d.snr_db = port.measure(d.k_ue, d.k_bs);
        d.n_beams = 1;
        d.met_threshold = d.snr_db >= gamma_th_db;
        d.path = DecisionPath::held;
    } else {
        d = nr_hierarchical_select(port, nr_sectors, gamma_th_db);
        d.path = DecisionPath::fallback_sweep;
    }
    memory.last_pair = BeamPair{d.k_ue, d.k_bs};
    return d;
}

// Shared tail of both camera-primed policies: b_pred failed and `adjusted`
// (if any) is the corrected beam to try next.
PolicyDecision after_failed_prediction(const PolicyDecision& first, std::optional<BeamIndex> adjusted,
                                       double gamma_th_db, SessionMemory& memory, MeasurementPort& port,
                                       std::size_t delta_max)
{
    PolicyDecision best = first;
    best.path = DecisionPath::best_effort;
    std::size_t n = first.n_beams;
    BeamIndex b_c = first.k_ue;

    if (adjusted) {
        PolicyDecision adj = measured(port, *adjusted, gamma_th_db, DecisionPath::accepted_adjusted);
        n += adj.n_beams;
        if (adj.met_threshold) {
            adj.n_beams = n;
            memory.last_pair = BeamPair{adj.k_ue, adj.k_bs};
            return adj;
        }
        keep_stronger(best, adj);
        b_c = adj.k_ue;
    }

    PolicyDecision refined = local_beam_refinement(b_c, gamma_th_db, port, delta_max, memory);
    n += refined.n_beams;
    if (refined.met_threshold) {
        refined.n_beams = n;
        memory.last_pair = BeamPair{refined.k_ue, refined.k_bs};
        return refined;
    }
    keep_stronger(best, refined);
    best.n_beams = n;
    best.met_threshold = best.snr_db >= gamma_th_db;
    memory.last_pair = BeamPair{best.k_ue, best.k_bs};
    return best;
}

// No detection: the held pair stands in for the prediction. If it no longer
// meets the threshold the search continues from its UE beam.
PolicyDecision held_prediction(double gamma_th_db, SessionMemory& memory, MeasurementPort& port,
                               const VibeParams& params, std::optional<BeamIndex> adjusted_from_history)
{
    PolicyDecision held = hold_or_sweep(gamma_th_db, memory, port, params.nr_sectors);
    if (held.met_threshold || held.path == DecisionPath::fallback_sweep)
        return held;
    return after_failed_prediction(held, adjusted_from_history, gamma_th_db, memory, port, params.delta_max);
}

}  // namespace

PolicyDecision local_beam_refinement(BeamIndex b_c, double gamma_th_db, MeasurementPort& port, std::size_t delta_max,
                                     SessionMemory& memory)
{
    if (delta_max == 0)
        throw ConfigError("delta_max must be at least 1");
    const long size = static_cast<long>(port.ue_book().size());
    PolicyDecision best;
    best.k_ue = b_c;
    best.k_bs = port.partner(b_c);
    best.snr_db = -std::numeric_limits<double>::infinity();
    best.path = DecisionPath::best_effort;

    std::size_t n = 0;
    for (std::size_t delta = 1; delta <= delta_max; ++delta) {
        for (const int dir : {+1, -1}) {
            const long offset = dir * static_cast<long>(delta);
            const long k = static_cast<long>(b_c) + offset;
            if (k < 0 || k >= size)
                continue;
            const auto k_ue = static_cast<BeamIndex>(k);
            const BeamIndex k_bs = port.partner(k_ue);
            const double snr = port.measure(k_ue, k_bs);
            ++n;
            if (snr >= gamma_th_db) {
                memory.append(static_cast<int>(offset));
                return {k_ue, k_bs, snr, n, true, DecisionPath::refined};
            }
            if (snr > best.snr_db) {
                best.k_ue = k_ue;
                best.k_bs = k_bs;
                best.snr_db = snr;
            }
        }
    }
    best.n_beams = n;
    best.met_threshold = false;
    return best;
}

PolicyDecision vibe_ma_select(std::optional<BeamIndex> b_pred, double gamma_th_db, SessionMemory& memory,
                              MeasurementPort& port, const VibeParams& params)
{
    const auto history_adjusted = [&](BeamIndex b) -> std::optional<BeamIndex> {
        if (memory.empty())
            return std::nullopt;
        return clamp_beam(static_cast<long>(b) + round_offset(memory.mean()), port.ue_book().size());
    };
    if (!b_pred) {
        const auto adjusted =
            memory.last_pair ? history_adjusted(memory.last_pair->k_ue) : std::optional<BeamIndex>{};
        return held_prediction(gamma_th_db, memory, port, params, adjusted);
    }

    PolicyDecision first = measured(port, *b_pred, gamma_th_db, DecisionPath::accepted_prediction);
    if (first.met_threshold) {
        memory.last_pair = BeamPair{first.k_ue, first.k_bs};
        return first;
    }
    const std::optional<BeamIndex> adjusted = history_adjusted(*b_pred);
    return after_failed_prediction(first, adjusted, gamma_th_db, memory, port, params.delta_max);
}

std::vector<std::string> OffsetFeatures::names()
{
    return {"b_pred_norm", "offset_1", "offset_2", "offset_3", "rate_deg_s_over_10"};
}

FeatureVector OffsetFeatures::make(BeamIndex b_pred, std::size_t book_size, double angular_rate_deg_s) const
{
    FeatureVector x = FeatureVector::Zero(kDim);
    x(0) = book_size > 1 ? 2.0 * static_cast<double>(b_pred) / static_cast<double>(book_size - 1) - 1.0 : 0.0;
    std::size_t slot = 1;
    for (auto it = recent_.rbegin(); it != recent_.rend() && slot <= 3; ++it, ++slot)
        x(static_cast<Eigen::Index>(slot)) = *it;
    x(4) = angular_rate_deg_s / 10.0;
    return x;
}

void OffsetFeatures::record(int realized_offset)
{
    recent_.push_back(realized_offset);
    while (recent_.size() > 3)
        recent_.pop_front();
}

PolicyDecision vibe_mlp_select(std::optional<BeamIndex> b_pred, double gamma_th_db, const MlpModel& model,
                               const FeatureVector& features, SessionMemory& memory, MeasurementPort& port,
                               const VibeParams& params)
{
    if (!model.trained())
        throw ModelNotReady("the offset regressor has not been trained");
    if (!b_pred)
        return held_prediction(gamma_th_db, memory, port, params, std::nullopt);

    PolicyDecision first = measured(port, *b_pred, gamma_th_db, DecisionPath::accepted_prediction);
    if (first.met_threshold) {
        memory.last_pair = BeamPair{first.k_ue, first.k_bs};
        return first;
    }
    const int offset = round_offset(model.forward(features));
    const BeamIndex adjusted = clamp_beam(static_cast<long>(*b_pred) + offset, port.ue_book().size());
    return after_failed_prediction(first, adjusted, gamma_th_db, memory, port, params.delta_max);
}

PolicyDecision exhaustive_oracle(MeasurementPort& port, double gamma_th_db)
{
    PolicyDecision best;
    best.snr_db = -std::numeric_limits<double>::infinity();
    best.path = DecisionPath::exhaustive;
    for (BeamIndex u = 0; u < port.ue_book().size(); ++u) {
        for (BeamIndex b = 0; b < port.bs_book().size(); ++b) {
            const double snr = port.measure(u, b);
            if (snr > best.snr_db) {
                best.k_ue = u;
                best.k_bs = b;
                best.snr_db = snr;
            }
        }
    }
    best.n_beams = port.ue_book().size() * port.bs_book().size();
    best.met_threshold = best.snr_db >= gamma_th_db;
    return best;
}

CVec sector_beam(const Beambook& book, BeamIndex first, std::size_t count)
{
    if (count == 0 || first + count > book.size())
        throw OutOfRange("sector outside the beambook");
    const double lo = book.angle(first);
    const double hi = book.angle(first + count - 1);
    const double width = hi - lo + book.spacing();
    const double center = 0.5 * (lo + hi);
    const UlaConfig& ula = book.ula();
    // Half-power width of an M-element broadside array is ~0.886 / (M d) rad.
    const double m_exact = 0.886 / (ula.element_spacing_wavelengths * width);
    const auto m = static_cast<std::size_t>(
        std::clamp<long>(std::lround(m_exact), 1, static_cast<long>(ula.n_elements)));
    UlaConfig sub = ula;
    sub.n_elements = m;
    CVec w = CVec::Zero(static_cast<Eigen::Index>(ula.n_elements));
    w.head(static_cast<Eigen::Index>(m)) = steering_vector(center, sub);
    return w;
}

PolicyDecision nr_hierarchical_select(MeasurementPort& port, std::size_t n_sectors, double gamma_th_db)
{
    const Beambook& ue = port.ue_book();
    const Beambook& bs = port.bs_book();
    if (n_sectors == 0 || ue.size() % n_sectors != 0 || bs.size() % n_sectors != 0)
        throw ConfigError("sector count " + std::to_string(n_sectors) + " must divide both beambook sizes (" +
                          std::to_string(ue.size()) + ", " + std::to_string(bs.size()) + ")");
    const std::size_t per_ue = ue.size() / n_sectors;
    const std::size_t per_bs = bs.size() / n_sectors;

    std::size_t best_sector = 0;
    double best_sector_snr = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> bs_sector_of(n_sectors);
    for (std::size_t s = 0; s < n_sectors; ++s) {
        const BeamIndex mid = s * per_ue + per_ue / 2;
        bs_sector_of[s] = port.partner(mid) / per_bs;
        const double snr = port.measure_weights(sector_beam(ue, s * per_ue, per_ue),
                                                sector_beam(bs, bs_sector_of[s] * per_bs, per_bs));
        if (snr > best_sector_snr) {
            best_sector_snr = snr;
            best_sector = s;
        }
    }

    PolicyDecision best;
    best.snr_db = -std::numeric_limits<double>::infinity();
    best.path = DecisionPath::hierarchical;
    const BeamIndex ue0 = best_sector * per_ue;
    const BeamIndex bs0 = bs_sector_of[best_sector] * per_bs;
    for (BeamIndex u = ue0; u < ue0 + per_ue; ++u) {
        for (BeamIndex b = bs0; b < bs0 + per_bs; ++b) {
            const double snr = port.measure(u, b);
            if (snr > best.snr_db) {
                best.k_ue = u;
                best.k_bs = b;
                best.snr_db = snr;
            }
        }
    }
    best.n_beams = n_sectors + per_ue * per_bs;
    best.met_threshold = best.snr_db >= gamma_th_db;
    return best;
}

std::string_view to_string(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::vibe_ma: return "vibe-ma";
    case PolicyKind::vibe_mlp: return "vibe-mlp";
    case PolicyKind::camera_only: return "camera-only";
    case PolicyKind::nr_hier: return "nr-hier";
    case PolicyKind::exhaustive: return "exhaustive";
    }
    return "?";
}

PolicyKind parse_policy(std::string_view name)
{
    for (const auto k : {PolicyKind::vibe_ma, PolicyKind::vibe_mlp, PolicyKind::camera_only, PolicyKind::nr_hier,
                         PolicyKind::exhaustive})
        if (to_string(k) == name)
            return k;
    throw ConfigError("unknown policy '" + std::string(name) +
                      "' (expected vibe-ma, vibe-mlp, camera-only, nr-hier or exhaustive)");
}

namespace {

class MaPolicy final : public BeamPolicy {
public:
    explicit MaPolicy(const PolicyParams& p) : memory_(p.history_window), params_{p.delta_max, p.nr_sectors} {}
    PolicyDecision select(const PolicyInput& in, MeasurementPort& port) override
    {
        return vibe_ma_select(in.b_pred, in.gamma_th_db, memory_, port, params_);
    }
    PolicyKind kind() const override { return PolicyKind::vibe_ma; }

private:
    SessionMemory memory_;
    VibeParams params_;
};

class MlpPolicy final : public BeamPolicy {
public:
    explicit MlpPolicy(const PolicyParams& p)
        : memory_(p.history_window), params_{p.delta_max, p.nr_sectors}, model_(p.model)
    {
        if (!model_ || !model_->trained())
            throw ModelNotReady("vibe-mlp needs a trained model");
        if (static_cast<std::size_t>(model_->shape().n_inputs) != OffsetFeatures::kDim)
            throw ShapeError("model expects " + std::to_string(model_->shape().n_inputs) + " features, policy provides " +
                             std::to_string(OffsetFeatures::kDim));
    }
    PolicyDecision select(const PolicyInput& in, MeasurementPort& port) override
    {
        const std::size_t size = port.ue_book().size();
        const FeatureVector x = in.b_pred ? features_.make(*in.b_pred, size, in.angular_rate_deg_s)
                                          : FeatureVector::Zero(OffsetFeatures::kDim);
        PolicyDecision d = vibe_mlp_select(in.b_pred, in.gamma_th_db, *model_, x, memory_, port, params_);
        if (in.b_pred && d.met_threshold)
            features_.record(static_cast<int>(d.k_ue) - static_cast<int>(*in.b_pred));
        return d;
    }
    PolicyKind kind() const override { return PolicyKind::vibe_mlp; }

private:
    SessionMemory memory_;
    VibeParams params_;
    std::shared_ptr<const MlpModel> model_;
    OffsetFeatures features_;
};

class CameraOnlyPolicy final : public BeamPolicy {
public:
    explicit CameraOnlyPolicy(const PolicyParams& p) : memory_(p.history_window), nr_sectors_(p.nr_sectors) {}
    PolicyDecision select(const PolicyInput& in, MeasurementPort& port) override
    {
        if (!in.b_pred)
            return hold_or_sweep(in.gamma_th_db, memory_, port, nr_sectors_);
        PolicyDecision d = measured(port, *in.b_pred, in.gamma_th_db, DecisionPath::camera_only);
        memory_.last_pair = BeamPair{d.k_ue, d.k_bs};
        return d;
    }
    PolicyKind kind() const override { return PolicyKind::camera_only; }

private:
    SessionMemory memory_;
    std::size_t nr_sectors_;
};

class HierarchicalPolicy final : public BeamPolicy {
public:
    explicit HierarchicalPolicy(const PolicyParams& p) : nr_sectors_(p.nr_sectors) {}
    PolicyDecision select(const PolicyInput& in, MeasurementPort& port) override
    {
        return nr_hierarchical_select(port, nr_sectors_, in.gamma_th_db);
    }
    PolicyKind kind() const override { return PolicyKind::nr_hier; }

private:
    std::size_t nr_sectors_;
};

class ExhaustivePolicy final : public BeamPolicy {
public:
    PolicyDecision select(const PolicyInput& in, MeasurementPort& port) override
    {
        return exhaustive_oracle(port, in.gamma_th_db);
    }
    PolicyKind kind() const override { return PolicyKind::exhaustive; }
};

}  // namespace

std::unique_ptr<BeamPolicy> make_policy(const PolicyParams& params)
{
    if (params.delta_max == 0)
        throw ConfigError("delta_max must be at least 1");
    switch (params.kind) {
    case PolicyKind::vibe_ma: return std::make_unique<MaPolicy>(params);
    case PolicyKind::vibe_mlp: return std::make_unique<MlpPolicy>(params);
    case PolicyKind::camera_only: return std::make_unique<CameraOnlyPolicy>(params);
    case PolicyKind::nr_hier: return std::make_unique<HierarchicalPolicy>(params);
    case PolicyKind::exhaustive: return std::make_unique<ExhaustivePolicy>();
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace vibe
