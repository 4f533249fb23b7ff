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

#include "vibe/simulation.hpp"

#include "vibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

namespace vibe {

void TimingModel::validate() const
{
    if (!(image_processing_s >= 0.0 && beam_config_s >= 0.0 && stabilize_measure_s >= 0.0 && fixed_overhead_s >= 0.0))
        throw ConfigError("timing charges must be non-negative");
}

double TimingModel::decision_time(std::size_t n) const
{
    const auto nd = static_cast<double>(n);
    if (stabilize_per_measurement)
        return fixed_overhead_s + image_processing_s + nd * (beam_config_s + stabilize_measure_s);
    return fixed_overhead_s + image_processing_s + stabilize_measure_s + nd * beam_config_s;
}

double TimingModel::measurement_time(std::size_t k) const { return decision_time(k); }

Beambook BeambookSpec::build() const
{
    return make_uniform_beambook(count, deg2rad(min_deg), deg2rad(max_deg), ula);
}

Trajectory TrajectorySpec::build() const
{
    if (const auto* r = std::get_if<RotationParams>(&params))
        return Trajectory::rotation(*r, duration_s);
    if (const auto* l = std::get_if<LinearPathParams>(&params))
        return Trajectory::linear_path(*l, duration_s);
    return Trajectory::waypoints_from_file(std::get<WaypointFile>(params).path);
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::offline ? "offline" : "online"; }

void ScenarioConfig::validate() const
{
    ue_book.ula.validate();
    bs_book.ula.validate();
    channel.validate();
    detector.validate();
    timing.validate();
    if (!(decision_period_s > 0.0))
        throw ConfigError("decision period must be positive");
    if (mode == EvalMode::online && decision_period_s < timing.decision_time(1))
        throw ConfigError("online decision period is shorter than the minimum decision latency");
    if (threshold.kind == ThresholdSpec::Kind::quantile && !(threshold.value > 0.0 && threshold.value < 1.0))
        throw ConfigError("threshold quantile must lie in (0, 1)");
    if (policy.delta_max == 0)
        throw ConfigError("delta_max must be at least 1");
    if (policy.history_window == 0)
        throw ConfigError("history window must be at least 1");
    if (!(replay_max_age_s >= 0.0))
        throw ConfigError("replay max age must be non-negative");
}

namespace {

enum : std::uint64_t { kChannelStream = 1, kDetectorStream = 2 };

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(splitmix64(seed) ^ stream); }

class World {
public:
    explicit World(const ScenarioConfig& sc)
        : sc_(sc), traj_(sc.trajectory.build()), ue_(sc.ue_book.build()), bs_(sc.bs_book.build())
    {
        sc.validate();
    }

    const Trajectory& trajectory() const { return traj_; }
    const Beambook& ue_book() const { return ue_; }
    const Beambook& bs_book() const { return bs_; }
    const ScenarioConfig& config() const { return sc_; }

    Pose bs_pose(const Pose& ue) const
    {
        if (sc_.bs_boresight == BsBoresight::antiparallel)
            return Pose(sc_.bs_position, antiparallel_bs_yaw(ue, sc_.mounts));
        return Pose(sc_.bs_position, sc_.bs_yaw);
    }

    LinkGeometry geometry_at(double t) const
    {
        const Pose ue = traj_.pose_at(std::min(t, traj_.duration()));
        const RcsAngles a = true_rcs_angles(ue, bs_pose(ue), sc_.mounts);
        return {a.theta_ue, a.theta_bs, (sc_.bs_position - ue.position).norm()};
    }

    LinkState realize(double t, Rng& rng) const
    {
        return realize_channel(geometry_at(t), bs_.ula(), ue_.ula(), sc_.channel, rng, t);
    }

    std::size_t tick_count() const
    {
        return static_cast<std::size_t>(std::floor(traj_.duration() / sc_.decision_period_s + 1e-9)) + 1;
    }
    double tick_time(std::size_t i) const { return static_cast<double>(i) * sc_.decision_period_s; }

private:
    const ScenarioConfig& sc_;
    Trajectory traj_;
    Beambook ue_;
    Beambook bs_;
};

// Frozen link: every measurement sees the same channel.
class OfflinePort final : public MeasurementPort {
public:
    OfflinePort(const World& w, LinkState link) : MeasurementPort(w.ue_book(), w.bs_book()), world_(w), link_(std::move(link))
    {
        CMat w_ue(link_.h_matrix.cols(), static_cast<Eigen::Index>(w.ue_book().size()));
        for (BeamIndex k = 0; k < w.ue_book().size(); ++k)
            w_ue.col(static_cast<Eigen::Index>(k)) = w.ue_book().weight(k);
        hw_ = link_.h_matrix * w_ue;
    }

protected:
    double do_measure(BeamIndex k_ue, BeamIndex k_bs) override
    {
        const cd y = bs_book().weight(k_bs).dot(hw_.col(static_cast<Eigen::Index>(k_ue)));
        return amplitude_to_snr_db(std::abs(y), world_.config().channel);
    }
    double do_measure_weights(const CVec& w_ue, const CVec& w_bs) override
    {
        return measure_snr(link_, w_ue, w_bs, world_.config().channel);
    }

private:
    const World& world_;
    LinkState link_;
    CMat hw_;
};

// Moving link: the k-th measurement of a decision sees the geometry and a
// fresh channel draw at its own point in time.
class OnlinePort final : public MeasurementPort {
public:
    OnlinePort(const World& w, double t0, Rng& rng)
        : MeasurementPort(w.ue_book(), w.bs_book()), world_(w), t0_(t0), rng_(rng)
    {
    }

protected:
    double do_measure(BeamIndex k_ue, BeamIndex k_bs) override
    {
        return measure_snr(current(), ue_book().weight(k_ue), bs_book().weight(k_bs), world_.config().channel);
    }
    double do_measure_weights(const CVec& w_ue, const CVec& w_bs) override
    {
        return measure_snr(current(), w_ue, w_bs, world_.config().channel);
    }

private:
    LinkState current()
    {
        const double t = std::min(t0_ + world_.config().timing.measurement_time(count()), world_.trajectory().duration());
        return world_.realize(t, rng_);
    }

    const World& world_;
    double t0_;
    Rng& rng_;
};

std::unique_ptr<Detector> make_detector(const ScenarioConfig& sc)
{
    if (!sc.replay_file.empty())
        return std::make_unique<ReplayDetector>(
            ReplayDetector::from_file(sc.replay_file, sc.detector.intrinsics, sc.replay_max_age_s));
    return std::make_unique<SyntheticDetector>(sc.detector, stream_seed(sc.seed, kDetectorStream));
}

PolicyParams resolved_policy(const ScenarioConfig& sc)
{
    PolicyParams p = sc.policy;
    if (p.kind == PolicyKind::vibe_mlp && !p.model) {
        if (sc.model_file.empty())
            throw ModelNotReady("vibe-mlp needs a model: set policy.model_file or train one first");
        p.model = std::make_shared<const MlpModel>(MlpModel::load(sc.model_file));
    }
    return p;
}

}  // namespace

double empirical_quantile(std::vector<double> values, double p)
{
    if (values.empty())
        throw ConfigError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> calibration_snrs(const ScenarioConfig& scenario)
{
    const World world(scenario);
    const std::size_t n = world.tick_count();
    if (n < 2)
        throw ConfigError("trajectory of " + std::to_string(world.trajectory().duration()) +
                          " s is too short for two decision epochs");
    Rng rng(stream_seed(scenario.calibration_seed, kChannelStream));
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        OfflinePort port(world, world.realize(world.tick_time(i), rng));
        out.push_back(exhaustive_oracle(port).snr_db);
    }
    return out;
}

std::vector<double> compute_quantile_thresholds(const ScenarioConfig& scenario, const std::vector<double>& quantiles)
{
    for (const double q : quantiles)
        if (!(q > 0.0 && q < 1.0))
            throw ConfigError("quantile " + std::to_string(q) + " outside (0, 1)");
    const std::vector<double> snrs = calibration_snrs(scenario);
    std::vector<double> out;
    out.reserve(quantiles.size());
    for (const double q : quantiles)
        out.push_back(empirical_quantile(snrs, 1.0 - q));
    return out;
}

double resolve_threshold(const ScenarioConfig& scenario)
{
    if (scenario.threshold.kind == ThresholdSpec::Kind::absolute_db)
        return scenario.threshold.value;
    return compute_quantile_thresholds(scenario, {scenario.threshold.value}).front();
}

RunResult run_scenario(const ScenarioConfig& scenario, double gamma_th_db, std::ostream* records_out,
                       const DecisionObserver& observer)
{
    const World world(scenario);
    const PolicyParams params = resolved_policy(scenario);
    const auto policy = make_policy(params);
    const auto detector = make_detector(scenario);
    Rng channel_rng(stream_seed(scenario.seed, kChannelStream));

    RunResult result;
    result.gamma_th_db = gamma_th_db;
    if (records_out)
        write_records_header(*records_out);

    bool sighted = false;  // previous epoch had a usable detection
    double sighted_t = 0.0;
    double sighted_theta = 0.0;
    const std::size_t n_ticks = world.tick_count();
    std::size_t i = 0;
    while (i < n_ticks) {
        const double t = world.tick_time(i);
        const Pose ue = world.trajectory().pose_at(t);

        PolicyInput input;
        input.gamma_th_db = gamma_th_db;
        const FrameContext frame{t, ue, scenario.bs_position, scenario.mounts};
        if (const auto det = detector->observe(frame)) {
            try {
                const double theta_rcs =
                    ccs_to_rcs(pixel_to_ccs_angle(det->x_px, detector->intrinsics()), scenario.mounts);
                input.b_pred = quantize_to_beam(theta_rcs, world.ue_book());
                if (sighted && t > sighted_t)
                    input.angular_rate_deg_s = rad2deg(wrap_angle(theta_rcs - sighted_theta)) / (t - sighted_t);
                sighted = true;
                sighted_t = t;
                sighted_theta = theta_rcs;
            } catch (const OutOfFrame&) {
                sighted = false;
            }
        } else {
            sighted = false;
        }

        PolicyDecision decision;
        std::size_t used = 0;
        if (scenario.mode == EvalMode::offline) {
            OfflinePort port(world, world.realize(t, channel_rng));
            decision = policy->select(input, port);
            used = port.count();
        } else {
            OnlinePort port(world, t, channel_rng);
            decision = policy->select(input, port);
            used = port.count();
        }
        result.measurements += used;

        AlignmentRecord rec;
        rec.t = t;
        rec.policy = params.kind;
        rec.decision = decision;
        rec.gamma_th_db = gamma_th_db;
        rec.T_b = scenario.timing.decision_time(decision.n_beams);
        rec.outage = !decision.met_threshold;
        rec.snr_margin_db = gamma_th_db - decision.snr_db;
        if (records_out)
            write_record(*records_out, rec);
        if (observer)
            observer(input, decision);
        result.records.push_back(rec);

        if (scenario.mode == EvalMode::offline) {
            ++i;
        } else {
            const auto next =
                static_cast<std::size_t>(std::ceil((t + rec.T_b) / scenario.decision_period_s - 1e-9));
            i = std::max(i + 1, next);
        }
    }
    return result;
}

RunResult run_scenario(const ScenarioConfig& scenario, std::ostream* records_out)
{
    return run_scenario(scenario, resolve_threshold(scenario), records_out);
}

Summary summarize(const std::vector<AlignmentRecord>& records)
{
    if (records.empty())
        throw ConfigError("cannot summarize an empty record list");
    Summary s;
    s.policy = records.front().policy;
    s.gamma_th_db = records.front().gamma_th_db;
    s.n_records = records.size();
    std::vector<double> tb;
    tb.reserve(records.size());
    std::size_t outages = 0;
    double beams = 0.0;
    for (const auto& r : records) {
        outages += r.outage ? 1 : 0;
        beams += static_cast<double>(r.decision.n_beams);
        tb.push_back(r.T_b);
        if (r.decision.path == DecisionPath::fallback_sweep)
            ++s.n_fallback;
    }
    const auto n = static_cast<double>(records.size());
    s.outage_pct = 100.0 * static_cast<double>(outages) / n;
    s.mean_T_b_s = std::accumulate(tb.begin(), tb.end(), 0.0) / n;
    s.median_T_b_s = empirical_quantile(tb, 0.5);
    s.mean_n_beams = beams / n;
    return s;
}

std::vector<double> margin_cdf(const std::vector<AlignmentRecord>& records, const std::vector<double>& grid_db)
{
    if (records.empty())
        throw ConfigError("cannot build a CDF from an empty record list");
    std::vector<double> margins;
    margins.reserve(records.size());
    for (const auto& r : records)
        margins.push_back(r.snr_margin_db);
    std::sort(margins.begin(), margins.end());
    std::vector<double> out;
    out.reserve(grid_db.size());
    for (const double x : grid_db) {
        const auto below = std::upper_bound(margins.begin(), margins.end(), x) - margins.begin();
        out.push_back(static_cast<double>(below) / static_cast<double>(margins.size()));
    }
    return out;
}

std::vector<double> default_margin_grid()
{
    std::vector<double> g;
    for (int i = -60; i <= 60; ++i)
        g.push_back(0.5 * i);
    return g;
}

std::vector<OffsetSample> generate_offset_dataset(ScenarioConfig scenario, double gamma_th_db)
{
    scenario.policy.kind = PolicyKind::vibe_ma;
    const std::size_t size = scenario.ue_book.count;
    OffsetFeatures features;
    std::vector<OffsetSample> samples;
    run_scenario(scenario, gamma_th_db, nullptr, [&](const PolicyInput& in, const PolicyDecision& d) {
        if (!in.b_pred || !d.met_threshold)
            return;
        const int realized = static_cast<int>(d.k_ue) - static_cast<int>(*in.b_pred);
        samples.push_back({features.make(*in.b_pred, size, in.angular_rate_deg_s), static_cast<double>(realized)});
        features.record(realized);
    });
    return samples;
}

std::string format_number(double v, int decimals)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos)  // "-0.000000"
        s.erase(0, s.front() == '-' ? 1 : 0);
    return s;
}

void write_records_header(std::ostream& out)
{
    out << "# vibe-records v1\n"
        << "t_s,policy,gamma_th_db,k_ue,k_bs,snr_db,margin_db,n_beams,T_b_s,outage\n";
}

void write_record(std::ostream& out, const AlignmentRecord& r)
{
    out << format_number(r.t) << ',' << to_string(r.policy) << ',' << format_number(r.gamma_th_db) << ','
        << r.decision.k_ue << ',' << r.decision.k_bs << ',' << format_number(r.decision.snr_db) << ','
        << format_number(r.snr_margin_db) << ',' << r.decision.n_beams << ',' << format_number(r.T_b) << ','
        << (r.outage ? 1 : 0) << '\n';
}

void write_records_csv(std::ostream& out, const std::vector<AlignmentRecord>& records)
{
    write_records_header(out);
    for (const auto& r : records)
        write_record(out, r);
}

std::vector<AlignmentRecord> read_records_csv(std::istream& in)
{
    std::vector<AlignmentRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#' || line.rfind("t_s,", 0) == 0)
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (f.size() != 10)
            throw ConfigError("records line " + std::to_string(line_no) + ": expected 10 fields, got " +
                              std::to_string(f.size()));
        try {
            AlignmentRecord r;
            r.t = std::stod(f[0]);
            r.policy = parse_policy(f[1]);
            r.gamma_th_db = std::stod(f[2]);
            r.decision.k_ue = std::stoul(f[3]);
            r.decision.k_bs = std::stoul(f[4]);
            r.decision.snr_db = std::stod(f[5]);
            r.snr_margin_db = std::stod(f[6]);
            r.decision.n_beams = std::stoul(f[7]);
            r.T_b = std::stod(f[8]);
            r.outage = f[9] == "1";
            r.decision.met_threshold = !r.outage;
            out.push_back(r);
        } catch (const std::logic_error&) {
            throw ConfigError("records line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return out;
}

void write_summary_header(std::ostream& out)
{
    out << "# vibe-summary v1\n"
        << "policy,gamma_th_db,n_records,outage_pct,mean_T_b_s,median_T_b_s,mean_n_beams,n_fallback\n";
}

void write_summary_row(std::ostream& out, const Summary& s, bool with_fallback)
{
    out << to_string(s.policy) << ',' << format_number(s.gamma_th_db) << ',' << s.n_records << ','
        << format_number(s.outage_pct) << ',' << format_number(s.mean_T_b_s) << ','
        << format_number(s.median_T_b_s) << ',' << format_number(s.mean_n_beams) << ',';
    if (with_fallback)
        out << s.n_fallback;
    out << '\n';
}

void write_margin_cdf_header(std::ostream& out)
{
    out << "# vibe-margin-cdf v1\n"
        << "policy,gamma_th_db,margin_db,cdf\n";
}

void write_margin_cdf_rows(std::ostream& out, const std::vector<AlignmentRecord>& records,
                           const std::vector<double>& grid_db)
{
    const std::vector<double> cdf = margin_cdf(records, grid_db);
    const std::string policy(to_string(records.front().policy));
    const std::string gamma = format_number(records.front().gamma_th_db);
    for (std::size_t i = 0; i < grid_db.size(); ++i)
        out << policy << ',' << gamma << ',' << format_number(grid_db[i], 3) << ',' << format_number(cdf[i]) << '\n';
}

void write_thresholds_csv(std::ostream& out, const std::vector<double>& quantiles, const std::vector<double>& values)
{
    if (quantiles.size() != values.size())
        throw ShapeError("quantile and threshold lists differ in length");
    out << "# vibe-thresholds v1\n"
        << "quantile,gamma_th_db\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << format_number(quantiles[i], 4) << ',' << format_number(values[i]) << '\n';
}

}  // namespace vibe
