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

#include "vibe/cli.hpp"

#include "vibe/errors.hpp"
#include "vibe/mlp.hpp"
#include "vibe/scenario.hpp"
#include "vibe/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

namespace vibe {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kAllPolicies = {"vibe-ma", "vibe-mlp", "camera-only", "nr-hier", "exhaustive"};

/// Runs job(i) for i in [0, n) on up to `jobs` threads. Errors are collected
/// per slot so the caller can report them in a deterministic order.
std::vector<std::string> parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& job)
{
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    return errors;
}

std::ofstream open_out(const std::string& path)
{
    const fs::path p(path);
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    return out;
}

std::vector<std::string> with_seed(std::vector<std::string> overrides, const std::optional<std::uint64_t>& seed)
{
    if (seed)
        overrides.insert(overrides.begin(), "seed=" + std::to_string(*seed));
    return overrides;
}

/// Sets the motion speed: deg/s of rotation, or the peak bearing rate of a
/// straight pass (the road speed follows from the BS standoff).
void set_speed(ScenarioConfig& sc, double speed_deg_s)
{
    if (auto* r = std::get_if<RotationParams>(&sc.trajectory.params)) {
        r->angular_speed_deg_s = speed_deg_s;
        return;
    }
    if (auto* l = std::get_if<LinearPathParams>(&sc.trajectory.params)) {
        const Vec2 dir(std::sin(l->road_heading), std::cos(l->road_heading));
        const Vec2 rel = sc.bs_position - l->start;
        const double standoff = std::abs(rel.x() * dir.y() - rel.y() * dir.x());
        l->speed_mps = deg2rad(speed_deg_s) * standoff;
        return;
    }
    throw ConfigError("speed sweeps need a rotation or linear trajectory");
}

std::shared_ptr<const MlpModel> train_from_scenarios(const std::vector<std::pair<ScenarioConfig, double>>& runs,
                                                     const TrainHyper& hyper, std::ostream& log)
{
    std::vector<OffsetSample> data;
    for (const auto& [sc, gamma] : runs) {
        const auto part = generate_offset_dataset(sc, gamma);
        data.insert(data.end(), part.begin(), part.end());
    }
    log << "training offset regressor on " << data.size() << " samples\n";
    auto model = train_mlp(data, hyper);
    model.feature_names() = OffsetFeatures::names();
    return std::make_shared<const MlpModel>(std::move(model));
}

int cmd_calibrate(const std::string& scenario_path, const std::vector<std::string>& overrides,
                  const std::optional<std::uint64_t>& seed, const std::vector<double>& quantiles,
                  const std::string& output, std::ostream& out)
{
    const ScenarioConfig sc = load_scenario(scenario_path, with_seed(overrides, seed));
    const auto values = compute_quantile_thresholds(sc, quantiles);
    if (output.empty() || output == "-") {
        write_thresholds_csv(out, quantiles, values);
    } else {
        auto f = open_out(output);
        write_thresholds_csv(f, quantiles, values);
    }
    return 0;
}

struct RunTask {
    std::string scenario_path;
    std::string policy;
    std::size_t repeat = 0;
};

int cmd_run(const std::vector<std::string>& scenarios, const std::vector<std::string>& overrides,
            const std::optional<std::uint64_t>& seed, std::vector<std::string> policies, std::size_t repeat,
            std::size_t jobs, const std::string& model_file, const std::string& out_dir, std::ostream& out,
            std::ostream& err)
{
    if (repeat == 0)
        throw ConfigError("--repeat must be at least 1");
    fs::create_directories(out_dir);
    if (policies.empty())
        policies.push_back("");  // as configured in each scenario
    std::vector<RunTask> tasks;
    for (const auto& s : scenarios)
        for (const auto& p : policies)
            for (std::size_t r = 0; r < repeat; ++r)
                tasks.push_back({s, p, r});

    std::vector<std::optional<RunResult>> results(tasks.size());
    const auto errors = parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        const RunTask& task = tasks[i];
        std::vector<std::string> ov = overrides;
        if (!task.policy.empty())
            ov.push_back("policy.name=" + task.policy);
        ScenarioConfig sc = load_scenario(task.scenario_path, with_seed(ov, seed));
        sc.seed += task.repeat;
        if (!model_file.empty())
            sc.model_file = model_file;
        const std::string stem = sc.name + "__" + std::string(to_string(sc.policy.kind)) + "__seed" +
                                 std::to_string(sc.seed);
        auto f = open_out((fs::path(out_dir) / (stem + ".records.csv")).string());
        results[i] = run_scenario(sc, &f);
    });

    auto summary = open_out((fs::path(out_dir) / "summary.csv").string());
    auto cdf = open_out((fs::path(out_dir) / "margin_cdf.csv").string());
    write_summary_header(summary);
    write_margin_cdf_header(cdf);
    int status = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!errors[i].empty()) {
            err << "error: " << tasks[i].scenario_path << (tasks[i].policy.empty() ? "" : " [" + tasks[i].policy + "]")
                << ": " << errors[i] << '\n';
            status = 1;
            continue;
        }
        if (results[i]->records.empty())
            continue;
        const Summary s = summarize(results[i]->records);
        write_summary_row(summary, s);
        write_margin_cdf_rows(cdf, results[i]->records, default_margin_grid());
        out << tasks[i].scenario_path << ' ' << to_string(s.policy) << ": outage " << format_number(s.outage_pct, 2)
            << "%, mean T_b " << format_number(s.mean_T_b_s, 3) << " s, mean beams "
            << format_number(s.mean_n_beams, 2) << '\n';
    }
    return status;
}

int cmd_train(const std::string& dataset, const std::string& scenario_path, const std::vector<std::string>& overrides,
              const std::optional<std::uint64_t>& seed, const TrainHyper& hyper, const std::string& model_out,
              const std::string& loss_out, const std::string& dump_dataset, std::ostream& out)
{
    std::vector<OffsetSample> data;
    if (!dataset.empty()) {
        std::ifstream in(dataset);
        if (!in)
            throw ConfigError("cannot open dataset '" + dataset + "'");
        data = read_offset_dataset(in);
    } else {
        const ScenarioConfig sc = load_scenario(scenario_path, with_seed(overrides, seed));
        data = generate_offset_dataset(sc, resolve_threshold(sc));
    }
    if (!dump_dataset.empty()) {
        auto f = open_out(dump_dataset);
        write_offset_dataset(data, OffsetFeatures::names(), f);
    }
    MlpModel model = train_mlp(data, hyper);
    if (model.shape().n_inputs == OffsetFeatures::kDim)
        model.feature_names() = OffsetFeatures::names();
    {
        auto f = open_out(model_out);
        model.save(f);
    }
    if (!loss_out.empty()) {
        auto f = open_out(loss_out);
        write_loss_csv(model, f);
    }
    out << "trained on " << data.size() << " samples; final loss "
        << format_number(model.loss_curve().empty() ? 0.0 : model.loss_curve().back(), 6) << '\n';
    return 0;
}

int cmd_compare(const std::string& scenario_path, const std::vector<std::string>& overrides,
                const std::optional<std::uint64_t>& seed, std::vector<std::string> policies,
                const std::vector<double>& speeds, const std::vector<double>& quantiles, std::size_t jobs,
                const std::string& model_file, const std::string& output, std::ostream& out, std::ostream& err)
{
    if (policies.empty())
        policies = kAllPolicies;
    const ScenarioConfig base = load_scenario(scenario_path, with_seed(overrides, seed));

    std::vector<ScenarioConfig> at_speed;
    std::vector<std::vector<double>> thresholds(speeds.size());
    for (const double v : speeds) {
        ScenarioConfig sc = base;
        set_speed(sc, v);
        at_speed.push_back(sc);
    }
    const auto cal_errors = parallel_for(speeds.size(), jobs, [&](std::size_t i) {
        thresholds[i] = compute_quantile_thresholds(at_speed[i], quantiles);
    });
    for (const auto& e : cal_errors)
        if (!e.empty())
            throw ConfigError(e);

    std::shared_ptr<const MlpModel> model;
    if (std::find(policies.begin(), policies.end(), "vibe-mlp") != policies.end()) {
        if (!model_file.empty()) {
            model = std::make_shared<const MlpModel>(MlpModel::load(model_file));
        } else {
            // Offsets logged from ViBE-MA runs on an independent seed.
            std::vector<std::pair<ScenarioConfig, double>> runs;
            for (std::size_t i = 0; i < speeds.size(); ++i)
                for (const double g : thresholds[i]) {
                    ScenarioConfig sc = at_speed[i];
                    sc.seed += 1000;
                    runs.emplace_back(sc, g);
                }
            TrainHyper hyper;
            hyper.epochs = 100;
            model = train_from_scenarios(runs, hyper, err);
        }
    }

    struct Cell {
        std::string policy;
        std::size_t speed = 0;
        std::size_t quantile = 0;
    };
    std::vector<Cell> cells;
    for (const auto& p : policies)
        for (std::size_t s = 0; s < speeds.size(); ++s)
            for (std::size_t q = 0; q < quantiles.size(); ++q)
                cells.push_back({p, s, q});
    std::vector<Summary> summaries(cells.size());
    const auto errors = parallel_for(cells.size(), jobs, [&](std::size_t i) {
        ScenarioConfig sc = at_speed[cells[i].speed];
        sc.policy.kind = parse_policy(cells[i].policy);
        sc.policy.model = model;
        summaries[i] = summarize(run_scenario(sc, thresholds[cells[i].speed][cells[i].quantile]).records);
    });

    std::ofstream file;
    if (!output.empty() && output != "-")
        file = open_out(output);
    std::ostream& table = file.is_open() ? static_cast<std::ostream&>(file) : out;
    table << "# vibe-compare v1\n"
          << "policy,speed_deg_s,quantile,gamma_th_db,outage_pct,mean_T_b_s,median_T_b_s,mean_n_beams,n_fallback\n";
    int status = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!errors[i].empty()) {
            err << "error: " << cells[i].policy << " at " << speeds[cells[i].speed] << " deg/s: " << errors[i] << '\n';
            status = 1;
            continue;
        }
        const Summary& s = summaries[i];
        table << cells[i].policy << ',' << format_number(speeds[cells[i].speed], 4) << ','
              << format_number(quantiles[cells[i].quantile], 4) << ',' << format_number(s.gamma_th_db) << ','
              << format_number(s.outage_pct) << ',' << format_number(s.mean_T_b_s) << ','
              << format_number(s.median_T_b_s) << ',' << format_number(s.mean_n_beams) << ',' << s.n_fallback
              << '\n';
    }
    return status;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir, std::ostream& out)
{
    fs::create_directories(out_dir);
    auto summary = open_out((fs::path(out_dir) / "summary.csv").string());
    auto cdf = open_out((fs::path(out_dir) / "margin_cdf.csv").string());
    write_summary_header(summary);
    write_margin_cdf_header(cdf);
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open records file '" + path + "'");
        const auto records = read_records_csv(in);
        if (records.empty())
            throw ConfigError("records file '" + path + "' holds no records");
        write_summary_row(summary, summarize(records), false);
        write_margin_cdf_rows(cdf, records, default_margin_grid());
    }
    out << "wrote " << (fs::path(out_dir) / "summary.csv").string() << " and "
        << (fs::path(out_dir) / "margin_cdf.csv").string() << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Camera-primed mmWave beam alignment simulator", "vibe"};
    app.require_subcommand(1);

    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--set", overrides, "Override a scenario key, e.g. --set policy.delta_max=3");
        sub->add_option("--seed", seed, "Override the scenario seed");
    };

    std::string cal_scenario, cal_out;
    std::vector<double> quantiles = {0.80, 0.90, 0.95};
    auto* cal = app.add_subcommand("calibrate", "Compute quantile SNR thresholds from exhaustive sweeps");
    cal->add_option("scenario", cal_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    cal->add_option("-o,--output", cal_out, "Thresholds CSV (default: stdout)");
    cal->add_option("--quantiles", quantiles, "Coverage levels")->delimiter(',');
    add_common(cal);

    std::vector<std::string> run_scenarios, policies;
    std::string out_dir = "out", model_file;
    std::size_t repeat = 1;
    auto* run = app.add_subcommand("run", "Run scenarios and write records and summaries");
    run->add_option("scenarios", run_scenarios, "Scenario files")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output-dir", out_dir, "Output directory");
    run->add_option("--policy", policies, "Policies to run (repeatable)")
        ->check(CLI::IsMember(kAllPolicies))
        ->delimiter(',');
    run->add_option("--repeat", repeat, "Runs per scenario with seeds seed, seed+1, ...");
    run->add_option("--jobs", jobs, "Parallel runs");
    run->add_option("--model", model_file, "Offset regressor for vibe-mlp");
    add_common(run);

    std::string dataset, train_scenario, model_out = "model.txt", loss_out, dump_dataset;
    TrainHyper hyper;
    auto* train = app.add_subcommand("train-mlp", "Train the offset regressor");
    auto* ds_opt = train->add_option("--dataset", dataset, "Offset dataset CSV")->check(CLI::ExistingFile);
    auto* sc_opt = train->add_option("--scenario", train_scenario, "Generate the dataset from ViBE-MA runs")
                       ->check(CLI::ExistingFile);
    ds_opt->excludes(sc_opt);
    train->add_option("-o,--output", model_out, "Model file");
    train->add_option("--loss", loss_out, "Loss curve CSV");
    train->add_option("--dump-dataset", dump_dataset, "Write the generated dataset");
    train->add_option("--epochs", hyper.epochs);
    train->add_option("--lr", hyper.lr);
    train->add_option("--batch", hyper.batch);
    train->add_option("--dropout", hyper.dropout_p);
    train->add_option("--hidden1", hyper.hidden1);
    train->add_option("--hidden2", hyper.hidden2);
    train->add_option("--train-seed", hyper.seed, "Initialization and shuffling seed");
    add_common(train);

    std::string cmp_scenario, cmp_out;
    std::vector<double> speeds = {0.25, 1.0, 4.0};
    std::vector<std::string> cmp_policies;
    auto* cmp = app.add_subcommand("compare", "Policy x speed x quantile grid");
    cmp->add_option("scenario", cmp_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    cmp->add_option("-o,--output", cmp_out, "Comparison CSV (default: stdout)");
    cmp->add_option("--speeds", speeds, "Rotation speeds or peak bearing rates, deg/s")->delimiter(',');
    cmp->add_option("--quantiles", quantiles, "Coverage levels")->delimiter(',');
    cmp->add_option("--policy", cmp_policies, "Policies (default: all)")
        ->check(CLI::IsMember(kAllPolicies))
        ->delimiter(',');
    cmp->add_option("--jobs", jobs, "Parallel runs");
    cmp->add_option("--model", model_file, "Offset regressor for vibe-mlp (default: train one)");
    add_common(cmp);

    std::vector<std::string> report_inputs;
    std::string report_dir = "report";
    auto* rep = app.add_subcommand("report", "Summaries and margin CDFs from records CSVs");
    rep->add_option("records", report_inputs, "Records CSVs")->required()->check(CLI::ExistingFile);
    rep->add_option("-o,--output-dir", report_dir, "Output directory");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*cal)
            return cmd_calibrate(cal_scenario, overrides, seed, quantiles, cal_out, out);
        if (*run)
            return cmd_run(run_scenarios, overrides, seed, policies, repeat, jobs, model_file, out_dir, out, err);
        if (*train) {
            if (dataset.empty() && train_scenario.empty())
                throw ConfigError("train-mlp needs --dataset or --scenario");
            return cmd_train(dataset, train_scenario, overrides, seed, hyper, model_out, loss_out, dump_dataset, out);
        }
        if (*cmp)
            return cmd_compare(cmp_scenario, overrides, seed, cmp_policies, speeds, quantiles, jobs, model_file,
                               cmp_out, out, err);
        if (*rep)
            return cmd_report(report_inputs, report_dir, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace vibe
