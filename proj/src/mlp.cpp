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

#include "vibe/mlp.hpp"

#include "vibe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace vibe {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr const char* kModelMagic = "vibe-mlp";
constexpr int kModelVersion = 1;

template <class Vec> struct LayerViews {
    using Scalar = std::conditional_t<std::is_const_v<Vec>, const double, double>;
    using MatMap = Eigen::Map<std::conditional_t<std::is_const_v<Vec>, const MatrixXd, MatrixXd>>;
    using VecMap = Eigen::Map<std::conditional_t<std::is_const_v<Vec>, const VectorXd, VectorXd>>;

    MatMap w1, w2, w3;
    VecMap b1, g1, be1, b2, g2, be2;
    Scalar& b3;

    static LayerViews make(Vec& p, const MlpShape& s)
    {
        const auto in = static_cast<Eigen::Index>(s.n_inputs);
        const auto h1 = static_cast<Eigen::Index>(s.hidden1);
        const auto h2 = static_cast<Eigen::Index>(s.hidden2);
        Scalar* d = p.data();
        Scalar* w1 = d;
        d += h1 * in;
        Scalar* b1 = d;
        d += h1;
        Scalar* g1 = d;
        d += h1;
        Scalar* be1 = d;
        d += h1;
        Scalar* w2 = d;
        d += h2 * h1;
        Scalar* b2 = d;
        d += h2;
        Scalar* g2 = d;
        d += h2;
        Scalar* be2 = d;
        d += h2;
        Scalar* w3 = d;
        d += h2;
        return LayerViews{MatMap(w1, h1, in), MatMap(w2, h2, h1), MatMap(w3, 1, h2), VecMap(b1, h1),
                          VecMap(g1, h1),     VecMap(be1, h1),    VecMap(b2, h2),    VecMap(g2, h2),
                          VecMap(be2, h2),    *d};
    }
};

// Per-column layer normalization; keeps what backprop needs.
struct NormCache {
    MatrixXd xhat;
    VectorXd inv_std;  // per column
};

MatrixXd normalize_columns(const MatrixXd& z, NormCache& cache)
{
    const auto n = static_cast<double>(z.rows());
    cache.xhat.resize(z.rows(), z.cols());
    cache.inv_std.resize(z.cols());
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double mu = z.col(c).mean();
        const VectorXd centered = z.col(c).array() - mu;
        const double var = centered.squaredNorm() / n;
        cache.inv_std(c) = 1.0 / std::sqrt(var + kLayerNormEps);
        cache.xhat.col(c) = centered * cache.inv_std(c);
    }
    return cache.xhat;
}

// Gradient through the normalization given dL/dxhat.
MatrixXd normalize_backward(const MatrixXd& dxhat, const NormCache& cache)
{
    const auto n = static_cast<double>(dxhat.rows());
    MatrixXd dz(dxhat.rows(), dxhat.cols());
    for (Eigen::Index c = 0; c < dxhat.cols(); ++c) {
        const double mean_d = dxhat.col(c).sum() / n;
        const double mean_dx = dxhat.col(c).dot(cache.xhat.col(c)) / n;
        dz.col(c) = cache.inv_std(c) * (dxhat.col(c).array() - mean_d - cache.xhat.col(c).array() * mean_dx).matrix();
    }
    return dz;
}

struct ForwardCache {
    MatrixXd x, z1, a1, r1, d1, z2, a2, r2, d2;
    NormCache n1, n2;
    Eigen::RowVectorXd out;
};

void forward_batch(const MlpModel& m, const MatrixXd& x, const DropoutMasks* masks, ForwardCache& fc)
{
    const auto v = LayerViews<const VectorXd>::make(m.parameters(), m.shape());
    fc.x = x;
    fc.z1 = (v.w1 * x).colwise() + VectorXd(v.b1);
    fc.a1 = ((normalize_columns(fc.z1, fc.n1).array().colwise() * v.g1.array()).colwise() + v.be1.array()).matrix();
    fc.r1 = fc.a1.cwiseMax(0.0);
    fc.d1 = masks ? MatrixXd(fc.r1.cwiseProduct(masks->layer1)) : fc.r1;
    fc.z2 = (v.w2 * fc.d1).colwise() + VectorXd(v.b2);
    fc.a2 = ((normalize_columns(fc.z2, fc.n2).array().colwise() * v.g2.array()).colwise() + v.be2.array()).matrix();
    fc.r2 = fc.a2.cwiseMax(0.0);
    fc.d2 = masks ? MatrixXd(fc.r2.cwiseProduct(masks->layer2)) : fc.r2;
    fc.out = ((v.w3 * fc.d2).array() + v.b3).matrix();
}

MatrixXd stack_features(const std::vector<OffsetSample>& samples, std::size_t n_inputs)
{
    MatrixXd x(static_cast<Eigen::Index>(n_inputs), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<std::size_t>(samples[i].features.size()) != n_inputs)
            throw ShapeError("feature vector length " + std::to_string(samples[i].features.size()) +
                             " does not match model input " + std::to_string(n_inputs));
        x.col(static_cast<Eigen::Index>(i)) = samples[i].features;
    }
    return x;
}

}  // namespace

std::size_t MlpShape::parameter_count() const
{
    return hidden1 * n_inputs + 3 * hidden1 + hidden2 * hidden1 + 3 * hidden2 + hidden2 + 1;
}

double smooth_l1(double r)
{
    const double a = std::abs(r);
    return a < 1.0 ? 0.5 * r * r : a - 0.5;
}

double smooth_l1_grad(double r)
{
    if (std::abs(r) < 1.0)
        return r;
    return r > 0.0 ? 1.0 : -1.0;
}

VectorXd layer_normalize(const VectorXd& z)
{
    NormCache cache;
    return normalize_columns(MatrixXd(z), cache).col(0);
}

MlpModel::MlpModel(MlpShape shape, double dropout_p)
    : shape_(shape), dropout_p_(dropout_p), params_(VectorXd::Zero(static_cast<Eigen::Index>(shape.parameter_count())))
{
    if (shape_.n_inputs < 1 || shape_.hidden1 < 1 || shape_.hidden2 < 1)
        throw ConfigError("MLP layers need at least one unit");
    if (!(dropout_p_ >= 0.0 && dropout_p_ < 1.0))
        throw ConfigError("dropout probability must lie in [0, 1)");
}

MlpModel MlpModel::initialized(MlpShape shape, double dropout_p, std::uint64_t seed)
{
    MlpModel m(shape, dropout_p);
    std::mt19937_64 rng(seed);
    auto v = LayerViews<VectorXd>::make(m.params_, m.shape_);
    auto fill = [&rng](auto& w, double fan_in) {
        const double bound = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w.data()[i] = u(rng);
    };
    fill(v.w1, static_cast<double>(shape.n_inputs));
    fill(v.w2, static_cast<double>(shape.hidden1));
    fill(v.w3, static_cast<double>(shape.hidden2));
    v.g1.setOnes();
    v.g2.setOnes();
    return m;
}

double MlpModel::forward(const FeatureVector& x) const
{
    if (static_cast<std::size_t>(x.size()) != shape_.n_inputs)
        throw ShapeError("feature vector length " + std::to_string(x.size()) + " does not match model input " +
                         std::to_string(shape_.n_inputs));
    ForwardCache fc;
    forward_batch(*this, MatrixXd(x), nullptr, fc);
    return fc.out(0);
}

double MlpModel::loss(const std::vector<OffsetSample>& samples) const
{
    if (samples.empty())
        return 0.0;
    ForwardCache fc;
    forward_batch(*this, stack_features(samples, shape_.n_inputs), nullptr, fc);
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        total += smooth_l1(fc.out(static_cast<Eigen::Index>(i)) - samples[i].offset);
    return total / static_cast<double>(samples.size());
}

double MlpModel::loss_and_gradient(const std::vector<OffsetSample>& samples, VectorXd& grad,
                                   const DropoutMasks* masks) const
{
    grad = VectorXd::Zero(params_.size());
    if (samples.empty())
        return 0.0;
    const auto nb = static_cast<double>(samples.size());
    ForwardCache fc;
    forward_batch(*this, stack_features(samples, shape_.n_inputs), masks, fc);

    const auto v = LayerViews<const VectorXd>::make(params_, shape_);
    auto g = LayerViews<VectorXd>::make(grad, shape_);

    double total = 0.0;
    Eigen::RowVectorXd dout(fc.out.size());
    for (Eigen::Index i = 0; i < fc.out.size(); ++i) {
        const double r = fc.out(i) - samples[static_cast<std::size_t>(i)].offset;
        total += smooth_l1(r);
        dout(i) = smooth_l1_grad(r) / nb;
    }

    g.b3 = dout.sum();
    g.w3 = dout * fc.d2.transpose();
    MatrixXd dd2 = v.w3.transpose() * dout;
    MatrixXd dr2 = masks ? MatrixXd(dd2.cwiseProduct(masks->layer2)) : dd2;
    MatrixXd da2 = dr2.cwiseProduct((fc.a2.array() > 0.0).cast<double>().matrix());
    g.be2 = da2.rowwise().sum();
    g.g2 = da2.cwiseProduct(fc.n2.xhat).rowwise().sum();
    MatrixXd dz2 = normalize_backward((da2.array().colwise() * v.g2.array()).matrix(), fc.n2);
    g.b2 = dz2.rowwise().sum();
    g.w2 = dz2 * fc.d1.transpose();

    MatrixXd dd1 = v.w2.transpose() * dz2;
    MatrixXd dr1 = masks ? MatrixXd(dd1.cwiseProduct(masks->layer1)) : dd1;
    MatrixXd da1 = dr1.cwiseProduct((fc.a1.array() > 0.0).cast<double>().matrix());
    g.be1 = da1.rowwise().sum();
    g.g1 = da1.cwiseProduct(fc.n1.xhat).rowwise().sum();
    MatrixXd dz1 = normalize_backward((da1.array().colwise() * v.g1.array()).matrix(), fc.n1);
    g.b1 = dz1.rowwise().sum();
    g.w1 = dz1 * fc.x.transpose();

    return total / nb;
}

void MlpModel::save(std::ostream& out) const
{
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "inputs " << shape_.n_inputs << '\n';
    out << "hidden " << shape_.hidden1 << ' ' << shape_.hidden2 << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", dropout_p_);
    out << "dropout " << buf << '\n';
    out << "trained " << (trained_ ? 1 : 0) << '\n';
    out << "features";
    for (std::size_t i = 0; i < feature_names_.size(); ++i)
        out << (i == 0 ? " " : ",") << feature_names_[i];
    out << '\n';
    out << "params " << params_.size() << '\n';
    for (Eigen::Index i = 0; i < params_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%a", params_(i));
        out << buf << '\n';
    }
}

void MlpModel::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write model file '" + path + "'");
    save(out);
}

MlpModel MlpModel::load(std::istream& in)
{
    auto expect = [&in](const std::string& key) {
        std::string k;
        if (!(in >> k) || k != key)
            throw ConfigError("model file: expected '" + key + "'");
    };
    auto read_double = [&in]() {
        std::string tok;
        if (!(in >> tok))
            throw ConfigError("model file: truncated");
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw ConfigError("model file: bad number '" + tok + "'");
        return v;
    };

    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kModelMagic)
        throw ConfigError("not a vibe-mlp model file");
    if (version != kModelVersion)
        throw ConfigError("unsupported model file version " + std::to_string(version));
    MlpShape shape;
    expect("inputs");
    in >> shape.n_inputs;
    expect("hidden");
    in >> shape.hidden1 >> shape.hidden2;
    expect("dropout");
    const double dropout = read_double();
    expect("trained");
    int trained = 0;
    in >> trained;
    expect("features");
    std::string names;
    std::getline(in, names);
    MlpModel m(shape, dropout);
    m.trained_ = trained != 0;
    std::istringstream ns(names);
    std::string name;
    while (std::getline(ns, name, ',')) {
        name.erase(0, name.find_first_not_of(' '));
        if (!name.empty())
            m.feature_names_.push_back(name);
    }
    expect("params");
    std::size_t count = 0;
    in >> count;
    if (count != shape.parameter_count())
        throw ConfigError("model file parameter count does not match its layer sizes");
    for (std::size_t i = 0; i < count; ++i)
        m.params_(static_cast<Eigen::Index>(i)) = read_double();
    return m;
}

MlpModel MlpModel::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open model file '" + path + "'");
    return load(in);
}

MlpModel train_mlp(const std::vector<OffsetSample>& dataset, const TrainHyper& hyper)
{
    if (dataset.empty())
        throw ConfigError("cannot train on an empty dataset");
    if (hyper.batch < 1 || hyper.epochs < 1)
        throw ConfigError("training needs batch >= 1 and epochs >= 1");
    const MlpShape shape{static_cast<std::size_t>(dataset.front().features.size()), hyper.hidden1, hyper.hidden2};
    MlpModel model = MlpModel::initialized(shape, hyper.dropout_p, hyper.seed);
    std::mt19937_64 rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    VectorXd m1 = VectorXd::Zero(model.parameters().size());
    VectorXd m2 = m1;
    VectorXd grad;
    std::size_t step = 0;

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::bernoulli_distribution keep(1.0 - hyper.dropout_p);
    const double scale = 1.0 / (1.0 - hyper.dropout_p);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
            const std::size_t stop = std::min(order.size(), start + hyper.batch);
            std::vector<OffsetSample> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i)
                batch.push_back(dataset[order[i]]);

            const auto cols = static_cast<Eigen::Index>(batch.size());
            DropoutMasks masks{MatrixXd(static_cast<Eigen::Index>(shape.hidden1), cols),
                               MatrixXd(static_cast<Eigen::Index>(shape.hidden2), cols)};
            for (Eigen::Index i = 0; i < masks.layer1.size(); ++i)
                masks.layer1.data()[i] = keep(rng) ? scale : 0.0;
            for (Eigen::Index i = 0; i < masks.layer2.size(); ++i)
                masks.layer2.data()[i] = keep(rng) ? scale : 0.0;

            model.loss_and_gradient(batch, grad, hyper.dropout_p > 0.0 ? &masks : nullptr);
            ++step;
            m1 = beta1 * m1 + (1.0 - beta1) * grad;
            m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            model.parameters().array() -=
                hyper.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        }
        model.loss_curve().push_back(model.loss(dataset));
    }
    model.set_trained(true);
    return model;
}

void write_loss_csv(const MlpModel& model, std::ostream& out)
{
    out << "# vibe-loss v1\n";
    out << "epoch,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < model.loss_curve().size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, model.loss_curve()[i]);
        out << buf;
    }
}

std::vector<OffsetSample> read_offset_dataset(std::istream& in)
{
    std::vector<OffsetSample> data;
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::vector<double> values;
        std::istringstream fields(line);
        std::string tok;
        bool numeric = true;
        while (std::getline(fields, tok, ',')) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str()) {
                numeric = false;
                break;
            }
            values.push_back(v);
        }
        if (!numeric) {
            if (data.empty())
                continue;  // header row
            throw ConfigError("offset dataset line " + std::to_string(line_no) + ": non-numeric field");
        }
        if (values.size() < 2)
            throw ConfigError("offset dataset line " + std::to_string(line_no) + ": need features and an offset");
        if (width == 0)
            width = values.size();
        else if (values.size() != width)
            throw ConfigError("offset dataset line " + std::to_string(line_no) + ": inconsistent column count");
        OffsetSample s;
        s.features = Eigen::Map<VectorXd>(values.data(), static_cast<Eigen::Index>(values.size() - 1));
        s.offset = values.back();
        data.push_back(std::move(s));
    }
    return data;
}

void write_offset_dataset(const std::vector<OffsetSample>& data, const std::vector<std::string>& names,
                          std::ostream& out)
{
    out << "# vibe-offsets v1\n";
    for (const auto& n : names)
        out << n << ',';
    out << "offset\n";
    char buf[64];
    for (const auto& s : data) {
        for (Eigen::Index i = 0; i < s.features.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,", s.features(i));
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", s.offset);
        out << buf;
    }
}

}  // namespace vibe
