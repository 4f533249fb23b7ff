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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vibe {

using FeatureVector = Eigen::VectorXd;

/// Three fully connected layers:
///   [dense -> layernorm -> relu -> dropout] x 2 -> dense(1)
struct MlpShape {
    std::size_t n_inputs = 5;
    std::size_t hidden1 = 32;
    std::size_t hidden2 = 32;

    std::size_t parameter_count() const;
    bool operator==(const MlpShape&) const = default;
};

struct OffsetSample {
    FeatureVector features;
    double offset = 0.0;
};

struct TrainHyper {
    double lr = 1e-3;
    std::size_t epochs = 200;
    std::size_t batch = 32;
    double dropout_p = 0.1;
    std::uint64_t seed = 1;
    std::size_t hidden1 = 32;
    std::size_t hidden2 = 32;
};

/// Dropout masks for one forward pass: one column per sample.
struct DropoutMasks {
    Eigen::MatrixXd layer1;
    Eigen::MatrixXd layer2;
};

class MlpModel {
public:
    MlpModel() = default;
    MlpModel(MlpShape shape, double dropout_p);

    /// Kaiming-uniform dense weights, zero biases, unit layernorm gain.
    static MlpModel initialized(MlpShape shape, double dropout_p, std::uint64_t seed);

    const MlpShape& shape() const { return shape_; }
    double dropout_p() const { return dropout_p_; }
    bool trained() const { return trained_; }
    void set_trained(bool t) { trained_ = t; }

    /// Flat parameter vector (layer by layer, column-major matrices).
    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    std::vector<std::string>& feature_names() { return feature_names_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    std::vector<double>& loss_curve() { return loss_curve_; }
    const std::vector<double>& loss_curve() const { return loss_curve_; }

    /// Inference (dropout disabled). Throws ShapeError on a feature-length
    /// mismatch.
    double forward(const FeatureVector& x) const;

    /// Mean Smooth-L1 loss over `samples` in inference mode.
    double loss(const std::vector<OffsetSample>& samples) const;

    /// Mean Smooth-L1 loss and its gradient with respect to parameters().
    /// `masks` (already scaled by 1/(1-p)) enables dropout; null disables it.
    double loss_and_gradient(const std::vector<OffsetSample>& samples, Eigen::VectorXd& grad,
                             const DropoutMasks* masks = nullptr) const;

    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static MlpModel load(std::istream& in);
    static MlpModel load(const std::string& path);

private:
    MlpShape shape_;
    double dropout_p_ = 0.0;
    bool trained_ = false;
    Eigen::VectorXd params_;
    std::vector<std::string> feature_names_;
    std::vector<double> loss_curve_;
};

/// Smooth-L1 (Huber with beta = 1) of a residual.
double smooth_l1(double residual);
double smooth_l1_grad(double residual);

inline constexpr double kLayerNormEps = 1e-9;

/// Layer normalization of one vector without the affine part.
Eigen::VectorXd layer_normalize(const Eigen::VectorXd& z);

/// Adam on Smooth-L1 with mini-batches and dropout. Deterministic given
/// `hyper.seed`. Records the full-dataset inference loss after every epoch.
MlpModel train_mlp(const std::vector<OffsetSample>& dataset, const TrainHyper& hyper);

/// Writes `epoch,loss` rows.
void write_loss_csv(const MlpModel& model, std::ostream& out);

/// Dataset rows `f1,...,fn,offset`. Lines starting with '#' and a header
/// row whose first field is not numeric are skipped.
std::vector<OffsetSample> read_offset_dataset(std::istream& in);
void write_offset_dataset(const std::vector<OffsetSample>& data, const std::vector<std::string>& names,
                          std::ostream& out);

}  // namespace vibe
