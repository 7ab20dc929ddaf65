// Copyright 2026 The bvq Authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bvq/dataset.hpp"
#include "bvq/qubo.hpp"

namespace bvq {

// Second-order factorization machine
//   y(x) = w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j
// with v_i the i-th row of the n-by-k matrix V.
struct FmModel {
    double w0 = 0.0;
    Eigen::VectorXd w;
    Eigen::MatrixXd v;

    FmModel() = default;
    FmModel(std::size_t n, std::size_t k);
    FmModel(double w0, Eigen::VectorXd w, Eigen::MatrixXd v);

    std::size_t n() const { return static_cast<std::size_t>(w.size()); }
    std::size_t k() const { return static_cast<std::size_t>(v.cols()); }

    double pairwise(std::size_t i, std::size_t j) const { return v.row(i).dot(v.row(j)); }

    // Throws InvalidArgument on shape mismatch, n or k of zero, or non-finite values.
    void validate() const;
};

struct FmGradients {
    double w0 = 0.0;
    Eigen::VectorXd w;
    Eigen::MatrixXd v;
};

// O(nk) evaluation through
//   sum_{i<j} <v_i,v_j> x_i x_j = 1/2 sum_f [(sum_i V_if x_i)^2 - sum_i V_if^2 x_i^2].
double fm_predict(const FmModel& model, const BinaryVector& x);

// Direct O(n^2 k) double loop; reference for fm_predict.
double fm_predict_naive(const FmModel& model, const BinaryVector& x);

// Gradient of the squared error (y(x) - target)^2 where residual = y(x) - target.
FmGradients fm_gradients(const FmModel& model, const BinaryVector& x, double residual);

struct FmTrainConfig {
    std::size_t epochs = 30;
    double learning_rate = 0.05;
    std::size_t rank = 8;
    double init_scale = 0.01;
    double train_fraction = 0.7;
    double val_fraction = 0.1;
    double test_fraction = 0.2;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

// Metrics are NaN when the corresponding split is empty.
struct FmTrainReport {
    double final_train_mse = 0.0;
    double final_val_mse = 0.0;
    double test_mse = 0.0;
    double test_r2 = 0.0;
    std::vector<double> loss_curve;  // train MSE after each epoch
    std::size_t train_rows = 0;
    std::size_t val_rows = 0;
    std::size_t test_rows = 0;
};

struct FmTrainResult {
    FmModel model;
    FmTrainReport report;
};

struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Seeded shuffle cut into train/validation/test index sets.
DataSplit split_rows(std::size_t rows, const FmTrainConfig& cfg);

// Adagrad on single-example squared-error steps, one seeded shuffle per epoch.
FmTrainResult fm_train(std::span<const BinaryVector> x, std::span<const double> y,
                       const FmTrainConfig& cfg, const FmModel* warm_start = nullptr);
FmTrainResult fm_train(const LabeledDataset& data, const FmTrainConfig& cfg,
                       const FmModel* warm_start = nullptr);

double mean_squared_error(const FmModel& model, std::span<const BinaryVector> x,
                          std::span<const double> y, std::span<const std::size_t> rows);
double r_squared(const FmModel& model, std::span<const BinaryVector> x,
                 std::span<const double> y, std::span<const std::size_t> rows);

// Maximisation of a label y is turned into minimisation of c - y.
struct LabelTransform {
    double c = 0.0;
    double margin = 0.0;

    double apply(double label) const { return c - label; }
    double invert(double transformed) const { return c - transformed; }
};

struct TransformedLabels {
    std::vector<double> labels;
    LabelTransform transform;
};

// c = max(labels) + margin.
TransformedLabels apply_label_transform(std::span<const double> labels, double margin);

// Q_i = w_i, Q_ij = <v_i, v_j>, offset = w0; the energy equals the prediction.
QuboProblem fm_to_qubo(const FmModel& model);

struct SurrogateQubo {
    QuboProblem qubo;
    LabelTransform transform;

    // Figure of merit implied by a sampled energy.
    double fom_from_energy(double energy) const { return transform.invert(energy); }
};

SurrogateQubo fm_to_qubo(const FmModel& model, const LabelTransform& transform);

// "FM v1 n=<n> k=<k>" checkpoint.
void write_fm(std::ostream& out, const FmModel& model);
FmModel read_fm(std::istream& in);
void save_fm(const std::filesystem::path& path, const FmModel& model);
FmModel load_fm(const std::filesystem::path& path);

}  // namespace bvq
