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
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bvq/image.hpp"
#include "bvq/qubo.hpp"
#include "bvq/random.hpp"

namespace bvq {

// Dense encoder (m*m -> hidden ReLU layers -> 2n logits) and decoder
// (n -> hidden ReLU layers -> m*m sigmoid outputs). Each latent bit owns a
// pair of category logits; category 1 is the "bit set" category.
struct BvaeArchitecture {
    static constexpr std::size_t kCategoriesPerBit = 2;

    std::size_t image_side = 8;
    std::size_t latent_bits = 16;
    std::vector<std::size_t> encoder_hidden{512, 256};
    std::vector<std::size_t> decoder_hidden{256, 512};

    std::size_t input_size() const { return image_side * image_side; }
    std::size_t logit_count() const { return kCategoriesPerBit * latent_bits; }
    void validate() const;

    friend bool operator==(const BvaeArchitecture&, const BvaeArchitecture&) = default;
};

struct DenseLayer {
    std::string name;
    Eigen::MatrixXd weight;  // outputs x inputs
    Eigen::VectorXd bias;
};

struct BvaeModel {
    BvaeArchitecture arch;
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;
    double tau = 5.0;  // Gumbel-softmax temperature reached in training

    // He-uniform hidden layers, Glorot-uniform output layers, zero biases.
    static BvaeModel initialize(const BvaeArchitecture& arch, std::uint64_t seed);

    void validate() const;
    std::size_t parameter_count() const;
};

// Gradients laid out like the model's layers.
struct BvaeGradients {
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;
};

struct TemperatureSchedule {
    double tau = 5.0;
    double tau_max = 5.0;
    double tau_min = 0.4;
    double gamma = 0.0003;

    void validate() const;
};

// tau <- max(tau_min, tau * exp(-gamma * epoch)).
TemperatureSchedule anneal_tau(const TemperatureSchedule& schedule, std::size_t epoch);

// Relaxed two-category sample per bit: softmax((logit_c + G_c) / tau).
// `logits` and `noise` hold (category 0, category 1) pairs bit by bit.
std::vector<double> gumbel_softmax(std::span<const double> logits, double tau,
                                   std::span<const double> noise);

// Gumbel(0,1) noise for a batch, one column of 2n draws per example.
Eigen::MatrixXd sample_gumbel_noise(std::size_t latent_bits, std::size_t batch, Rng& rng);

inline constexpr double kProbabilityClamp = 1e-7;

// KL(Bernoulli(q) || Bernoulli(p)) with q clamped to [1e-7, 1 - 1e-7].
double bernoulli_kl(double q, double p = 0.5);

struct LossBreakdown {
    double reconstruction = 0.0;  // binary cross-entropy in nats, summed over pixels
    double kl = 0.0;              // summed over latent bits
    double total = 0.0;
};

// Batch means of the per-image losses; the decoder sees the relaxed samples.
LossBreakdown bvae_loss(const BvaeModel& model, std::span<const Image> batch, double tau,
                        const Eigen::MatrixXd& noise);

struct LossAndGradients {
    LossBreakdown loss;
    BvaeGradients gradients;
};

LossAndGradients bvae_loss_and_gradients(const BvaeModel& model, std::span<const Image> batch,
                                         double tau, const Eigen::MatrixXd& noise);

struct BvaeTrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double validation_fraction = 0.15;
    TemperatureSchedule temperature;
    std::uint64_t seed = 0;

    void validate() const;
};

// Validation fields are NaN when the validation split is empty.
struct BvaeEpochStats {
    std::size_t epoch = 0;
    double tau = 0.0;
    LossBreakdown train;
    LossBreakdown validation;
    double validation_pixel_accuracy = 0.0;
};

struct BvaeTrainResult {
    BvaeModel model;
    std::vector<BvaeEpochStats> history;
};

using BvaeEpochCallback = std::function<void(const BvaeEpochStats&)>;

// Adam on minibatches, temperature annealed after every epoch.
BvaeTrainResult bvae_train(std::span<const Image> images, const BvaeArchitecture& arch,
                           const BvaeTrainConfig& cfg, const BvaeEpochCallback& on_epoch = {});

// Encoder probability of category 1 for every bit.
std::vector<double> encode_probabilities(const BvaeModel& model, const Image& image);

// bit_i = 1 iff its category-1 probability exceeds 0.5. No noise.
BinaryVector encode(const BvaeModel& model, const Image& image);

struct DecodedDesign {
    Image continuous;  // decoder output after optional blur
    Image pattern;     // continuous thresholded at 0.5
};

DecodedDesign decode(const BvaeModel& model, const BinaryVector& x, double blur_radius_px = 0.0);

// Fraction of pixels where thresholded reconstructions match the thresholded inputs.
double reconstruction_pixel_accuracy(const BvaeModel& model, std::span<const Image> images);

// "BVAE v1 m=<m> n=<n>" checkpoint with LAYER blocks and a final TAU line.
void write_bvae(std::ostream& out, const BvaeModel& model);
BvaeModel read_bvae(std::istream& in);
void save_bvae(const std::filesystem::path& path, const BvaeModel& model);
BvaeModel load_bvae(const std::filesystem::path& path);

}  // namespace bvq
