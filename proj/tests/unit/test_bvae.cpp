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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "bvq/bvae.hpp"
#include "bvq/error.hpp"
#include "bvq/image.hpp"
#include "bvq/objectives.hpp"
#include "oracles.hpp"

using namespace bvq;

namespace {

BvaeArchitecture toy_arch() {
    BvaeArchitecture a;
    a.image_side = 4;
    a.latent_bits = 3;
    a.encoder_hidden = {6, 5};
    a.decoder_hidden = {5, 6};
    return a;
}

std::vector<Image> toy_batch(std::size_t side, std::size_t count, Rng& rng) {
    std::vector<Image> out;
    for (std::size_t b = 0; b < count; ++b) {
        std::vector<double> px(side * side);
        for (auto& p : px) p = rng.coin() ? 1.0 : 0.0;
        out.emplace_back(side, std::move(px));
    }
    return out;
}

BvaeModel train_toy(CorpusKind kind, std::size_t count) {
    BvaeTrainConfig cfg;
    cfg.seed = 2024;
    const auto corpus = generate_toy_corpus(kind, 8, count, 5);
    return bvae_train(corpus, BvaeArchitecture{}, cfg).model;
}

// Shared 8x8 models, trained once per test binary.
const BvaeModel& trained_half_plane_model() {
    static const BvaeModel model = train_toy(CorpusKind::HalfPlanes, 128);
    return model;
}

const BvaeModel& trained_blob_model() {
    static const BvaeModel model = train_toy(CorpusKind::Blobs, 256);
    return model;
}

}  // namespace

TEST_CASE("gumbel softmax") {
    const std::vector<double> equal = {0.3, 0.3};
    const std::vector<double> same_noise = {0.1, 0.1};
    for (double tau : {0.1, 1.0, 5.0}) {
        const auto y = gumbel_softmax(equal, tau, same_noise);
        CHECK(y[0] == doctest::Approx(0.5));
        CHECK(y[1] == doctest::Approx(0.5));
    }
    const std::vector<double> half = {std::log(0.5), std::log(0.5)};
    const std::vector<double> g = {1.0, 0.0};
    const auto y = gumbel_softmax(half, 1.0, g);
    CHECK(y[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(1.0 / (std::exp(1.0) + 1.0)).epsilon(1e-12));
    CHECK(y[0] == doctest::Approx(0.7311).epsilon(1e-4));

    const std::vector<double> lead = {0.0, 0.0};
    const std::vector<double> lead_noise = {0.2, 0.1};
    CHECK(gumbel_softmax(lead, 0.01, lead_noise)[0] >= 0.999);

    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const std::vector<double> logits = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const std::vector<double> noise = {rng.gumbel(), rng.gumbel(), rng.gumbel(), rng.gumbel()};
        const auto s = gumbel_softmax(logits, rng.uniform(0.4, 5.0), noise);
        CHECK(std::abs(s[0] + s[1] - 1.0) <= 1e-12);
        CHECK(std::abs(s[2] + s[3] - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(gumbel_softmax(lead, 0.0, lead_noise), InvalidArgument);
    CHECK_THROWS_AS(gumbel_softmax(std::vector<double>{0.0, 0.0, 0.0}, 1.0, std::vector<double>{0.0, 0.0, 0.0}),
                    DimensionError);
}

TEST_CASE("temperature schedule") {
    TemperatureSchedule s;
    CHECK(anneal_tau(s, 0).tau == 5.0);
    CHECK(anneal_tau(s, 1).tau == doctest::Approx(5.0 * std::exp(-0.0003)).epsilon(1e-15));
    CHECK(anneal_tau(s, 1).tau == doctest::Approx(4.99850).epsilon(1e-6));
    s.tau = 0.41;
    CHECK(anneal_tau(s, 500).tau == 0.4);
    TemperatureSchedule bad;
    bad.tau_min = 6.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("bernoulli kl") {
    CHECK(bernoulli_kl(0.5) == doctest::Approx(0.0));
    CHECK(bernoulli_kl(1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-5));
    CHECK(bernoulli_kl(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-5));
    CHECK(bernoulli_kl(0.75) == doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-12));
    CHECK(std::abs(bernoulli_kl(0.75) - 0.13081) <= 1e-4);
    CHECK(bernoulli_kl(0.3, 0.3) == doctest::Approx(0.0));
    CHECK_THROWS_AS(bernoulli_kl(1.5), InvalidArgument);
    CHECK_THROWS_AS(bernoulli_kl(0.5, 0.0), InvalidArgument);
}

TEST_CASE("model initialisation and shapes") {
    const auto m = BvaeModel::initialize(toy_arch(), 3);
    REQUIRE(m.encoder.size() == 3);
    REQUIRE(m.decoder.size() == 3);
    CHECK(m.encoder[0].weight.rows() == 6);
    CHECK(m.encoder[0].weight.cols() == 16);
    CHECK(m.encoder[2].weight.rows() == 6);
    CHECK(m.decoder[0].weight.cols() == 3);
    CHECK(m.decoder[2].weight.rows() == 16);
    CHECK(m.parameter_count() == (16 * 6 + 6) + (6 * 5 + 5) + (5 * 6 + 6) + (3 * 5 + 5) + (5 * 6 + 6) + (6 * 16 + 16));
    CHECK(BvaeModel::initialize(toy_arch(), 3).encoder[1].weight == m.encoder[1].weight);
    CHECK_FALSE(BvaeModel::initialize(toy_arch(), 4).encoder[1].weight == m.encoder[1].weight);
}

TEST_CASE("bvae gradients against central differences") {
    Rng rng(31);
    const auto arch = toy_arch();
    const auto batch = toy_batch(4, 3, rng);
    const auto noise = sample_gumbel_noise(arch.latent_bits, batch.size(), rng);
    CHECK(noise.rows() == 6);
    CHECK(noise.cols() == 3);
    auto model = BvaeModel::initialize(arch, 8);
    // Non-zero biases.
    for (auto* layers : {&model.encoder, &model.decoder})
        for (auto& l : *layers)
            for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = rng.uniform(0.05, 0.2);
    const double tau = 0.9;
    const auto analytic = bvae_loss_and_gradients(model, batch, tau, noise);
    CHECK(analytic.loss.total == doctest::Approx(bvae_loss(model, batch, tau, noise).total).epsilon(1e-12));
    CHECK(analytic.loss.total == doctest::Approx(analytic.loss.reconstruction + analytic.loss.kl).epsilon(1e-12));

    constexpr double h = 1e-5;
    std::size_t checked = 0;
    auto check_layers = [&](std::vector<DenseLayer> BvaeModel::*member,
                            const std::vector<DenseLayer>& grads) {
        for (std::size_t l = 0; l < grads.size(); ++l) {
            auto numeric = [&](auto&& element) {
                BvaeModel plus = model, minus = model;
                element(plus) += h;
                element(minus) -= h;
                return (bvae_loss(plus, batch, tau, noise).total - bvae_loss(minus, batch, tau, noise).total) / (2 * h);
            };
            auto close = [](double a, double b) {
                return std::abs(a - b) <= 1e-3 * std::max({std::abs(a), std::abs(b), 1e-3});
            };
            const auto& g = grads[l];
            for (Eigen::Index r = 0; r < g.weight.rows(); ++r) {
                for (Eigen::Index c = 0; c < g.weight.cols(); ++c) {
                    const double fd = numeric([&](BvaeModel& m) -> double& { return (m.*member)[l].weight(r, c); });
                    CHECK_MESSAGE(close(g.weight(r, c), fd), g.name, " weight ", r, ",", c);
                    ++checked;
                }
                const double fd = numeric([&](BvaeModel& m) -> double& { return (m.*member)[l].bias(r); });
                CHECK_MESSAGE(close(g.bias(r), fd), g.name, " bias ", r);
                ++checked;
            }
        }
    };
    check_layers(&BvaeModel::encoder, analytic.gradients.encoder);
    check_layers(&BvaeModel::decoder, analytic.gradients.decoder);
    CHECK(checked == model.parameter_count());
}

TEST_CASE("single image memorisation") {
    Rng rng(4);
    const auto images = toy_batch(8, 1, rng);
    BvaeTrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 1;
    const auto result = bvae_train(images, BvaeArchitecture{}, cfg);
    REQUIRE(result.history.size() == 10);
    int rises = 0;
    for (std::size_t e = 1; e < 10; ++e) rises += result.history[e].train.reconstruction > result.history[e - 1].train.reconstruction;
    CHECK(rises <= 2);
    CHECK(result.history.back().train.reconstruction < result.history.front().train.reconstruction);
    CHECK(result.model.tau < 5.0);
}

TEST_CASE("training input errors") {
    BvaeTrainConfig cfg;
    CHECK_THROWS_AS(bvae_train(std::vector<Image>{}, BvaeArchitecture{}, cfg), InvalidArgument);
    CHECK_THROWS_AS(bvae_train(std::vector<Image>{Image(7)}, BvaeArchitecture{}, cfg), DimensionError);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("encode and decode on a trained toy model") {
    const auto& model = trained_half_plane_model();
    const auto patterns = half_plane_patterns(8);
    CHECK(reconstruction_pixel_accuracy(model, patterns) >= 0.95);
    CHECK(encode(model, patterns[3]) == encode(model, patterns[3]));
    CHECK_THROWS_AS(encode(model, Image(7)), DimensionError);
    CHECK_THROWS_AS(decode(model, BinaryVector(15)), DimensionError);

    Rng rng(12);
    for (const auto& p : patterns) {
        const auto code = encode(model, p);
        CHECK(encode(model, decode(model, code).pattern) == code);
    }

    const auto x = bvq::testing::random_bits(16, rng);
    CHECK(decode(model, x, 0.0).continuous == decode(model, x).continuous);
    CHECK(decode(model, x, 1.0).continuous == decode(model, x, 1.0).continuous);
    CHECK_THROWS_AS(decode(model, x, -1.0), InvalidArgument);
}

TEST_CASE("random latents survive a decode and re-encode") {
    // Half-planes span four bits; blobs use all sixteen.
    const auto& model = trained_blob_model();
    Rng rng(12);
    std::size_t agree = 0, total = 0;
    for (int t = 0; t < 200; ++t) {
        const auto x = bvq::testing::random_bits(16, rng);
        const auto d = decode(model, x);
        CHECK(d.pattern.is_binary());
        CHECK(d.pattern == d.continuous.thresholded());
        total += 16;
        agree += 16 - hamming_distance(x, encode(model, d.pattern));
    }
    MESSAGE("encode(decode(x)) bit agreement ", static_cast<double>(agree) / static_cast<double>(total));
    CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.90);
}

TEST_CASE("bvae checkpoint round trip") {
    auto model = BvaeModel::initialize(toy_arch(), 19);
    model.tau = 1.0 / 3.0;
    std::stringstream buf;
    write_bvae(buf, model);
    const auto back = read_bvae(buf);
    CHECK(back.arch == model.arch);
    CHECK(back.tau == model.tau);
    for (std::size_t l = 0; l < model.encoder.size(); ++l) {
        CHECK(back.encoder[l].weight == model.encoder[l].weight);
        CHECK(back.encoder[l].bias == model.encoder[l].bias);
        CHECK(back.decoder[l].weight == model.decoder[l].weight);
        CHECK(back.decoder[l].bias == model.decoder[l].bias);
    }
    std::stringstream no_tau(buf.str().substr(0, buf.str().rfind("TAU")));
    CHECK_THROWS_AS(read_bvae(no_tau), FormatError);
}

TEST_CASE("gaussian blur") {
    const Image flat(6, 0.3);
    const auto blurred = gaussian_blur(flat, 1.5);
    for (double p : blurred.pixels()) CHECK(p == doctest::Approx(0.3).epsilon(1e-12));
    Rng rng(2);
    const auto img = toy_batch(5, 1, rng)[0];
    CHECK(gaussian_blur(img, 0.0) == img);
    Image dot(11, 0.0);
    dot(5, 5) = 1.0;
    const auto spread = gaussian_blur(dot, 1.0);
    double sum = 0.0;
    for (double p : spread.pixels()) sum += p;
    CHECK(sum == doctest::Approx(1.0));
    CHECK(spread(5, 5) < 1.0);
    CHECK(spread(5, 4) == doctest::Approx(spread(4, 5)));
    CHECK(spread(5, 1) == 0.0);
    CHECK_THROWS_AS(gaussian_blur(img, -0.5), InvalidArgument);
}

TEST_CASE("image construction and files") {
    CHECK_THROWS_AS(Image(0), InvalidArgument);
    CHECK_THROWS_AS(Image(2, std::vector<double>{0.0, 1.0, 0.5}), DimensionError);
    CHECK_THROWS_AS(Image(1, std::vector<double>{1.5}), InvalidArgument);
    Image g(2, std::vector<double>{0.0, 0.2, 0.6, 1.0});
    CHECK_FALSE(g.is_binary());
    CHECK(g.thresholded() == Image(2, std::vector<double>{0.0, 0.0, 1.0, 1.0}));

    std::stringstream pgm;
    write_pgm(pgm, g.thresholded());
    CHECK(read_pgm(pgm) == g.thresholded());
    std::stringstream commented("P2\n# made by hand\n2 2\n255\n0 255\n255 0\n");
    CHECK(read_pgm(commented) == Image(2, std::vector<double>{0.0, 1.0, 1.0, 0.0}));

    const std::vector<Image> set = {g, g.thresholded(), Image(2, 1.0 / 3.0)};
    std::stringstream buf;
    write_image_set(buf, 2, set);
    CHECK(read_image_set(buf) == set);
    std::stringstream wrong("IMG v1 m=2 count=2\n0101\n");
    CHECK_THROWS_AS(read_image_set(wrong), FormatError);
}
