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
#include "bvq/dataset.hpp"
#include "bvq/error.hpp"
#include "bvq/factorization_machine.hpp"
#include "bvq/samplers.hpp"
#include "oracles.hpp"

using namespace bvq;

namespace {

FmModel two_var_model() {
    Eigen::VectorXd w(2);
    w << 1.0, -1.0;
    Eigen::MatrixXd v(2, 1);
    v << 2.0, 3.0;
    return FmModel(0.5, w, v);
}

double squared_error(const FmModel& m, const BinaryVector& x, double target) {
    const double r = fm_predict(m, x) - target;
    return r * r;
}

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("fm prediction") {
    const auto m = two_var_model();
    CHECK(fm_predict(m, BinaryVector::from_string("11")) == doctest::Approx(6.5));
    CHECK(fm_predict(m, BinaryVector::from_string("00")) == 0.5);
    CHECK(fm_predict(m, BinaryVector::from_string("10")) == doctest::Approx(1.5));
    CHECK_THROWS_AS(fm_predict(m, BinaryVector(3)), DimensionError);

    Rng rng(1);
    for (int t = 0; t < 30; ++t) {
        const auto r = bvq::testing::random_fm(11, 4, rng);
        const auto x = bvq::testing::random_bits(11, rng);
        CHECK(fm_predict(r, x) == doctest::Approx(fm_predict_naive(r, x)).epsilon(1e-12));
    }
}

TEST_CASE("fm model validation") {
    CHECK_THROWS_AS(FmModel(0, 2), InvalidArgument);
    CHECK_THROWS_AS(FmModel(3, 0), InvalidArgument);
    CHECK_THROWS_AS(FmModel(0.0, Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Zero(2, 1)), InvalidArgument);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
    w(1) = NAN;
    CHECK_THROWS_AS(FmModel(0.0, w, Eigen::MatrixXd::Zero(2, 1)), InvalidArgument);
}

TEST_CASE("fm gradients against central differences") {
    constexpr double h = 1e-5;
    Rng rng(77);
    auto check_model = [&](const FmModel& model, const BinaryVector& x, double target) {
        const double residual = fm_predict(model, x) - target;
        const auto g = fm_gradients(model, x, residual);
        auto perturbed = [&](auto&& poke) {
            FmModel plus = model, minus = model;
            poke(plus, h);
            poke(minus, -h);
            return (squared_error(plus, x, target) - squared_error(minus, x, target)) / (2 * h);
        };
        CHECK(relative_error(g.w0, perturbed([](FmModel& m, double d) { m.w0 += d; })) <= 1e-4);
        for (Eigen::Index i = 0; i < model.w.size(); ++i) {
            CHECK(relative_error(g.w(i), perturbed([&](FmModel& m, double d) { m.w(i) += d; })) <= 1e-4);
            for (Eigen::Index f = 0; f < model.v.cols(); ++f)
                CHECK(relative_error(g.v(i, f), perturbed([&](FmModel& m, double d) { m.v(i, f) += d; })) <= 1e-4);
        }
    };
    check_model(two_var_model(), BinaryVector::from_string("11"), 1.0);
    check_model(two_var_model(), BinaryVector::from_string("10"), -2.0);
    for (int t = 0; t < 20; ++t)
        check_model(bvq::testing::random_fm(7, 3, rng), bvq::testing::random_bits(7, rng), rng.uniform(-1.0, 1.0));
}

TEST_CASE("fm gradients on degenerate inputs") {
    Rng rng(3);
    const auto m = bvq::testing::random_fm(5, 2, rng);
    const auto zero_x = fm_gradients(m, BinaryVector(5), 0.7);
    CHECK(zero_x.w0 == doctest::Approx(1.4));
    CHECK(zero_x.w.isZero(0.0));
    CHECK(zero_x.v.isZero(0.0));
    const auto zero_r = fm_gradients(m, BinaryVector::from_string("10111"), 0.0);
    CHECK(zero_r.w0 == 0.0);
    CHECK(zero_r.w.isZero(0.0));
    CHECK(zero_r.v.isZero(0.0));
}

TEST_CASE("row splits") {
    FmTrainConfig cfg;
    const auto s = split_rows(100, cfg);
    CHECK(s.train.size() == 70);
    CHECK(s.val.size() == 10);
    CHECK(s.test.size() == 20);
    std::vector<int> seen(100, 0);
    for (const auto* part : {&s.train, &s.val, &s.test})
        for (auto r : *part) ++seen[r];
    for (int c : seen) CHECK(c == 1);
    cfg.train_fraction = 0.8;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("fm training on constant labels") {
    Rng rng(9);
    std::vector<BinaryVector> x;
    std::vector<double> y;
    for (int r = 0; r < 200; ++r) {
        x.push_back(bvq::testing::random_bits(8, rng));
        y.push_back(0.7);
    }
    FmTrainConfig cfg;
    cfg.epochs = 100;
    cfg.rank = 3;
    cfg.seed = 4;
    const auto result = fm_train(x, y, cfg);
    CHECK(result.report.test_mse <= 1e-4);
    CHECK(result.model.w0 == doctest::Approx(0.7).epsilon(0.02));
    CHECK(result.model.w.cwiseAbs().maxCoeff() <= 0.02);
    double max_pair = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = i + 1; j < 8; ++j) max_pair = std::max(max_pair, std::abs(result.model.pairwise(i, j)));
    CHECK(max_pair <= 0.02);
}

TEST_CASE("fm training recovers a planted model") {
    Rng rng(123);
    const auto planted = bvq::testing::random_fm(8, 2, rng, 0.5);
    std::vector<BinaryVector> x;
    std::vector<double> y;
    for (int r = 0; r < 300; ++r) {
        x.push_back(bvq::testing::random_bits(8, rng));
        y.push_back(fm_predict(planted, x.back()));
    }
    FmTrainConfig cfg;
    cfg.epochs = 100;
    cfg.rank = 2;
    cfg.seed = 1;
    const auto result = fm_train(x, y, cfg);
    CHECK(result.report.test_r2 >= 0.95);
    CHECK(result.report.loss_curve.size() == 100);
    CHECK(result.report.loss_curve.back() < result.report.loss_curve.front());

    const auto again = fm_train(x, y, cfg);
    CHECK(again.model.v == result.model.v);

    FmTrainConfig more = cfg;
    more.epochs = 5;
    const auto warm = fm_train(x, y, more, &result.model);
    CHECK(warm.report.test_r2 >= 0.95);
}

TEST_CASE("fm training input errors") {
    FmTrainConfig cfg;
    CHECK_THROWS_AS(fm_train(std::span<const BinaryVector>{}, std::span<const double>{}, cfg), InvalidArgument);
    const std::vector<BinaryVector> x = {BinaryVector(3), BinaryVector(3)};
    const std::vector<double> y = {1.0};
    CHECK_THROWS_AS(fm_train(x, y, cfg), DimensionError);
    const std::vector<double> y2 = {1.0, 2.0};
    const FmModel wrong(4, cfg.rank);
    CHECK_THROWS_AS(fm_train(x, y2, cfg, &wrong), InvalidArgument);
    CHECK_THROWS_AS(fm_train(LabeledDataset(3), cfg), InvalidArgument);
}

TEST_CASE("label transform") {
    const std::vector<double> labels = {0.2, 0.9};
    const auto t = apply_label_transform(labels, 0.1);
    CHECK(t.transform.c == doctest::Approx(1.0));
    CHECK(t.labels[0] == doctest::Approx(0.8));
    CHECK(t.labels[1] == doctest::Approx(0.1));
    CHECK(t.transform.invert(t.labels[0]) == doctest::Approx(0.2));

    Rng rng(6);
    std::vector<double> random(40);
    for (auto& v : random) v = rng.uniform();
    const auto z = apply_label_transform(random, 0.0);
    const auto argmax = std::max_element(random.begin(), random.end()) - random.begin();
    CHECK(std::min_element(z.labels.begin(), z.labels.end()) - z.labels.begin() == argmax);
    CHECK(*std::min_element(z.labels.begin(), z.labels.end()) == 0.0);
    for (double v : z.labels) CHECK(v >= 0.0);
    CHECK_THROWS_AS(apply_label_transform(std::span<const double>{}, 0.1), InvalidArgument);
}

TEST_CASE("fm to qubo") {
    const auto q = fm_to_qubo(two_var_model());
    CHECK(q.linear()[0] == 1.0);
    CHECK(q.linear()[1] == -1.0);
    CHECK(q.coupling(0, 1) == 6.0);
    CHECK(q.offset() == 0.5);
    CHECK(brute_force_sample(q, 1).best().bits.to_string() == "01");

    const auto zero = fm_to_qubo(FmModel(4, 2));
    CHECK(zero.edge_count() == 0);
    const auto flat = brute_force_sample(zero, 16);
    CHECK(flat.size() == 16);
    CHECK(flat.entries.back().energy == 0.0);

    Rng rng(10);
    for (int t = 0; t < 5; ++t) {
        const auto m = bvq::testing::random_fm(10, 3, rng);
        const auto qm = fm_to_qubo(m);
        for (int s = 0; s < 100; ++s) {
            const auto x = bvq::testing::random_bits(10, rng);
            CHECK(std::abs(qubo_energy(qm, x) - fm_predict(m, x)) <= 1e-9);
        }
    }

    const LabelTransform tr{1.5, 0.1};
    const auto s = fm_to_qubo(two_var_model(), tr);
    CHECK(s.fom_from_energy(-0.5) == 2.0);
}

TEST_CASE("fm checkpoint round trip") {
    Rng rng(12);
    auto m = bvq::testing::random_fm(6, 3, rng, 1e4);
    m.w(2) = 1.0 / 3.0;
    std::stringstream buf;
    write_fm(buf, m);
    const auto back = read_fm(buf);
    CHECK(back.w0 == m.w0);
    CHECK(back.w == m.w);
    CHECK(back.v == m.v);
    std::stringstream truncated(buf.str().substr(0, buf.str().size() / 2));
    CHECK_THROWS_AS(read_fm(truncated), FormatError);
}
