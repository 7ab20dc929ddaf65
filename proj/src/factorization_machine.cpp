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

#include "bvq/factorization_machine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bvq/error.hpp"
#include "bvq/random.hpp"
#include "bvq/textio.hpp"

namespace bvq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_input(const FmModel& model, const BinaryVector& x) {
    if (x.size() != model.n())
        throw DimensionError("dimension mismatch: binary vector has length " +
                             std::to_string(x.size()) + " but the model expects " +
                             std::to_string(model.n()));
}

}  // namespace

FmModel::FmModel(std::size_t n, std::size_t k)
    : w0(0.0), w(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k))) {
    validate();
}

FmModel::FmModel(double w0_, Eigen::VectorXd w_, Eigen::MatrixXd v_)
    : w0(w0_), w(std::move(w_)), v(std::move(v_)) {
    validate();
}

void FmModel::validate() const {
    if (w.size() < 1) throw InvalidArgument("factorization machine needs n >= 1");
    if (v.cols() < 1) throw InvalidArgument("factorization machine needs rank k >= 1");
    if (v.rows() != w.size())
        throw InvalidArgument("factorization matrix has " + std::to_string(v.rows()) +
                              " rows but there are " + std::to_string(w.size()) +
                              " linear weights");
    if (!std::isfinite(w0) || !w.allFinite() || !v.allFinite())
        throw InvalidArgument("factorization machine parameters must be finite");
}

double fm_predict(const FmModel& model, const BinaryVector& x) {
    check_input(model, x);
    const auto k = static_cast<Eigen::Index>(model.k());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(k);
    double y = model.w0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i]) continue;
        const auto row = static_cast<Eigen::Index>(i);
        y += model.w[row];
        sum += model.v.row(row).transpose();
        sum_sq += model.v.row(row).transpose().cwiseAbs2();
    }
    return y + 0.5 * (sum.squaredNorm() - sum_sq.sum());
}

double fm_predict_naive(const FmModel& model, const BinaryVector& x) {
    check_input(model, x);
    double y = model.w0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i]) continue;
        y += model.w[static_cast<Eigen::Index>(i)];
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (x[j]) y += model.pairwise(i, j);
    }
    return y;
}

FmGradients fm_gradients(const FmModel& model, const BinaryVector& x, double residual) {
    check_input(model, x);
    const auto n = static_cast<Eigen::Index>(model.n());
    const auto k = static_cast<Eigen::Index>(model.k());
    const double scale = 2.0 * residual;
    FmGradients g;
    g.w0 = scale;
    g.w = Eigen::VectorXd::Zero(n);
    g.v = Eigen::MatrixXd::Zero(n, k);
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i)
        if (x[static_cast<std::size_t>(i)]) sum += model.v.row(i);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!x[static_cast<std::size_t>(i)]) continue;
        g.w[i] = scale;
        // x_i^2 = x_i for binary inputs
        g.v.row(i) = scale * (sum - model.v.row(i));
    }
    return g;
}

void FmTrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("FM training needs at least one epoch");
    if (!(learning_rate > 0.0)) throw InvalidArgument("FM learning rate must be positive");
    if (rank < 1) throw InvalidArgument("FM rank must be at least 1");
    if (!(init_scale >= 0.0)) throw InvalidArgument("FM init_scale must be non-negative");
    if (!(epsilon > 0.0)) throw InvalidArgument("FM epsilon must be positive");
    if (train_fraction <= 0.0 || val_fraction < 0.0 || test_fraction < 0.0)
        throw InvalidArgument("FM split fractions must be non-negative with a positive train share");
    if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
        throw InvalidArgument("FM split fractions must sum to 1");
}

DataSplit split_rows(std::size_t rows, const FmTrainConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, 0x5117));
    const auto order = rng.permutation(rows);
    auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * rows));
    auto n_val = static_cast<std::size_t>(std::llround(cfg.val_fraction * rows));
    n_train = std::clamp<std::size_t>(n_train, rows > 0 ? 1 : 0, rows);
    n_val = std::min(n_val, rows - n_train);
    DataSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                     order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return split;
}

double mean_squared_error(const FmModel& model, std::span<const BinaryVector> x,
                          std::span<const double> y, std::span<const std::size_t> rows) {
    if (rows.empty()) return kNaN;
    double total = 0.0;
    for (const auto r : rows) {
        const double e = fm_predict(model, x[r]) - y[r];
        total += e * e;
    }
    return total / static_cast<double>(rows.size());
}

// Constant labels have no variance to explain: r2 is 1 for an exact fit and 0 otherwise.
double r_squared(const FmModel& model, std::span<const BinaryVector> x,
                 std::span<const double> y, std::span<const std::size_t> rows) {
    if (rows.empty()) return kNaN;
    double mean = 0.0;
    for (const auto r : rows) mean += y[r];
    mean /= static_cast<double>(rows.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const auto r : rows) {
        const double e = fm_predict(model, x[r]) - y[r];
        ss_res += e * e;
        ss_tot += (y[r] - mean) * (y[r] - mean);
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

FmTrainResult fm_train(std::span<const BinaryVector> x, std::span<const double> y,
                       const FmTrainConfig& cfg, const FmModel* warm_start) {
    cfg.validate();
    if (x.empty()) throw InvalidArgument("cannot train a factorization machine on an empty dataset");
    if (x.size() != y.size())
        throw DimensionError("dataset has " + std::to_string(x.size()) + " vectors but " +
                             std::to_string(y.size()) + " labels");
    const std::size_t n = x.front().size();
    for (std::size_t r = 0; r < x.size(); ++r)
        if (x[r].size() != n)
            throw DimensionError("inconsistent vector lengths: row 0 has " + std::to_string(n) +
                                 " bits, row " + std::to_string(r) + " has " +
                                 std::to_string(x[r].size()));
    for (const double label : y)
        if (!std::isfinite(label)) throw InvalidArgument("training labels must be finite");

    FmModel model;
    if (warm_start != nullptr) {
        warm_start->validate();
        if (warm_start->n() != n || warm_start->k() != cfg.rank)
            throw InvalidArgument("warm start model has shape (" + std::to_string(warm_start->n()) +
                                  "," + std::to_string(warm_start->k()) + ") but training needs (" +
                                  std::to_string(n) + "," + std::to_string(cfg.rank) + ")");
        model = *warm_start;
    } else {
        model = FmModel(n, cfg.rank);
        Rng init_rng(derive_seed(cfg.seed, 0x1417));
        for (Eigen::Index i = 0; i < model.v.rows(); ++i)
            for (Eigen::Index f = 0; f < model.v.cols(); ++f)
                model.v(i, f) = init_rng.uniform(-cfg.init_scale, cfg.init_scale);
    }

    const auto split = split_rows(x.size(), cfg);
    const auto k = static_cast<Eigen::Index>(cfg.rank);

    // Adagrad accumulators.
    double acc_w0 = 0.0;
    Eigen::VectorXd acc_w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd acc_v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), k);
    auto step = [&](double& param, double& acc, double grad) {
        acc += grad * grad;
        param -= cfg.learning_rate * grad / (std::sqrt(acc) + cfg.epsilon);
    };

    FmTrainReport report;
    report.train_rows = split.train.size();
    report.val_rows = split.val.size();
    report.test_rows = split.test.size();
    Rng shuffle_rng(derive_seed(cfg.seed, 0x5407));
    std::vector<std::size_t> order = split.train;
    std::vector<Eigen::Index> active;
    active.reserve(n);
    Eigen::RowVectorXd sum(k);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (const auto r : order) {
            const auto& xr = x[r];
            active.clear();
            for (std::size_t i = 0; i < n; ++i)
                if (xr[i]) active.push_back(static_cast<Eigen::Index>(i));

            // Forward pass restricted to the active bits.
            sum.setZero();
            double sum_sq = 0.0;
            double pred = model.w0;
            for (const auto i : active) {
                pred += model.w[i];
                sum += model.v.row(i);
                sum_sq += model.v.row(i).squaredNorm();
            }
            pred += 0.5 * (sum.squaredNorm() - sum_sq);
            const double scale = 2.0 * (pred - y[r]);

            // Inactive bits have zero gradient.
            step(model.w0, acc_w0, scale);
            for (const auto i : active) {
                step(model.w[i], acc_w[i], scale);
                for (Eigen::Index f = 0; f < k; ++f)
                    step(model.v(i, f), acc_v(i, f), scale * (sum[f] - model.v(i, f)));
            }
        }
        report.loss_curve.push_back(mean_squared_error(model, x, y, split.train));
    }
    model.validate();

    report.final_train_mse = report.loss_curve.back();
    report.final_val_mse = mean_squared_error(model, x, y, split.val);
    report.test_mse = mean_squared_error(model, x, y, split.test);
    report.test_r2 = r_squared(model, x, y, split.test);
    return {std::move(model), std::move(report)};
}

FmTrainResult fm_train(const LabeledDataset& data, const FmTrainConfig& cfg,
                       const FmModel* warm_start) {
    return fm_train(std::span<const BinaryVector>(data.x()), std::span<const double>(data.y()),
                    cfg, warm_start);
}

TransformedLabels apply_label_transform(std::span<const double> labels, double margin) {
    if (labels.empty()) throw InvalidArgument("label transform needs at least one label");
    if (!(margin >= 0.0) || !std::isfinite(margin))
        throw InvalidArgument("label margin must be finite and non-negative");
    for (const double y : labels)
        if (!std::isfinite(y)) throw InvalidArgument("labels must be finite");
    TransformedLabels out;
    out.transform.margin = margin;
    out.transform.c = *std::max_element(labels.begin(), labels.end()) + margin;
    out.labels.reserve(labels.size());
    for (const double y : labels) out.labels.push_back(out.transform.apply(y));
    return out;
}

QuboProblem fm_to_qubo(const FmModel& model) {
    model.validate();
    const std::size_t n = model.n();
    std::vector<double> linear(model.w.data(), model.w.data() + model.w.size());
    const Eigen::MatrixXd gram = model.v * model.v.transpose();
    QuadraticMap quadratic;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            quadratic.emplace(IndexPair{i, j},
                              gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    return QuboProblem(std::move(linear), std::move(quadratic), model.w0);
}

SurrogateQubo fm_to_qubo(const FmModel& model, const LabelTransform& transform) {
    return {fm_to_qubo(model), transform};
}

void write_fm(std::ostream& out, const FmModel& model) {
    out << "FM v1 n=" << model.n() << " k=" << model.k() << '\n';
    out << "w0 " << textio::format_decimal(model.w0) << '\n';
    for (Eigen::Index i = 0; i < model.w.size(); ++i)
        out << "w " << i << ' ' << textio::format_decimal(model.w[i]) << '\n';
    for (Eigen::Index i = 0; i < model.v.rows(); ++i) {
        out << "V " << i;
        for (Eigen::Index f = 0; f < model.v.cols(); ++f)
            out << ' ' << textio::format_decimal(model.v(i, f));
        out << '\n';
    }
}

FmModel read_fm(std::istream& in) {
    std::string line;
    auto next_tokens = [&](const char* what) {
        while (std::getline(in, line)) {
            auto tokens = textio::split_ws(line);
            if (!tokens.empty()) return tokens;
        }
        throw FormatError(std::string("FM checkpoint truncated before ") + what);
    };
    auto header = next_tokens("header");
    if (header.size() != 4 || header[0] != "FM" || header[1] != "v1")
        throw FormatError("expected 'FM v1 n=<n> k=<k>' header");
    const auto n = static_cast<Eigen::Index>(textio::parse_uint(textio::header_value(header[2], "n")));
    const auto k = static_cast<Eigen::Index>(textio::parse_uint(textio::header_value(header[3], "k")));
    auto bias = next_tokens("w0");
    if (bias.size() != 2 || bias[0] != "w0") throw FormatError("expected 'w0 <decimal>'");
    const double w0 = textio::parse_double(bias[1]);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto t = next_tokens("linear weights");
        if (t.size() != 3 || t[0] != "w" ||
            textio::parse_uint(t[1]) != static_cast<std::uint64_t>(i))
            throw FormatError("expected 'w " + std::to_string(i) + " <decimal>'");
        w[i] = textio::parse_double(t[2]);
    }
    Eigen::MatrixXd v(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto t = next_tokens("factor rows");
        if (t.size() != static_cast<std::size_t>(k) + 2 || t[0] != "V" ||
            textio::parse_uint(t[1]) != static_cast<std::uint64_t>(i))
            throw FormatError("expected 'V " + std::to_string(i) + "' followed by " +
                              std::to_string(k) + " decimals");
        for (Eigen::Index f = 0; f < k; ++f)
            v(i, f) = textio::parse_double(t[static_cast<std::size_t>(f) + 2]);
    }
    return FmModel(w0, std::move(w), std::move(v));
}

void save_fm(const std::filesystem::path& path, const FmModel& model) {
    auto out = textio::open_output(path);
    write_fm(out, model);
}

FmModel load_fm(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_fm(in);
}

}  // namespace bvq
