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

#include "bvq/bvae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bvq/error.hpp"
#include "bvq/textio.hpp"

namespace bvq {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

MatrixXd sigmoid(const MatrixXd& m) { return m.unaryExpr([](double t) { return sigmoid(t); }); }

std::vector<DenseLayer> make_stack(const std::string& prefix, std::size_t inputs,
                                   const std::vector<std::size_t>& hidden, std::size_t outputs,
                                   Rng& rng) {
    std::vector<DenseLayer> stack;
    std::size_t fan_in = inputs;
    for (std::size_t l = 0; l <= hidden.size(); ++l) {
        const bool last = l == hidden.size();
        const std::size_t fan_out = last ? outputs : hidden[l];
        const double limit = last ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                                  : std::sqrt(6.0 / static_cast<double>(fan_in));
        DenseLayer layer;
        layer.name = prefix + std::to_string(l);
        layer.weight.resize(static_cast<Index>(fan_out), static_cast<Index>(fan_in));
        for (Index r = 0; r < layer.weight.rows(); ++r)
            for (Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = rng.uniform(-limit, limit);
        layer.bias = VectorXd::Zero(static_cast<Index>(fan_out));
        stack.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return stack;
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& stack) {
    std::vector<DenseLayer> out;
    out.reserve(stack.size());
    for (const auto& layer : stack)
        out.push_back({layer.name, MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                       VectorXd::Zero(layer.bias.size())});
    return out;
}

// Post-activation values of every layer; hidden layers use ReLU and the
// last layer is left linear. activations[0] is the stack input.
struct StackTrace {
    std::vector<MatrixXd> activations;
    const MatrixXd& output() const { return activations.back(); }
};

StackTrace forward_stack(const std::vector<DenseLayer>& stack, MatrixXd input) {
    StackTrace trace;
    trace.activations.reserve(stack.size() + 1);
    trace.activations.push_back(std::move(input));
    for (std::size_t l = 0; l < stack.size(); ++l) {
        MatrixXd z = stack[l].weight * trace.activations.back();
        z.colwise() += stack[l].bias;
        if (l + 1 < stack.size()) z = z.cwiseMax(0.0);
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

// Accumulates parameter gradients and returns the gradient at the stack input.
MatrixXd backward_stack(const std::vector<DenseLayer>& stack, const StackTrace& trace,
                        MatrixXd upstream, std::vector<DenseLayer>& grads) {
    for (std::size_t l = stack.size(); l-- > 0;) {
        if (l + 1 < stack.size())
            upstream = upstream.cwiseProduct(
                trace.activations[l + 1].unaryExpr([](double a) { return a > 0.0 ? 1.0 : 0.0; }));
        grads[l].weight.noalias() += upstream * trace.activations[l].transpose();
        grads[l].bias += upstream.rowwise().sum();
        upstream = stack[l].weight.transpose() * upstream;
    }
    return upstream;
}

MatrixXd batch_matrix(const BvaeModel& model, std::span<const Image> batch) {
    const auto pixels = static_cast<Index>(model.arch.input_size());
    MatrixXd x(pixels, static_cast<Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (batch[b].side() != model.arch.image_side)
            throw DimensionError("image of side " + std::to_string(batch[b].side()) +
                                 " given to a model of side " +
                                 std::to_string(model.arch.image_side));
        x.col(static_cast<Index>(b)) = Eigen::Map<const VectorXd>(batch[b].pixels().data(), pixels);
    }
    return x;
}

// Logit difference d_i = logit(category 1) - logit(category 0) per bit.
MatrixXd logit_gaps(const MatrixXd& logits) {
    const Index bits = logits.rows() / 2;
    MatrixXd d(bits, logits.cols());
    for (Index i = 0; i < bits; ++i) d.row(i) = logits.row(2 * i + 1) - logits.row(2 * i);
    return d;
}

struct Forward {
    StackTrace encoder;
    MatrixXd gaps;     // n x B
    MatrixXd relaxed;  // n x B, category-1 component
    StackTrace decoder;
};

Forward forward(const BvaeModel& model, const MatrixXd& x, double tau, const MatrixXd& noise) {
    if (!(tau > 0.0)) throw InvalidArgument("Gumbel-softmax temperature must be positive");
    const auto bits = static_cast<Index>(model.arch.latent_bits);
    if (noise.rows() != 2 * bits || noise.cols() != x.cols())
        throw DimensionError("Gumbel noise must be " + std::to_string(2 * bits) + " x " +
                             std::to_string(x.cols()));
    Forward f;
    f.encoder = forward_stack(model.encoder, x);
    f.gaps = logit_gaps(f.encoder.output());
    f.relaxed.resize(bits, x.cols());
    for (Index i = 0; i < bits; ++i)
        for (Index b = 0; b < x.cols(); ++b)
            f.relaxed(i, b) =
                sigmoid((f.gaps(i, b) + noise(2 * i + 1, b) - noise(2 * i, b)) / tau);
    f.decoder = forward_stack(model.decoder, f.relaxed);
    return f;
}

LossBreakdown loss_from(const Forward& f, const MatrixXd& x) {
    const MatrixXd& out = f.decoder.output();
    const double batch = static_cast<double>(x.cols());
    double recon = 0.0;
    for (Index b = 0; b < out.cols(); ++b)
        for (Index p = 0; p < out.rows(); ++p) recon += softplus(out(p, b)) - x(p, b) * out(p, b);
    // KL(q || 1/2) = q d - softplus(d) + ln 2 with q = sigmoid(d); exact for any d.
    double kl = 0.0;
    for (Index b = 0; b < f.gaps.cols(); ++b)
        for (Index i = 0; i < f.gaps.rows(); ++i) {
            const double d = f.gaps(i, b);
            kl += std::max(0.0, sigmoid(d) * d - softplus(d) + std::numbers::ln2);
        }
    LossBreakdown loss;
    loss.reconstruction = recon / batch;
    loss.kl = kl / batch;
    loss.total = loss.reconstruction + loss.kl;
    return loss;
}

}  // namespace

void BvaeArchitecture::validate() const {
    if (image_side < 1) throw InvalidArgument("bVAE image side must be positive");
    if (latent_bits < 1) throw InvalidArgument("bVAE needs at least one latent bit");
    for (const auto h : encoder_hidden)
        if (h < 1) throw InvalidArgument("bVAE hidden layers must be non-empty");
    for (const auto h : decoder_hidden)
        if (h < 1) throw InvalidArgument("bVAE hidden layers must be non-empty");
}

BvaeModel BvaeModel::initialize(const BvaeArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng(seed);
    BvaeModel model;
    model.arch = arch;
    model.encoder = make_stack("enc", arch.input_size(), arch.encoder_hidden, arch.logit_count(), rng);
    model.decoder = make_stack("dec", arch.latent_bits, arch.decoder_hidden, arch.input_size(), rng);
    return model;
}

void BvaeModel::validate() const {
    arch.validate();
    auto check = [](const std::vector<DenseLayer>& stack, std::size_t inputs,
                    const std::vector<std::size_t>& hidden, std::size_t outputs, const char* what) {
        if (stack.size() != hidden.size() + 1)
            throw InvalidArgument(std::string(what) + " layer count does not match architecture");
        std::size_t fan_in = inputs;
        for (std::size_t l = 0; l < stack.size(); ++l) {
            const std::size_t fan_out = l < hidden.size() ? hidden[l] : outputs;
            const auto& layer = stack[l];
            if (layer.weight.rows() != static_cast<Index>(fan_out) ||
                layer.weight.cols() != static_cast<Index>(fan_in) ||
                layer.bias.size() != static_cast<Index>(fan_out))
                throw InvalidArgument(std::string(what) + " layer " + std::to_string(l) +
                                      " has inconsistent shape");
            if (!layer.weight.allFinite() || !layer.bias.allFinite())
                throw InvalidArgument(std::string(what) + " parameters must be finite");
            fan_in = fan_out;
        }
    };
    check(encoder, arch.input_size(), arch.encoder_hidden, arch.logit_count(), "encoder");
    check(decoder, arch.latent_bits, arch.decoder_hidden, arch.input_size(), "decoder");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("bVAE temperature must be positive");
}

std::size_t BvaeModel::parameter_count() const {
    std::size_t count = 0;
    for (const auto* stack : {&encoder, &decoder})
        for (const auto& layer : *stack)
            count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    return count;
}

void TemperatureSchedule::validate() const {
    if (!(tau_min > 0.0) || !(tau_max >= tau_min))
        throw InvalidArgument("temperature bounds must satisfy 0 < tau_min <= tau_max");
    if (!(tau >= tau_min && tau <= tau_max))
        throw InvalidArgument("temperature must lie within [tau_min, tau_max]");
    if (!(gamma >= 0.0)) throw InvalidArgument("temperature annealing rate must be non-negative");
}

TemperatureSchedule anneal_tau(const TemperatureSchedule& schedule, std::size_t epoch) {
    TemperatureSchedule next = schedule;
    next.tau = std::clamp(schedule.tau * std::exp(-schedule.gamma * static_cast<double>(epoch)),
                          schedule.tau_min, schedule.tau_max);
    return next;
}

std::vector<double> gumbel_softmax(std::span<const double> logits, double tau,
                                   std::span<const double> noise) {
    if (!(tau > 0.0)) throw InvalidArgument("Gumbel-softmax temperature must be positive");
    if (logits.size() % 2 != 0) throw DimensionError("logits must come in category pairs");
    if (noise.size() != logits.size())
        throw DimensionError("Gumbel noise must match the logits in length");
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); i += 2) {
        const double a = (logits[i] + noise[i]) / tau;
        const double b = (logits[i + 1] + noise[i + 1]) / tau;
        const double top = std::max(a, b);
        const double ea = std::exp(a - top);
        const double eb = std::exp(b - top);
        out[i] = ea / (ea + eb);
        out[i + 1] = eb / (ea + eb);
    }
    return out;
}

Eigen::MatrixXd sample_gumbel_noise(std::size_t latent_bits, std::size_t batch, Rng& rng) {
    MatrixXd noise(static_cast<Index>(2 * latent_bits), static_cast<Index>(batch));
    for (Index b = 0; b < noise.cols(); ++b)
        for (Index r = 0; r < noise.rows(); ++r) noise(r, b) = rng.gumbel();
    return noise;
}

double bernoulli_kl(double q, double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("prior probability must lie in (0, 1)");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("posterior probability must lie in [0, 1]");
    q = std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return q * std::log(q / p) + (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
}

LossBreakdown bvae_loss(const BvaeModel& model, std::span<const Image> batch, double tau,
                        const Eigen::MatrixXd& noise) {
    const MatrixXd x = batch_matrix(model, batch);
    return loss_from(forward(model, x, tau, noise), x);
}

LossAndGradients bvae_loss_and_gradients(const BvaeModel& model, std::span<const Image> batch,
                                         double tau, const Eigen::MatrixXd& noise) {
    if (batch.empty()) throw InvalidArgument("loss needs at least one image");
    const MatrixXd x = batch_matrix(model, batch);
    const Forward f = forward(model, x, tau, noise);
    LossAndGradients result;
    result.loss = loss_from(f, x);
    result.gradients.encoder = zeros_like(model.encoder);
    result.gradients.decoder = zeros_like(model.decoder);

    const double inv_batch = 1.0 / static_cast<double>(x.cols());
    // d BCE / d output logit = sigmoid(o) - y
    MatrixXd d_out = (sigmoid(f.decoder.output()) - x) * inv_batch;
    const MatrixXd d_relaxed = backward_stack(model.decoder, f.decoder, std::move(d_out),
                                              result.gradients.decoder);

    const Index bits = f.gaps.rows();
    MatrixXd d_logits = MatrixXd::Zero(2 * bits, x.cols());
    for (Index i = 0; i < bits; ++i)
        for (Index b = 0; b < x.cols(); ++b) {
            const double z = f.relaxed(i, b);
            const double d = f.gaps(i, b);
            const double q = sigmoid(d);
            const double grad = d_relaxed(i, b) * z * (1.0 - z) / tau + d * q * (1.0 - q) * inv_batch;
            d_logits(2 * i + 1, b) = grad;
            d_logits(2 * i, b) = -grad;
        }
    backward_stack(model.encoder, f.encoder, std::move(d_logits), result.gradients.encoder);
    return result;
}

void BvaeTrainConfig::validate() const {
    if (epochs < 1) throw InvalidArgument("bVAE training needs at least one epoch");
    if (batch_size < 1) throw InvalidArgument("bVAE batch size must be positive");
    if (!(learning_rate > 0.0)) throw InvalidArgument("bVAE learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw InvalidArgument("Adam betas must lie in [0, 1)");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw InvalidArgument("validation fraction must lie in [0, 1)");
    temperature.validate();
}

namespace {

struct AdamState {
    std::vector<DenseLayer> m;
    std::vector<DenseLayer> v;
};

void adam_update(std::vector<DenseLayer>& params, const std::vector<DenseLayer>& grads,
                 AdamState& state, const BvaeTrainConfig& cfg, std::size_t step) {
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    const double lr = cfg.learning_rate;
    const double eps = cfg.epsilon;
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < params.size(); ++l) {
        update(params[l].weight, grads[l].weight, state.m[l].weight, state.v[l].weight);
        update(params[l].bias, grads[l].bias, state.m[l].bias, state.v[l].bias);
    }
}

LossBreakdown weighted_mean(const std::vector<std::pair<LossBreakdown, std::size_t>>& parts) {
    LossBreakdown out;
    std::size_t total = 0;
    for (const auto& [loss, count] : parts) {
        out.reconstruction += loss.reconstruction * static_cast<double>(count);
        out.kl += loss.kl * static_cast<double>(count);
        total += count;
    }
    if (total == 0) return {kNaN, kNaN, kNaN};
    out.reconstruction /= static_cast<double>(total);
    out.kl /= static_cast<double>(total);
    out.total = out.reconstruction + out.kl;
    return out;
}

}  // namespace

BvaeTrainResult bvae_train(std::span<const Image> images, const BvaeArchitecture& arch,
                           const BvaeTrainConfig& cfg, const BvaeEpochCallback& on_epoch) {
    cfg.validate();
    arch.validate();
    if (images.empty()) throw InvalidArgument("cannot train a bVAE on an empty dataset");
    for (const auto& image : images)
        if (image.side() != arch.image_side)
            throw DimensionError("training image of side " + std::to_string(image.side()) +
                                 " for an architecture of side " + std::to_string(arch.image_side));

    BvaeTrainResult result;
    result.model = BvaeModel::initialize(arch, derive_seed(cfg.seed, 0xB1A5));
    auto& model = result.model;

    Rng split_rng(derive_seed(cfg.seed, 0x5117));
    const auto order = split_rng.permutation(images.size());
    const auto n_val = std::min<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(images.size()))),
        images.size() - 1);
    std::vector<Image> validation;
    std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    for (std::size_t i = 0; i < n_val; ++i) validation.push_back(images[order[i]]);

    AdamState enc_state{zeros_like(model.encoder), zeros_like(model.encoder)};
    AdamState dec_state{zeros_like(model.decoder), zeros_like(model.decoder)};
    Rng shuffle_rng(derive_seed(cfg.seed, 0x5407));
    Rng noise_rng(derive_seed(cfg.seed, 0x6E01));
    Rng val_noise_rng(derive_seed(cfg.seed, 0x7A11));

    TemperatureSchedule temperature = cfg.temperature;
    std::size_t step = 0;
    std::vector<Image> batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(train_rows);
        std::vector<std::pair<LossBreakdown, std::size_t>> parts;
        for (std::size_t start = 0; start < train_rows.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(train_rows.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t r = start; r < stop; ++r) batch.push_back(images[train_rows[r]]);
            const auto noise = sample_gumbel_noise(arch.latent_bits, batch.size(), noise_rng);
            auto lg = bvae_loss_and_gradients(model, batch, temperature.tau, noise);
            ++step;
            adam_update(model.encoder, lg.gradients.encoder, enc_state, cfg, step);
            adam_update(model.decoder, lg.gradients.decoder, dec_state, cfg, step);
            parts.emplace_back(lg.loss, batch.size());
        }

        BvaeEpochStats stats;
        stats.epoch = epoch;
        stats.tau = temperature.tau;
        stats.train = weighted_mean(parts);
        if (validation.empty()) {
            stats.validation = {kNaN, kNaN, kNaN};
            stats.validation_pixel_accuracy = kNaN;
        } else {
            const auto noise = sample_gumbel_noise(arch.latent_bits, validation.size(), val_noise_rng);
            stats.validation = bvae_loss(model, validation, temperature.tau, noise);
            stats.validation_pixel_accuracy = reconstruction_pixel_accuracy(model, validation);
        }
        result.history.push_back(stats);
        if (on_epoch) on_epoch(stats);

        model.tau = temperature.tau;
        temperature = anneal_tau(temperature, epoch);
    }
    model.validate();
    return result;
}

std::vector<double> encode_probabilities(const BvaeModel& model, const Image& image) {
    const MatrixXd x = batch_matrix(model, std::span<const Image>(&image, 1));
    const MatrixXd gaps = logit_gaps(forward_stack(model.encoder, x).output());
    std::vector<double> q(static_cast<std::size_t>(gaps.rows()));
    for (Index i = 0; i < gaps.rows(); ++i) q[static_cast<std::size_t>(i)] = sigmoid(gaps(i, 0));
    return q;
}

BinaryVector encode(const BvaeModel& model, const Image& image) {
    const MatrixXd x = batch_matrix(model, std::span<const Image>(&image, 1));
    const MatrixXd gaps = logit_gaps(forward_stack(model.encoder, x).output());
    BinaryVector bits(static_cast<std::size_t>(gaps.rows()));
    for (Index i = 0; i < gaps.rows(); ++i) bits.set(static_cast<std::size_t>(i), gaps(i, 0) > 0.0);
    return bits;
}

DecodedDesign decode(const BvaeModel& model, const BinaryVector& x, double blur_radius_px) {
    if (x.size() != model.arch.latent_bits)
        throw DimensionError("latent vector has length " + std::to_string(x.size()) +
                             " but the model has " + std::to_string(model.arch.latent_bits) +
                             " bits");
    MatrixXd z(static_cast<Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) z(static_cast<Index>(i), 0) = x[i];
    const MatrixXd out = sigmoid(forward_stack(model.decoder, z).output());
    Image continuous(model.arch.image_side,
                     std::vector<double>(out.data(), out.data() + out.size()));
    if (blur_radius_px > 0.0) continuous = gaussian_blur(continuous, blur_radius_px);
    else if (!(blur_radius_px == 0.0)) throw InvalidArgument("blur radius must be non-negative");
    Image pattern = continuous.thresholded(0.5);
    return {std::move(continuous), std::move(pattern)};
}

double reconstruction_pixel_accuracy(const BvaeModel& model, std::span<const Image> images) {
    if (images.empty()) return kNaN;
    std::size_t matches = 0;
    std::size_t total = 0;
    for (const auto& image : images) {
        const auto target = image.thresholded(0.5);
        const auto recon = decode(model, encode(model, image)).pattern;
        for (std::size_t p = 0; p < target.pixel_count(); ++p)
            matches += target.pixels()[p] == recon.pixels()[p];
        total += target.pixel_count();
    }
    return static_cast<double>(matches) / static_cast<double>(total);
}

void write_bvae(std::ostream& out, const BvaeModel& model) {
    model.validate();
    out << "BVAE v1 m=" << model.arch.image_side << " n=" << model.arch.latent_bits << '\n';
    auto block = [&out](const std::string& name, const MatrixXd& m) {
        out << "LAYER " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Index r = 0; r < m.rows(); ++r) {
            for (Index c = 0; c < m.cols(); ++c)
                out << (c ? " " : "") << textio::format_decimal(m(r, c));
            out << '\n';
        }
    };
    for (const auto* stack : {&model.encoder, &model.decoder})
        for (const auto& layer : *stack) {
            block(layer.name + ".weight", layer.weight);
            block(layer.name + ".bias", layer.bias);
        }
    out << "TAU " << textio::format_decimal(model.tau) << '\n';
}

BvaeModel read_bvae(std::istream& in) {
    std::string line;
    auto next_tokens = [&]() {
        while (std::getline(in, line)) {
            auto tokens = textio::split_ws(line);
            if (!tokens.empty()) return tokens;
        }
        return std::vector<std::string_view>{};
    };
    auto header = next_tokens();
    if (header.size() != 4 || header[0] != "BVAE" || header[1] != "v1")
        throw FormatError("expected 'BVAE v1 m=<m> n=<n>' header");
    BvaeModel model;
    model.arch.image_side = textio::parse_uint(textio::header_value(header[2], "m"));
    model.arch.latent_bits = textio::parse_uint(textio::header_value(header[3], "n"));
    model.arch.encoder_hidden.clear();
    model.arch.decoder_hidden.clear();

    bool have_tau = false;
    DenseLayer pending;
    bool pending_weight = false;
    for (auto tokens = next_tokens(); !tokens.empty(); tokens = next_tokens()) {
        if (tokens[0] == "TAU" && tokens.size() == 2) {
            model.tau = textio::parse_double(tokens[1]);
            have_tau = true;
            continue;
        }
        if (tokens[0] != "LAYER" || tokens.size() != 4 || have_tau)
            throw FormatError("expected 'LAYER <name> <rows> <cols>' block");
        const std::string name(tokens[1]);
        const auto rows = static_cast<Index>(textio::parse_uint(tokens[2]));
        const auto cols = static_cast<Index>(textio::parse_uint(tokens[3]));
        MatrixXd values(rows, cols);
        for (Index r = 0; r < rows; ++r) {
            const auto row = next_tokens();
            if (row.size() != static_cast<std::size_t>(cols))
                throw FormatError("layer " + name + " row " + std::to_string(r) + " has " +
                                  std::to_string(row.size()) + " values, expected " +
                                  std::to_string(cols));
            for (Index c = 0; c < cols; ++c)
                values(r, c) = textio::parse_double(row[static_cast<std::size_t>(c)]);
        }
        const auto dot = name.rfind('.');
        const std::string base = dot == std::string::npos ? name : name.substr(0, dot);
        const std::string part = dot == std::string::npos ? "" : name.substr(dot + 1);
        if (part == "weight" && !pending_weight) {
            pending = DenseLayer{base, std::move(values), {}};
            pending_weight = true;
        } else if (part == "bias" && pending_weight && base == pending.name && cols == 1) {
            pending.bias = values.col(0);
            pending_weight = false;
            if (base.rfind("enc", 0) == 0) model.encoder.push_back(std::move(pending));
            else if (base.rfind("dec", 0) == 0) model.decoder.push_back(std::move(pending));
            else throw FormatError("layer " + base + " belongs to neither encoder nor decoder");
        } else {
            throw FormatError("unexpected layer block " + name);
        }
    }
    if (!have_tau) throw FormatError("bVAE checkpoint is missing its TAU line");
    if (pending_weight) throw FormatError("layer " + pending.name + " has no bias block");
    if (model.encoder.empty() || model.decoder.empty())
        throw FormatError("bVAE checkpoint needs encoder and decoder layers");
    for (std::size_t l = 0; l + 1 < model.encoder.size(); ++l)
        model.arch.encoder_hidden.push_back(static_cast<std::size_t>(model.encoder[l].weight.rows()));
    for (std::size_t l = 0; l + 1 < model.decoder.size(); ++l)
        model.arch.decoder_hidden.push_back(static_cast<std::size_t>(model.decoder[l].weight.rows()));
    try {
        model.validate();
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("inconsistent bVAE checkpoint: ") + e.what());
    }
    return model;
}

void save_bvae(const std::filesystem::path& path, const BvaeModel& model) {
    auto out = textio::open_output(path);
    write_bvae(out, model);
}

BvaeModel load_bvae(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return read_bvae(in);
}

}  // namespace bvq
