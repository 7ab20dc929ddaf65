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

#include "bvq/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bvq/error.hpp"
#include "bvq/random.hpp"
#include "bvq/textio.hpp"

namespace bvq {

double FigureOfMerit::evaluate(const Image& pattern) const {
    if (pattern.side() != side())
        throw DimensionError(name() + " expects " + std::to_string(side()) + "x" +
                             std::to_string(side()) + " patterns, got side " +
                             std::to_string(pattern.side()));
    if (!pattern.is_binary()) throw InvalidArgument(name() + " needs a binary pattern");
    return score(pattern);
}

ProductEfficiencyObjective::ProductEfficiencyObjective(std::size_t side, double target_fill,
                                                       double smoothness_weight, double fill_width)
    : side_(side), target_fill_(target_fill), smoothness_weight_(smoothness_weight),
      fill_width_(fill_width) {
    if (side_ < 2) throw InvalidArgument("product efficiency needs patterns of side >= 2");
    if (!(target_fill_ > 0.0 && target_fill_ < 1.0))
        throw InvalidArgument("target fill must lie in (0, 1)");
    if (!(smoothness_weight_ >= 0.0) || !std::isfinite(smoothness_weight_))
        throw InvalidArgument("smoothness weight must be finite and non-negative");
    if (!(fill_width_ > 0.0)) throw InvalidArgument("fill width must be positive");
}

double ProductEfficiencyObjective::fill_fraction(const Image& pattern) {
    return std::accumulate(pattern.pixels().begin(), pattern.pixels().end(), 0.0) /
           static_cast<double>(pattern.pixel_count());
}

double ProductEfficiencyObjective::boundary_density(const Image& pattern) {
    const std::size_t m = pattern.side();
    if (m < 2) return 0.0;
    std::size_t unequal = 0;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            if (c + 1 < m && pattern(r, c) != pattern(r, c + 1)) ++unequal;
            if (r + 1 < m && pattern(r, c) != pattern(r + 1, c)) ++unequal;
        }
    return static_cast<double>(unequal) / static_cast<double>(2 * m * (m - 1));
}

double ProductEfficiencyObjective::in_band(const Image& pattern) const {
    const double gap = fill_fraction(pattern) - target_fill_;
    return std::exp(-gap * gap / fill_width_);
}

double ProductEfficiencyObjective::out_of_band(const Image& pattern) const {
    return 1.0 / (1.0 + smoothness_weight_ * boundary_density(pattern));
}

double ProductEfficiencyObjective::score(const Image& pattern) const {
    return in_band(pattern) * out_of_band(pattern);
}

TargetOverlapObjective::TargetOverlapObjective(Image target) : target_(std::move(target)) {
    if (target_.pixel_count() == 0 || !target_.is_binary())
        throw InvalidArgument("overlap target must be a non-empty binary pattern");
}

double TargetOverlapObjective::score(const Image& pattern) const {
    std::size_t matches = 0;
    for (std::size_t p = 0; p < pattern.pixel_count(); ++p)
        matches += pattern.pixels()[p] == target_.pixels()[p];
    return static_cast<double>(matches) / static_cast<double>(pattern.pixel_count());
}

double evaluate_fom(const FigureOfMerit& objective, const Image& pattern) {
    return objective.evaluate(pattern);
}

void StratificationSpec::validate() const {
    if (bands.empty()) throw InvalidArgument("stratification needs at least one band");
    if (bands.size() != fractions.size())
        throw InvalidArgument("stratification needs one fraction per band");
    double sum = 0.0;
    for (std::size_t b = 0; b < bands.size(); ++b) {
        if (!(bands[b].lower < bands[b].upper))
            throw InvalidArgument("stratification band " + std::to_string(b) +
                                  " must have lower < upper");
        if (!(fractions[b] >= 0.0)) throw InvalidArgument("stratum fractions must be non-negative");
        sum += fractions[b];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("stratum fractions must sum to 1");
    std::vector<FomBand> sorted = bands;
    std::sort(sorted.begin(), sorted.end(),
              [](const FomBand& a, const FomBand& b) { return a.lower < b.lower; });
    for (std::size_t b = 1; b < sorted.size(); ++b)
        if (sorted[b].lower < sorted[b - 1].upper)
            throw InvalidArgument("stratification bands overlap");
}

std::size_t StratificationSpec::band_of(double value) const {
    double top = bands.front().upper;
    for (const auto& band : bands) top = std::max(top, band.upper);
    for (std::size_t b = 0; b < bands.size(); ++b) {
        const auto& band = bands[b];
        if (value >= band.lower && (value < band.upper || (band.upper == top && value == top)))
            return b;
    }
    return bands.size();
}

std::vector<std::size_t> stratum_quotas(const StratificationSpec& spec, std::size_t total) {
    spec.validate();
    const std::size_t k = spec.bands.size();
    std::vector<std::size_t> quotas(k);
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < k; ++b) {
        quotas[b] = static_cast<std::size_t>(std::llround(spec.fractions[b] * static_cast<double>(total)));
        assigned += quotas[b];
    }
    if (assigned == total) return quotas;

    // Rebuild from floors and hand out the remainder by largest fractional part.
    std::vector<double> remainder(k);
    assigned = 0;
    for (std::size_t b = 0; b < k; ++b) {
        const double exact = spec.fractions[b] * static_cast<double>(total);
        quotas[b] = static_cast<std::size_t>(std::floor(exact));
        remainder[b] = exact - std::floor(exact);
        assigned += quotas[b];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++quotas[order[i % k]];
    return quotas;
}

LabeledDataset build_latent_dataset(const BvaeModel& model, const FigureOfMerit& objective,
                                    std::size_t count, std::uint64_t seed, double blur_px,
                                    bool unique) {
    if (count < 1) throw InvalidArgument("latent dataset needs count >= 1");
    const std::size_t n = model.arch.latent_bits;
    if (unique && n < 63 && count > (std::size_t{1} << n))
        throw InvalidArgument("cannot draw " + std::to_string(count) + " distinct " +
                              std::to_string(n) + "-bit vectors");
    if (objective.side() != model.arch.image_side)
        throw DimensionError("objective side does not match the bVAE image side");
    Rng rng(seed);
    LabeledDataset data(n);
    while (data.size() < count) {
        BinaryVector x(n);
        for (std::size_t i = 0; i < n; ++i) x.set(i, rng.coin());
        if (unique && data.contains(x)) continue;
        const double label = objective.evaluate(decode(model, x, blur_px).pattern);
        data.add(std::move(x), label, "random");
    }
    return data;
}

LabeledDataset stratify_dataset(const LabeledDataset& pool, const StratificationSpec& spec,
                                std::size_t total, std::uint64_t seed) {
    const auto quotas = stratum_quotas(spec, total);
    std::vector<std::vector<std::size_t>> members(spec.bands.size());
    for (std::size_t r = 0; r < pool.size(); ++r) {
        const auto b = spec.band_of(pool.y()[r]);
        if (b < members.size()) members[b].push_back(r);
    }
    Rng rng(seed);
    LabeledDataset out(pool.bits());
    for (std::size_t b = 0; b < members.size(); ++b) {
        if (members[b].size() < quotas[b]) {
            const auto& band = spec.bands[b];
            throw InvalidArgument("stratification band " + std::to_string(b) + " [" +
                                  textio::format_decimal(band.lower) + ", " +
                                  textio::format_decimal(band.upper) + ") needs " +
                                  std::to_string(quotas[b]) + " rows but the pool has " +
                                  std::to_string(members[b].size()) + " (deficit " +
                                  std::to_string(quotas[b] - members[b].size()) + ")");
        }
        rng.shuffle(members[b]);
        for (std::size_t i = 0; i < quotas[b]; ++i) {
            const auto r = members[b][i];
            out.add(pool.x()[r], pool.y()[r], pool.provenance()[r]);
        }
    }
    return out;
}

CorpusKind parse_corpus_kind(std::string_view text) {
    if (text == "half_planes") return CorpusKind::HalfPlanes;
    if (text == "blobs") return CorpusKind::Blobs;
    if (text == "stripes") return CorpusKind::Stripes;
    throw InvalidArgument("unknown corpus kind '" + std::string(text) +
                          "' (expected half_planes, blobs or stripes)");
}

std::string_view corpus_kind_name(CorpusKind kind) {
    switch (kind) {
        case CorpusKind::HalfPlanes: return "half_planes";
        case CorpusKind::Blobs: return "blobs";
        case CorpusKind::Stripes: return "stripes";
    }
    return "unknown";
}

std::vector<Image> half_plane_patterns(std::size_t side) {
    std::vector<Image> patterns;
    patterns.emplace_back(side, 0.0);
    patterns.emplace_back(side, 1.0);
    for (std::size_t cut = 1; cut < side; ++cut) {
        Image rows(side, 0.0);
        Image cols(side, 0.0);
        for (std::size_t r = 0; r < side; ++r)
            for (std::size_t c = 0; c < side; ++c) {
                rows(r, c) = r < cut ? 1.0 : 0.0;
                cols(r, c) = c < cut ? 1.0 : 0.0;
            }
        patterns.push_back(std::move(rows));
        patterns.push_back(std::move(cols));
    }
    return patterns;
}

namespace {

Image random_blob(std::size_t side, Rng& rng) {
    const double m = static_cast<double>(side);
    for (;;) {
        std::vector<double> field(side * side, 0.0);
        for (int wave = 0; wave < 3; ++wave) {
            int fr = 0;
            int fc = 0;
            while (fr == 0 && fc == 0) {
                fr = static_cast<int>(rng.below(3));
                fc = static_cast<int>(rng.below(3));
            }
            const double amplitude = rng.uniform(0.5, 1.0);
            const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            for (std::size_t r = 0; r < side; ++r)
                for (std::size_t c = 0; c < side; ++c)
                    field[r * side + c] += amplitude * std::cos(2.0 * std::numbers::pi *
                                                                    (fr * static_cast<double>(r) / m +
                                                                     fc * static_cast<double>(c) / m) +
                                                                phase);
        }
        std::vector<double> pixels(field.size());
        std::size_t ones = 0;
        for (std::size_t p = 0; p < field.size(); ++p) {
            pixels[p] = field[p] > 0.0 ? 1.0 : 0.0;
            ones += pixels[p] == 1.0;
        }
        if (ones > 0 && ones < pixels.size()) return Image(side, std::move(pixels));
    }
}

Image random_stripes(std::size_t side, Rng& rng) {
    const std::size_t max_pitch = std::max<std::size_t>(2, side / 2);
    const std::size_t pitch = 2 + static_cast<std::size_t>(rng.below(max_pitch - 1));
    const std::size_t phase = static_cast<std::size_t>(rng.below(pitch));
    const bool vertical = rng.coin();
    Image image(side, 0.0);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            const std::size_t coord = vertical ? c : r;
            image(r, c) = (coord + phase) % pitch < pitch / 2 ? 1.0 : 0.0;
        }
    return image;
}

}  // namespace

std::vector<Image> generate_toy_corpus(CorpusKind kind, std::size_t side, std::size_t count,
                                       std::uint64_t seed) {
    if (side < 4) throw InvalidArgument("toy corpus needs image side >= 4");
    Rng rng(seed);
    std::vector<Image> corpus;
    corpus.reserve(count);
    switch (kind) {
        case CorpusKind::HalfPlanes: {
            const auto distinct = half_plane_patterns(side);
            // Whole seeded passes over the distinct set.
            std::vector<std::size_t> pass;
            while (corpus.size() < count) {
                if (pass.empty()) {
                    pass = rng.permutation(distinct.size());
                    std::reverse(pass.begin(), pass.end());
                }
                corpus.push_back(distinct[pass.back()]);
                pass.pop_back();
            }
            break;
        }
        case CorpusKind::Blobs:
            while (corpus.size() < count) corpus.push_back(random_blob(side, rng));
            break;
        case CorpusKind::Stripes:
            while (corpus.size() < count) corpus.push_back(random_stripes(side, rng));
            break;
    }
    return corpus;
}

std::unique_ptr<FigureOfMerit> make_objective(const ObjectiveSpec& spec, std::size_t side) {
    if (spec.kind == "product_efficiency")
        return std::make_unique<ProductEfficiencyObjective>(side, spec.target_fill,
                                                            spec.smoothness_weight, spec.fill_width);
    if (spec.kind == "target_overlap") {
        if (spec.target.size() != side * side)
            throw ConfigError("target_overlap needs a target of " + std::to_string(side * side) +
                              " 0/1 characters, got " + std::to_string(spec.target.size()));
        std::vector<double> pixels(side * side);
        for (std::size_t p = 0; p < pixels.size(); ++p) {
            if (spec.target[p] != '0' && spec.target[p] != '1')
                throw ConfigError("target pattern must contain only 0 and 1");
            pixels[p] = spec.target[p] == '1' ? 1.0 : 0.0;
        }
        return std::make_unique<TargetOverlapObjective>(Image(side, std::move(pixels)));
    }
    throw ConfigError("unknown objective kind '" + spec.kind +
                      "' (expected target_overlap or product_efficiency)");
}

}  // namespace bvq
