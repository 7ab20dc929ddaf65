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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bvq/bvae.hpp"
#include "bvq/dataset.hpp"
#include "bvq/image.hpp"

namespace bvq {

// Figure of merit over binary m x m design patterns, valued in [0, 1].
class FigureOfMerit {
 public:
    virtual ~FigureOfMerit() = default;

    virtual std::string name() const = 0;
    virtual std::size_t side() const = 0;

    // Rejects patterns of the wrong side or with non-binary pixels.
    double evaluate(const Image& pattern) const;

 protected:
    virtual double score(const Image& pattern) const = 0;
};

// Toy analogue of an emitter efficiency: an in-band term that rewards a
// target fill fraction times an out-of-band term that penalises boundaries.
class ProductEfficiencyObjective final : public FigureOfMerit {
 public:
    ProductEfficiencyObjective(std::size_t side, double target_fill, double smoothness_weight,
                               double fill_width = 0.02);

    std::string name() const override { return "product_efficiency"; }
    std::size_t side() const override { return side_; }
    double target_fill() const { return target_fill_; }
    double smoothness_weight() const { return smoothness_weight_; }

    static double fill_fraction(const Image& pattern);
    // Unequal 4-neighbour pairs over the 2m(m-1) pairs of an m x m grid.
    static double boundary_density(const Image& pattern);

    double in_band(const Image& pattern) const;
    double out_of_band(const Image& pattern) const;

 protected:
    double score(const Image& pattern) const override;

 private:
    std::size_t side_;
    double target_fill_;
    double smoothness_weight_;
    double fill_width_;
};

// Fraction of pixels agreeing with a fixed binary target.
class TargetOverlapObjective final : public FigureOfMerit {
 public:
    explicit TargetOverlapObjective(Image target);

    std::string name() const override { return "target_overlap"; }
    std::size_t side() const override { return target_.side(); }
    const Image& target() const { return target_; }

 protected:
    double score(const Image& pattern) const override;

 private:
    Image target_;
};

double evaluate_fom(const FigureOfMerit& objective, const Image& pattern);

// Half-open [lower, upper) bands; the band reaching highest also includes its upper edge.
struct FomBand {
    double lower = 0.0;
    double upper = 1.0;
};

struct StratificationSpec {
    std::vector<FomBand> bands;
    std::vector<double> fractions;

    void validate() const;
    // Index of the band holding `value`, or bands.size() if none does.
    std::size_t band_of(double value) const;
};

// Per-band row counts summing to `total`: round(fraction * total), with
// largest-remainder correction when the rounded counts do not add up.
std::vector<std::size_t> stratum_quotas(const StratificationSpec& spec, std::size_t total);

// `count` uniform random latent vectors (distinct when `unique`), each
// decoded and scored on its thresholded pattern. Provenance "random".
LabeledDataset build_latent_dataset(const BvaeModel& model, const FigureOfMerit& objective,
                                    std::size_t count, std::uint64_t seed, double blur_px = 0.0,
                                    bool unique = true);

// Draws each band's quota without replacement from `pool`.
LabeledDataset stratify_dataset(const LabeledDataset& pool, const StratificationSpec& spec,
                                std::size_t total, std::uint64_t seed);

enum class CorpusKind { HalfPlanes, Blobs, Stripes };

CorpusKind parse_corpus_kind(std::string_view text);
std::string_view corpus_kind_name(CorpusKind kind);

// The 2(m-1)+2 distinct patterns "row < c" and "col < c" for c in [0, m].
std::vector<Image> half_plane_patterns(std::size_t side);

std::vector<Image> generate_toy_corpus(CorpusKind kind, std::size_t side, std::size_t count,
                                       std::uint64_t seed);

// Declarative objective selection used by configs and the CLI.
struct ObjectiveSpec {
    std::string kind = "target_overlap";  // or "product_efficiency"
    std::string target;                   // m*m 0/1 string for target_overlap
    double target_fill = 0.5;
    double smoothness_weight = 1.0;
    double fill_width = 0.02;
};

std::unique_ptr<FigureOfMerit> make_objective(const ObjectiveSpec& spec, std::size_t side);

}  // namespace bvq
