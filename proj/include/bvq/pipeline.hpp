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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bvq/bvae.hpp"
#include "bvq/dataset.hpp"
#include "bvq/factorization_machine.hpp"
#include "bvq/objectives.hpp"
#include "bvq/qubo.hpp"
#include "bvq/samplers.hpp"

namespace bvq {

enum class SamplerKind { BruteForce, SimulatedAnnealing };
enum class AugmentationKind { None, BitFlip };

SamplerKind parse_sampler_kind(std::string_view text);
std::string_view sampler_kind_name(SamplerKind kind);
AugmentationKind parse_augmentation_kind(std::string_view text);
std::string_view augmentation_kind_name(AugmentationKind kind);

struct PipelineConfig {
    // [run]
    std::size_t iterations = 30;
    std::size_t samples_per_iteration = 10;
    std::uint64_t seed = 0;
    bool dedup = true;
    bool warm_start_fm = true;
    double label_margin = 0.05;
    std::filesystem::path output_dir = "bvq_out";

    // [bvae] An empty checkpoint path means "train one from the corpus".
    std::filesystem::path bvae_checkpoint;
    std::filesystem::path corpus_path;
    BvaeArchitecture architecture;
    BvaeTrainConfig bvae_training;
    CorpusKind corpus_kind = CorpusKind::HalfPlanes;
    std::size_t corpus_count = 256;
    double blur_radius_px = 0.0;

    // [dataset] An empty path means "build one by random latent sampling".
    std::filesystem::path dataset_path;
    std::size_t initial_count = 200;
    std::optional<StratificationSpec> stratification;
    std::size_t stratify_pool = 2000;

    // [fm]
    FmTrainConfig fm;

    // [sampler]
    SamplerKind sampler = SamplerKind::SimulatedAnnealing;
    AnnealSchedule schedule;

    // [augmentation]
    AugmentationKind augmentation = AugmentationKind::None;
    std::size_t flip_copies = 10;

    // [objective]
    ObjectiveSpec objective;

    // [hardware]
    std::size_t max_clique = 180;

    std::size_t latent_bits() const { return architecture.latent_bits; }

    // Throws ConfigError on any invariant violation.
    void validate() const;
};

// Flat "key = value" lines under [section] headers; unknown keys are errors.
PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void write_pipeline_config(std::ostream& out, const PipelineConfig& cfg);

struct ConvergenceRecord {
    std::size_t iteration = 0;
    double mean_fom = 0.0;
    double std_fom = 0.0;
    double max_fom = 0.0;
    double running_max_fom = 0.0;
    std::size_t dataset_size = 0;
    double sampler_energy_min = 0.0;
    std::size_t evaluated = 0;
    std::size_t new_vectors = 0;
    bool stagnated = false;
    // Mean |fm_predict(x) - (c - fom(x))| over the evaluated designs.
    double surrogate_abs_error = 0.0;
    double fm_train_mse = 0.0;
};

struct EvaluatedDesign {
    BinaryVector bits;
    double fom = 0.0;
    double predicted_fom = 0.0;
    double energy = 0.0;
    bool augmented = false;
};

struct RunState {
    std::shared_ptr<const BvaeModel> bvae;
    std::shared_ptr<const FigureOfMerit> objective;
    LabeledDataset dataset;
    std::optional<FmModel> fm;
    LabelTransform transform;
    std::size_t iteration = 0;
    double initial_best_fom = 0.0;
    double running_max_fom = 0.0;
    std::size_t stagnation_events = 0;
    std::vector<ConvergenceRecord> history;

    RunState(std::shared_ptr<const BvaeModel> bvae, std::shared_ptr<const FigureOfMerit> objective,
             LabeledDataset dataset);
};

struct IterationResult {
    ConvergenceRecord record;
    SampleSet samples;
    std::vector<EvaluatedDesign> designs;
};

// `copies` neighbours of x at Hamming distance 1, flip positions distinct.
std::vector<BinaryVector> bit_flip_augment(const BinaryVector& x, std::size_t copies,
                                           std::uint64_t seed);

// Retrain the surrogate on c - y, sample its QUBO, evaluate the chosen
// vectors through the decoder and append them to the dataset.
IterationResult run_iteration(RunState& state, const PipelineConfig& cfg);

// Dense n-variable problem against the clique limit; writes a warning to
// `warnings` when it does not fit.
ConnectivityReport check_hardware_feasibility(const PipelineConfig& cfg, std::size_t max_clique,
                                              std::ostream* warnings = nullptr);

// iteration,mean_fom,std_fom,max_fom,running_max_fom,dataset_size,min_energy
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& history);
void write_surrogate_error_csv(std::ostream& out, const std::vector<ConvergenceRecord>& history);

struct PipelineResult {
    RunState state;
    ConnectivityReport hardware;
    std::filesystem::path convergence_csv;
};

// Full loop. Writes into cfg.output_dir: convergence.csv, surrogate_error.csv,
// fm_final.txt, dataset_initial.txt, dataset_final.txt, bvae.txt (when trained),
// and best_designs/ with PGM images plus latent strings.
PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr);

}  // namespace bvq
