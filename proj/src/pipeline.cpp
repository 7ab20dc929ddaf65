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

#include "bvq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "bvq/error.hpp"
#include "bvq/random.hpp"
#include "bvq/textio.hpp"

namespace bvq {

namespace {

// Seed streams derived from the master seed.
constexpr std::uint64_t kStreamBvae = 1;
constexpr std::uint64_t kStreamCorpus = 2;
constexpr std::uint64_t kStreamDataset = 3;
constexpr std::uint64_t kStreamStratify = 4;
constexpr std::uint64_t kStreamFm = 1000;
constexpr std::uint64_t kStreamSampler = 2000;
constexpr std::uint64_t kStreamAugment = 3000;

constexpr std::size_t kBestDesignsExported = 5;

}  // namespace

RunState::RunState(std::shared_ptr<const BvaeModel> bvae_,
                   std::shared_ptr<const FigureOfMerit> objective_, LabeledDataset dataset_)
    : bvae(std::move(bvae_)), objective(std::move(objective_)), dataset(std::move(dataset_)) {
    if (!bvae) throw InvalidArgument("run state needs a trained bVAE");
    if (!objective) throw InvalidArgument("run state needs an objective");
    if (dataset.empty()) throw InvalidArgument("run state needs a non-empty initial dataset");
    if (dataset.bits() != bvae->arch.latent_bits)
        throw DimensionError("dataset has " + std::to_string(dataset.bits()) +
                             "-bit vectors but the bVAE has " +
                             std::to_string(bvae->arch.latent_bits) + " latent bits");
    initial_best_fom = dataset.max_label();
    running_max_fom = initial_best_fom;
}

std::vector<BinaryVector> bit_flip_augment(const BinaryVector& x, std::size_t copies,
                                           std::uint64_t seed) {
    if (copies < 1 || copies > x.size())
        throw InvalidArgument("bit-flip copies must lie in [1, " + std::to_string(x.size()) +
                              "], got " + std::to_string(copies));
    Rng rng(seed);
    const auto positions = rng.permutation(x.size());
    std::vector<BinaryVector> out;
    out.reserve(copies);
    for (std::size_t c = 0; c < copies; ++c) {
        BinaryVector v = x;
        v.flip(positions[c]);
        out.push_back(std::move(v));
    }
    return out;
}

IterationResult run_iteration(RunState& state, const PipelineConfig& cfg) {
    if (!state.bvae || !state.objective || state.dataset.empty())
        throw InvalidArgument("run state is missing its bVAE, objective or dataset");
    const std::size_t t = ++state.iteration;

    // Surrogate fitted to c - y.
    const auto transformed = apply_label_transform(state.dataset.y(), cfg.label_margin);
    FmTrainConfig fm_cfg = cfg.fm;
    fm_cfg.seed = derive_seed(cfg.seed, kStreamFm + t);
    const FmModel* warm = cfg.warm_start_fm && state.fm ? &*state.fm : nullptr;
    auto trained = fm_train(std::span<const BinaryVector>(state.dataset.x()),
                            std::span<const double>(transformed.labels), fm_cfg, warm);
    state.fm = std::move(trained.model);
    state.transform = transformed.transform;
    const SurrogateQubo surrogate = fm_to_qubo(*state.fm, state.transform);

    IterationResult result;
    if (cfg.sampler == SamplerKind::BruteForce) {
        // Depth covers rows already in the dataset.
        const std::size_t depth = cfg.samples_per_iteration + (cfg.dedup ? state.dataset.size() : 0);
        result.samples = brute_force_sample(surrogate.qubo, depth);
    } else {
        result.samples = simulated_annealing_sample(surrogate.qubo, cfg.schedule,
                                                    derive_seed(cfg.seed, kStreamSampler + t));
    }

    auto& designs = result.designs;
    const auto admissible = [&](const BinaryVector& v) {
        if (cfg.dedup && state.dataset.contains(v)) return false;
        return std::none_of(designs.begin(), designs.end(),
                            [&](const EvaluatedDesign& d) { return d.bits == v; });
    };
    for (const auto& entry : result.samples.entries) {
        if (designs.size() == cfg.samples_per_iteration) break;
        if (admissible(entry.bits)) designs.push_back({entry.bits, 0.0, 0.0, entry.energy, false});
    }
    // Single-bit neighbours of the sampled vectors, in sampler-rank order.
    if (cfg.augmentation == AugmentationKind::BitFlip) {
        const auto& entries = result.samples.entries;
        for (std::size_t s = 0; s < entries.size() && designs.size() < cfg.samples_per_iteration; ++s) {
            const auto flips = bit_flip_augment(entries[s].bits, cfg.flip_copies,
                                                derive_seed(cfg.seed, kStreamAugment + t * 1024 + s));
            for (const auto& v : flips) {
                if (designs.size() == cfg.samples_per_iteration) break;
                if (admissible(v)) designs.push_back({v, 0.0, 0.0, qubo_energy(surrogate.qubo, v), true});
            }
        }
    }

    std::size_t added = 0;
    double abs_error = 0.0;
    const std::string tag = "iter" + std::to_string(t);
    for (auto& d : designs) {
        d.fom = state.objective->evaluate(decode(*state.bvae, d.bits, cfg.blur_radius_px).pattern);
        d.predicted_fom = surrogate.fom_from_energy(d.energy);
        abs_error += std::abs(d.energy - state.transform.apply(d.fom));
        const std::string provenance = d.augmented ? tag + "-flip" : tag;
        state.dataset.add(d.bits, d.fom, provenance);
        ++added;
    }

    auto& rec = result.record;
    rec.iteration = t;
    rec.evaluated = designs.size();
    rec.new_vectors = added;
    rec.dataset_size = state.dataset.size();
    rec.sampler_energy_min = result.samples.best().energy;
    rec.fm_train_mse = trained.report.final_train_mse;
    if (designs.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rec.mean_fom = rec.std_fom = rec.max_fom = rec.surrogate_abs_error = nan;
    } else {
        double sum = 0.0;
        rec.max_fom = designs.front().fom;
        for (const auto& d : designs) {
            sum += d.fom;
            rec.max_fom = std::max(rec.max_fom, d.fom);
        }
        rec.mean_fom = sum / static_cast<double>(designs.size());
        double var = 0.0;
        for (const auto& d : designs) var += (d.fom - rec.mean_fom) * (d.fom - rec.mean_fom);
        rec.std_fom = std::sqrt(var / static_cast<double>(designs.size()));
        rec.surrogate_abs_error = abs_error / static_cast<double>(designs.size());
        state.running_max_fom = std::max(state.running_max_fom, rec.max_fom);
    }
    rec.running_max_fom = state.running_max_fom;
    if (cfg.dedup && added == 0) {
        rec.stagnated = true;
        ++state.stagnation_events;
    }
    state.history.push_back(rec);
    return result;
}

ConnectivityReport check_hardware_feasibility(const PipelineConfig& cfg, std::size_t max_clique,
                                              std::ostream* warnings) {
    const auto report = analyze_fully_connected(cfg.latent_bits(), max_clique);
    if (!report.fits_hardware && warnings != nullptr)
        *warnings << "warning: a fully connected " << report.n
                  << "-variable QUBO exceeds the hardware clique size of " << max_clique
                  << "; use a classical or hybrid sampler\n";
    return report;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& history) {
    using textio::format_decimal;
    out << "iteration,mean_fom,std_fom,max_fom,running_max_fom,dataset_size,min_energy\n";
    for (const auto& r : history)
        out << r.iteration << ',' << format_decimal(r.mean_fom) << ',' << format_decimal(r.std_fom)
            << ',' << format_decimal(r.max_fom) << ',' << format_decimal(r.running_max_fom) << ','
            << r.dataset_size << ',' << format_decimal(r.sampler_energy_min) << '\n';
}

void write_surrogate_error_csv(std::ostream& out, const std::vector<ConvergenceRecord>& history) {
    using textio::format_decimal;
    out << "iteration,surrogate_abs_error,fm_train_mse,evaluated,new_vectors,stagnated\n";
    for (const auto& r : history)
        out << r.iteration << ',' << format_decimal(r.surrogate_abs_error) << ','
            << format_decimal(r.fm_train_mse) << ',' << r.evaluated << ',' << r.new_vectors << ','
            << (r.stagnated ? 1 : 0) << '\n';
}

namespace {

void require_file(const std::filesystem::path& path, const char* what) {
    if (!std::filesystem::exists(path))
        throw MissingInputError(std::string(what) + " not found: " + path.string());
}

std::shared_ptr<const BvaeModel> obtain_bvae(const PipelineConfig& cfg, std::ostream* log) {
    if (!cfg.bvae_checkpoint.empty()) {
        require_file(cfg.bvae_checkpoint, "bVAE checkpoint");
        auto model = load_bvae(cfg.bvae_checkpoint);
        if (model.arch.image_side != cfg.architecture.image_side ||
            model.arch.latent_bits != cfg.architecture.latent_bits)
            throw ConfigError("bVAE checkpoint shape (m=" + std::to_string(model.arch.image_side) +
                              ", n=" + std::to_string(model.arch.latent_bits) +
                              ") does not match the configured architecture");
        return std::make_shared<const BvaeModel>(std::move(model));
    }
    std::vector<Image> corpus;
    if (!cfg.corpus_path.empty()) {
        require_file(cfg.corpus_path, "image corpus");
        corpus = load_image_set(cfg.corpus_path);
    } else {
        corpus = generate_toy_corpus(cfg.corpus_kind, cfg.architecture.image_side, cfg.corpus_count,
                                     derive_seed(cfg.seed, kStreamCorpus));
    }
    BvaeTrainConfig train_cfg = cfg.bvae_training;
    train_cfg.seed = derive_seed(cfg.seed, kStreamBvae);
    if (log) *log << "training bVAE on " << corpus.size() << " images\n";
    auto trained = bvae_train(corpus, cfg.architecture, train_cfg);
    if (log && !trained.history.empty())
        *log << "bVAE validation pixel accuracy "
             << textio::format_decimal(trained.history.back().validation_pixel_accuracy) << '\n';
    save_bvae(cfg.output_dir / "bvae.txt", trained.model);
    return std::make_shared<const BvaeModel>(std::move(trained.model));
}

LabeledDataset obtain_dataset(const PipelineConfig& cfg, const BvaeModel& bvae,
                              const FigureOfMerit& objective) {
    if (!cfg.dataset_path.empty()) {
        require_file(cfg.dataset_path, "initial dataset");
        auto data = load_dataset(cfg.dataset_path);
        if (data.bits() != cfg.latent_bits())
            throw ConfigError("initial dataset has " + std::to_string(data.bits()) +
                              "-bit vectors but latent_bits is " + std::to_string(cfg.latent_bits()));
        if (cfg.dedup && data.has_duplicates())
            throw ConfigError("initial dataset contains duplicate vectors while dedup is on");
        return data;
    }
    const auto seed = derive_seed(cfg.seed, kStreamDataset);
    if (!cfg.stratification)
        return build_latent_dataset(bvae, objective, cfg.initial_count, seed, cfg.blur_radius_px);
    const auto pool = build_latent_dataset(bvae, objective, cfg.stratify_pool, seed, cfg.blur_radius_px);
    return stratify_dataset(pool, *cfg.stratification, cfg.initial_count,
                            derive_seed(cfg.seed, kStreamStratify));
}

void export_best_designs(const std::filesystem::path& dir, const RunState& state, double blur) {
    std::vector<std::size_t> rows(state.dataset.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        return state.dataset.y()[a] > state.dataset.y()[b];
    });
    rows.resize(std::min(rows.size(), kBestDesignsExported));
    auto latents = textio::open_output(dir / "latents.txt");
    latents << "rank bits fom provenance\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = rows[k];
        const auto& bits = state.dataset.x()[r];
        save_pgm(dir / ("rank" + std::to_string(k) + ".pgm"), decode(*state.bvae, bits, blur).pattern);
        latents << k << ' ' << bits.to_string() << ' '
                << textio::format_decimal(state.dataset.y()[r]) << ' '
                << state.dataset.provenance()[r] << '\n';
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log) {
    cfg.validate();
    const auto hardware = check_hardware_feasibility(cfg, cfg.max_clique, log);
    std::filesystem::create_directories(cfg.output_dir);

    auto bvae = obtain_bvae(cfg, log);
    std::shared_ptr<const FigureOfMerit> objective = make_objective(cfg.objective, cfg.architecture.image_side);
    auto dataset = obtain_dataset(cfg, *bvae, *objective);
    save_dataset(cfg.output_dir / "dataset_initial.txt", dataset);

    PipelineResult result{RunState(bvae, objective, std::move(dataset)), hardware,
                          cfg.output_dir / "convergence.csv"};
    auto& state = result.state;
    if (log)
        *log << "initial dataset: " << state.dataset.size() << " rows, best fom "
             << textio::format_decimal(state.initial_best_fom) << '\n';
    for (std::size_t i = 0; i < cfg.iterations; ++i) {
        const auto it = run_iteration(state, cfg);
        if (log)
            *log << "iteration " << it.record.iteration << ": mean "
                 << textio::format_decimal(it.record.mean_fom) << " max "
                 << textio::format_decimal(it.record.max_fom) << " running max "
                 << textio::format_decimal(it.record.running_max_fom) << " new "
                 << it.record.new_vectors << (it.record.stagnated ? " (stagnated)" : "") << '\n';
    }

    {
        auto out = textio::open_output(result.convergence_csv);
        write_convergence_csv(out, state.history);
    }
    {
        auto out = textio::open_output(cfg.output_dir / "surrogate_error.csv");
        write_surrogate_error_csv(out, state.history);
    }
    save_fm(cfg.output_dir / "fm_final.txt", *state.fm);
    save_dataset(cfg.output_dir / "dataset_final.txt", state.dataset);
    export_best_designs(cfg.output_dir / "best_designs", state, cfg.blur_radius_px);
    return result;
}

}  // namespace bvq
