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

// bvq command-line driver.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bvq/bvae.hpp"
#include "bvq/dataset.hpp"
#include "bvq/error.hpp"
#include "bvq/factorization_machine.hpp"
#include "bvq/image.hpp"
#include "bvq/objectives.hpp"
#include "bvq/pipeline.hpp"
#include "bvq/qubo.hpp"
#include "bvq/random.hpp"
#include "bvq/samplers.hpp"
#include "bvq/textio.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 2, kMissingInput = 3, kRuntimeFailure = 4 };

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "pipeline config file");
    cmd->add_option("--seed", opts.seed, "master seed (overrides the config)");
    cmd->add_option("--out", opts.out, "output directory (overrides the config)");
}

bvq::PipelineConfig resolve_config(const CommonOptions& opts) {
    bvq::PipelineConfig cfg;
    if (!opts.config.empty()) {
        if (!fs::exists(opts.config)) throw bvq::MissingInputError("config file not found: " + opts.config);
        cfg = bvq::load_pipeline_config(opts.config);
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.out.empty()) cfg.output_dir = opts.out;
    return cfg;
}

void require_file(const fs::path& path, const char* what) {
    if (path.empty()) throw bvq::ConfigError(std::string(what) + " path is required");
    if (!fs::exists(path)) throw bvq::MissingInputError(std::string(what) + " not found: " + path.string());
}

bvq::BvaeModel load_model(const std::string& flag, const bvq::PipelineConfig& cfg) {
    const fs::path path = flag.empty() ? cfg.bvae_checkpoint : fs::path(flag);
    require_file(path, "bVAE checkpoint");
    return bvq::load_bvae(path);
}

std::vector<bvq::Image> corpus_for(const std::string& flag, const bvq::PipelineConfig& cfg) {
    const fs::path path = flag.empty() ? cfg.corpus_path : fs::path(flag);
    if (!path.empty()) {
        require_file(path, "image corpus");
        return bvq::load_image_set(path);
    }
    return bvq::generate_toy_corpus(cfg.corpus_kind, cfg.architecture.image_side, cfg.corpus_count,
                                    bvq::derive_seed(cfg.seed, 2));
}

int cmd_gen_corpus(const bvq::PipelineConfig& cfg, bool export_pgm) {
    const auto images = bvq::generate_toy_corpus(cfg.corpus_kind, cfg.architecture.image_side,
                                                 cfg.corpus_count, bvq::derive_seed(cfg.seed, 2));
    const auto path = cfg.output_dir / "corpus.txt";
    bvq::save_image_set(path, cfg.architecture.image_side, images);
    if (export_pgm)
        for (std::size_t i = 0; i < images.size(); ++i)
            bvq::save_pgm(cfg.output_dir / "corpus_pgm" / ("img" + std::to_string(i) + ".pgm"), images[i]);
    std::cout << "wrote " << images.size() << " " << bvq::corpus_kind_name(cfg.corpus_kind)
              << " images to " << path.string() << '\n';
    return kOk;
}

int cmd_train_bvae(const bvq::PipelineConfig& cfg, const std::string& corpus_flag) {
    const auto corpus = corpus_for(corpus_flag, cfg);
    auto train_cfg = cfg.bvae_training;
    train_cfg.seed = bvq::derive_seed(cfg.seed, 1);
    fs::create_directories(cfg.output_dir);
    auto log = bvq::textio::open_output(cfg.output_dir / "bvae_training.csv");
    log << "epoch,tau,train_loss,train_reconstruction,train_kl,val_loss,val_pixel_accuracy\n";
    const auto result = bvq::bvae_train(corpus, cfg.architecture, train_cfg, [&](const bvq::BvaeEpochStats& s) {
        using bvq::textio::format_decimal;
        log << s.epoch << ',' << format_decimal(s.tau) << ',' << format_decimal(s.train.total) << ','
            << format_decimal(s.train.reconstruction) << ',' << format_decimal(s.train.kl) << ','
            << format_decimal(s.validation.total) << ',' << format_decimal(s.validation_pixel_accuracy)
            << '\n';
    });
    bvq::save_bvae(cfg.output_dir / "bvae.txt", result.model);
    std::cout << "trained bVAE (" << result.model.parameter_count() << " parameters) on " << corpus.size()
              << " images";
    if (!result.history.empty())
        std::cout << ", validation pixel accuracy "
                  << bvq::textio::format_decimal(result.history.back().validation_pixel_accuracy);
    std::cout << '\n';
    return kOk;
}

int cmd_gen_dataset(const bvq::PipelineConfig& cfg, const std::string& bvae_flag) {
    const auto model = load_model(bvae_flag, cfg);
    const auto objective = bvq::make_objective(cfg.objective, model.arch.image_side);
    const auto seed = bvq::derive_seed(cfg.seed, 3);
    bvq::LabeledDataset data(model.arch.latent_bits);
    if (cfg.stratification) {
        const auto pool = bvq::build_latent_dataset(model, *objective, cfg.stratify_pool, seed, cfg.blur_radius_px);
        data = bvq::stratify_dataset(pool, *cfg.stratification, cfg.initial_count, bvq::derive_seed(cfg.seed, 4));
    } else {
        data = bvq::build_latent_dataset(model, *objective, cfg.initial_count, seed, cfg.blur_radius_px);
    }
    bvq::save_dataset(cfg.output_dir / "dataset.txt", data);
    auto csv = bvq::textio::open_output(cfg.output_dir / "dataset.csv");
    bvq::write_dataset_csv(csv, data);
    std::cout << "wrote " << data.size() << " labelled vectors, best label "
              << bvq::textio::format_decimal(data.max_label()) << '\n';
    return kOk;
}

int cmd_run_loop(const bvq::PipelineConfig& cfg, bool quiet) {
    const auto result = bvq::run_pipeline(cfg, quiet ? nullptr : &std::cerr);
    std::cout << "initial best " << bvq::textio::format_decimal(result.state.initial_best_fom)
              << ", final running max " << bvq::textio::format_decimal(result.state.running_max_fom)
              << ", stagnation events " << result.state.stagnation_events << '\n'
              << "convergence written to " << result.convergence_csv.string() << '\n';
    return kOk;
}

int cmd_sample_once(const bvq::PipelineConfig& cfg, const std::string& qubo_flag,
                    const std::string& fm_flag, std::size_t top_k) {
    if (qubo_flag.empty() == fm_flag.empty()) throw bvq::ConfigError("give exactly one of --qubo or --fm");
    bvq::QuboProblem q = [&] {
        if (!qubo_flag.empty()) {
            require_file(qubo_flag, "QUBO file");
            return bvq::load_qubo(qubo_flag);
        }
        require_file(fm_flag, "FM checkpoint");
        return bvq::fm_to_qubo(bvq::load_fm(fm_flag));
    }();
    bvq::SampleSet samples;
    if (cfg.sampler == bvq::SamplerKind::BruteForce) {
        samples = bvq::brute_force_sample(q, top_k);
    } else {
        cfg.schedule.validate();
        samples = bvq::simulated_annealing_sample(q, cfg.schedule, cfg.seed);
    }
    bvq::save_sample_csv(cfg.output_dir / "samples.csv", samples);
    const auto& best = samples.best();
    std::cout << "best " << best.bits.to_string() << " energy " << bvq::textio::format_decimal(best.energy)
              << " (" << samples.entries.size() << " distinct)\n";
    return kOk;
}

int cmd_eval(const bvq::PipelineConfig& cfg, const std::string& bvae_flag, const std::string& latent,
             const std::string& dataset_flag) {
    if (latent.empty() == dataset_flag.empty()) throw bvq::ConfigError("give exactly one of --latent or --dataset");
    const auto model = load_model(bvae_flag, cfg);
    const auto objective = bvq::make_objective(cfg.objective, model.arch.image_side);
    if (!latent.empty()) {
        const auto x = bvq::BinaryVector::from_string(latent);
        const auto design = bvq::decode(model, x, cfg.blur_radius_px);
        bvq::save_pgm(cfg.output_dir / (latent + ".pgm"), design.pattern);
        std::cout << latent << ' ' << bvq::textio::format_decimal(objective->evaluate(design.pattern)) << '\n';
        return kOk;
    }
    require_file(dataset_flag, "dataset");
    const auto data = bvq::load_dataset(dataset_flag);
    auto csv = bvq::textio::open_output(cfg.output_dir / "eval.csv");
    csv << "bits,stored_label,recomputed_fom\n";
    std::size_t mismatches = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const double fom = objective->evaluate(bvq::decode(model, data.x()[r], cfg.blur_radius_px).pattern);
        if (fom != data.y()[r]) ++mismatches;
        csv << data.x()[r].to_string() << ',' << bvq::textio::format_decimal(data.y()[r]) << ','
            << bvq::textio::format_decimal(fom) << '\n';
    }
    std::cout << "evaluated " << data.size() << " rows, " << mismatches << " label mismatches\n";
    return kOk;
}

int cmd_check_hardware(const bvq::PipelineConfig& cfg, std::optional<std::size_t> bits,
                       std::optional<std::size_t> clique) {
    auto probe = cfg;
    if (bits) probe.architecture.latent_bits = *bits;
    const auto report = bvq::check_hardware_feasibility(probe, clique.value_or(cfg.max_clique), &std::cerr);
    std::cout << "n=" << report.n << " edges=" << report.edge_count
              << " max_clique=" << report.max_supported_clique
              << " fits_hardware=" << (report.fits_hardware ? "true" : "false") << '\n';
    return kOk;
}

int cmd_export_csv(const bvq::PipelineConfig& cfg, const std::string& dataset_flag,
                   const std::string& images_flag) {
    if (dataset_flag.empty() == images_flag.empty()) throw bvq::ConfigError("give exactly one of --dataset or --images");
    if (!dataset_flag.empty()) {
        require_file(dataset_flag, "dataset");
        const auto data = bvq::load_dataset(dataset_flag);
        const auto path = cfg.output_dir / (fs::path(dataset_flag).stem().string() + ".csv");
        auto csv = bvq::textio::open_output(path);
        bvq::write_dataset_csv(csv, data);
        std::cout << "wrote " << path.string() << '\n';
        return kOk;
    }
    require_file(images_flag, "image set");
    const auto images = bvq::load_image_set(images_flag);
    for (std::size_t i = 0; i < images.size(); ++i)
        bvq::save_pgm(cfg.output_dir / ("img" + std::to_string(i) + ".pgm"), images[i]);
    std::cout << "wrote " << images.size() << " PGM images to " << cfg.output_dir.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bvq: binary VAE + QUBO surrogate design loop"};
    app.require_subcommand(1);

    CommonOptions common;
    bool pgm = false;
    bool quiet = false;
    std::string corpus, bvae, qubo, fm, latent, dataset, images;
    std::size_t top_k = 10;
    std::optional<std::size_t> bits, clique;

    auto* gen_corpus = app.add_subcommand("gen-corpus", "generate a toy image corpus");
    add_common(gen_corpus, common);
    gen_corpus->add_flag("--pgm", pgm, "also write every image as PGM");

    auto* train_bvae = app.add_subcommand("train-bvae", "train a binary VAE on an image corpus");
    add_common(train_bvae, common);
    train_bvae->add_option("--corpus", corpus, "image set file (default: config or generated)");

    auto* gen_dataset = app.add_subcommand("gen-dataset", "label random latent vectors through the decoder");
    add_common(gen_dataset, common);
    gen_dataset->add_option("--bvae", bvae, "bVAE checkpoint (default: config)");

    auto* run_loop = app.add_subcommand("run-loop", "run the full surrogate optimisation loop");
    add_common(run_loop, common);
    run_loop->add_flag("--quiet", quiet, "suppress per-iteration progress");

    auto* sample_once = app.add_subcommand("sample-once", "sample a QUBO or FM surrogate once");
    add_common(sample_once, common);
    sample_once->add_option("--qubo", qubo, "QUBO file");
    sample_once->add_option("--fm", fm, "FM checkpoint");
    sample_once->add_option("--top-k", top_k, "states kept by the brute-force sampler")->check(CLI::PositiveNumber);

    auto* eval = app.add_subcommand("eval", "decode latents and evaluate the objective");
    add_common(eval, common);
    eval->add_option("--bvae", bvae, "bVAE checkpoint (default: config)");
    eval->add_option("--latent", latent, "0/1 latent string");
    eval->add_option("--dataset", dataset, "dataset file to re-evaluate");

    auto* check_hw = app.add_subcommand("check-hardware", "check the dense problem against a clique limit");
    add_common(check_hw, common);
    check_hw->add_option("--bits", bits, "latent bits (default: config)");
    check_hw->add_option("--max-clique", clique, "hardware clique size (default: config)");

    auto* export_csv = app.add_subcommand("export-csv", "convert checkpoint files to CSV or PGM");
    add_common(export_csv, common);
    export_csv->add_option("--dataset", dataset, "dataset file");
    export_csv->add_option("--images", images, "image set file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        const auto cfg = resolve_config(common);
        if (*gen_corpus) return cmd_gen_corpus(cfg, pgm);
        if (*train_bvae) return cmd_train_bvae(cfg, corpus);
        if (*gen_dataset) return cmd_gen_dataset(cfg, bvae);
        if (*run_loop) return cmd_run_loop(cfg, quiet);
        if (*sample_once) return cmd_sample_once(cfg, qubo, fm, top_k);
        if (*eval) return cmd_eval(cfg, bvae, latent, dataset);
        if (*check_hw) return cmd_check_hardware(cfg, bits, clique);
        if (*export_csv) return cmd_export_csv(cfg, dataset, images);
    } catch (const bvq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const bvq::MissingInputError& e) {
        std::cerr << "missing input: " << e.what() << '\n';
        return kMissingInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeFailure;
    }
    return kRuntimeFailure;
}
