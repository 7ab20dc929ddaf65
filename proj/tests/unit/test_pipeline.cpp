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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "bvq/error.hpp"
#include "bvq/pipeline.hpp"
#include "bvq/textio.hpp"
#include "oracles.hpp"

using namespace bvq;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(# 4x4 designs, 6 latent bits
[run]
iterations = 3
samples_per_iteration = 4
seed = 5

[bvae]
image_side = 4
latent_bits = 6
encoder_hidden = 16
decoder_hidden = 16
epochs = 20
corpus_count = 32

[dataset]
count = 12

[sampler]
kind = brute_force

[objective]
kind = target_overlap
target = 1000110011101111
)";

PipelineConfig tiny_config(const fs::path& out) {
    std::istringstream in(kTinyConfig);
    auto cfg = parse_pipeline_config(in);
    cfg.output_dir = out;
    return cfg;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("bvq_unit_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

PipelineConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_pipeline_config(in);
}

RunState tiny_state(const PipelineConfig& cfg, std::size_t rows) {
    auto bvae = std::make_shared<const BvaeModel>(BvaeModel::initialize(cfg.architecture, 3));
    std::shared_ptr<const FigureOfMerit> obj = make_objective(cfg.objective, cfg.architecture.image_side);
    auto data = build_latent_dataset(*bvae, *obj, rows, 8);
    return RunState(bvae, obj, std::move(data));
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = tiny_config("out");
    CHECK(cfg.iterations == 3);
    CHECK(cfg.samples_per_iteration == 4);
    CHECK(cfg.seed == 5);
    CHECK(cfg.architecture.encoder_hidden == std::vector<std::size_t>{16});
    CHECK(cfg.sampler == SamplerKind::BruteForce);
    CHECK(cfg.dedup);
    CHECK(cfg.warm_start_fm);
    CHECK_NOTHROW(cfg.validate());

    std::ostringstream written;
    write_pipeline_config(written, cfg);
    std::ostringstream rewritten;
    write_pipeline_config(rewritten, parse(written.str()));
    CHECK(written.str() == rewritten.str());

    const auto strat = parse("[dataset]\nbands = 0:0.5, 0.5:0.8, 0.8:1\nfractions = 0.5,0.3,0.2\n");
    REQUIRE(strat.stratification);
    CHECK(strat.stratification->bands.size() == 3);
    CHECK(strat.stratification->bands[1].upper == 0.8);
    CHECK(parse("[run]\n[sampler]\nkind = simulated_annealing\n").sampler == SamplerKind::SimulatedAnnealing);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("[run]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[nowhere]\niterations = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("iterations = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\niterations = many\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\niterations = 1\niterations = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\ndedup = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse("[sampler]\nkind = quantum\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run\n"), ConfigError);

    auto cfg = tiny_config("out");
    cfg.samples_per_iteration = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = tiny_config("out");
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = tiny_config("out");
    cfg.augmentation = AugmentationKind::BitFlip;
    cfg.flip_copies = 7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.flip_copies = 6;
    CHECK_NOTHROW(cfg.validate());
    cfg = tiny_config("out");
    cfg.objective.target = "01";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = tiny_config("out");
    cfg.architecture.latent_bits = 30;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(load_pipeline_config("/nonexistent/bvq.ini"), MissingInputError);
}

TEST_CASE("bit flip augmentation") {
    const auto x = BinaryVector::from_string("010");
    const auto all = bit_flip_augment(x, 3, 1);
    const std::set<std::string> got = {all[0].to_string(), all[1].to_string(), all[2].to_string()};
    CHECK(got == std::set<std::string>{"110", "000", "011"});
    const auto one = bit_flip_augment(x, 1, 2);
    REQUIRE(one.size() == 1);
    CHECK(hamming_distance(one[0], x) == 1);
    CHECK_THROWS_AS(bit_flip_augment(x, 4, 1), InvalidArgument);
    CHECK_THROWS_AS(bit_flip_augment(x, 0, 1), InvalidArgument);
    CHECK(bit_flip_augment(BinaryVector(12), 5, 9) == bit_flip_augment(BinaryVector(12), 5, 9));
}

TEST_CASE("hardware feasibility") {
    PipelineConfig cfg;
    cfg.architecture.latent_bits = 500;
    std::ostringstream warn;
    CHECK_FALSE(check_hardware_feasibility(cfg, 180, &warn).fits_hardware);
    CHECK(warn.str().find("warning") != std::string::npos);
    cfg.architecture.latent_bits = 64;
    std::ostringstream quiet;
    CHECK(check_hardware_feasibility(cfg, 64, &quiet).fits_hardware);
    CHECK(quiet.str().empty());
    cfg.architecture.latent_bits = 1;
    CHECK(check_hardware_feasibility(cfg, 180).fits_hardware);
}

TEST_CASE("iterations keep the dataset consistent") {
    const auto cfg = tiny_config("unused");
    auto state = tiny_state(cfg, 12);
    CHECK(state.running_max_fom == state.dataset.max_label());
    double previous = state.running_max_fom;
    for (int t = 0; t < 4; ++t) {
        const auto before = state.dataset.size();
        const auto it = run_iteration(state, cfg);
        CHECK(state.dataset.size() == before + it.record.new_vectors);
        CHECK(it.record.dataset_size == state.dataset.size());
        CHECK(it.record.running_max_fom >= previous);
        CHECK(it.record.std_fom >= 0.0);
        CHECK(it.designs.size() <= cfg.samples_per_iteration);
        previous = it.record.running_max_fom;
        CHECK_FALSE(state.dataset.has_duplicates());
    }
    CHECK(state.history.size() == 4);
    CHECK(state.fm.has_value());
    // Every stored label re-validates through a fresh decode.
    for (std::size_t r = 0; r < state.dataset.size(); ++r)
        CHECK(state.objective->evaluate(decode(*state.bvae, state.dataset.x()[r]).pattern) == state.dataset.y()[r]);
}

TEST_CASE("exhausted search spaces stagnate") {
    auto cfg = tiny_config("unused");
    cfg.architecture.latent_bits = 3;
    auto state = tiny_state(cfg, 8);
    const auto it = run_iteration(state, cfg);
    CHECK(it.record.stagnated);
    CHECK(it.record.new_vectors == 0);
    CHECK(it.record.evaluated == 0);
    CHECK(it.record.running_max_fom == state.initial_best_fom);
    CHECK(state.stagnation_events == 1);
    CHECK(state.dataset.size() == 8);
}

TEST_CASE("dedup off keeps repeated vectors") {
    auto cfg = tiny_config("unused");
    cfg.dedup = false;
    cfg.architecture.latent_bits = 3;
    auto state = tiny_state(cfg, 8);
    const auto it = run_iteration(state, cfg);
    CHECK(it.record.new_vectors == cfg.samples_per_iteration);
    CHECK(state.dataset.size() == 8 + cfg.samples_per_iteration);
    CHECK(state.dataset.has_duplicates());
}

TEST_CASE("augmentation fills a short batch") {
    auto cfg = tiny_config("unused");
    cfg.sampler = SamplerKind::SimulatedAnnealing;
    cfg.schedule.num_reads = 1;
    cfg.schedule.num_sweeps = 50;
    cfg.samples_per_iteration = 5;
    cfg.augmentation = AugmentationKind::BitFlip;
    cfg.flip_copies = 6;
    auto state = tiny_state(cfg, 12);
    const auto before = state.dataset;
    const auto it = run_iteration(state, cfg);
    REQUIRE(it.samples.size() == 1);
    const auto& best = it.samples.best().bits;
    // With one distinct read and all six flips, the candidates are the read
    // itself plus its neighbours, minus anything already stored.
    std::size_t admissible = before.contains(best) ? 0 : 1;
    for (std::size_t i = 0; i < 6; ++i) {
        auto v = best;
        v.flip(i);
        admissible += before.contains(v) ? 0 : 1;
    }
    CHECK(it.designs.size() == std::min<std::size_t>(5, admissible));
    for (const auto& d : it.designs) {
        if (d.augmented) {
            CHECK(hamming_distance(d.bits, best) == 1);
            CHECK(d.energy == doctest::Approx(qubo_energy(fm_to_qubo(*state.fm), d.bits)));
        }
        CHECK_FALSE(before.contains(d.bits));
    }
}

TEST_CASE("full pipeline is deterministic and writes its artifacts") {
    const auto a = scratch("run_a");
    const auto b = scratch("run_b");
    const auto ra = run_pipeline(tiny_config(a));
    const auto rb = run_pipeline(tiny_config(b));
    CHECK(ra.state.history.size() == 3);
    CHECK(slurp(a / "convergence.csv") == slurp(b / "convergence.csv"));
    CHECK(slurp(a / "surrogate_error.csv") == slurp(b / "surrogate_error.csv"));
    CHECK(slurp(a / "dataset_final.txt") == slurp(b / "dataset_final.txt"));
    CHECK(slurp(a / "convergence.csv").rfind(
              "iteration,mean_fom,std_fom,max_fom,running_max_fom,dataset_size,min_energy\n", 0) == 0);
    for (const char* f : {"fm_final.txt", "dataset_initial.txt", "bvae.txt", "best_designs/latents.txt",
                          "best_designs/rank0.pgm"})
        CHECK_MESSAGE(fs::exists(a / f), f);
    CHECK(load_dataset(a / "dataset_final.txt").size() == ra.state.dataset.size());

    // Reusing the trained model and dataset gives the same loop.
    auto reuse = tiny_config(scratch("run_c"));
    reuse.bvae_checkpoint = a / "bvae.txt";
    reuse.dataset_path = a / "dataset_initial.txt";
    run_pipeline(reuse);
    CHECK(slurp(reuse.output_dir / "convergence.csv") == slurp(a / "convergence.csv"));

    auto single = tiny_config(scratch("run_d"));
    single.iterations = 1;
    single.bvae_checkpoint = a / "bvae.txt";
    CHECK(run_pipeline(single).state.history.size() == 1);
}

TEST_CASE("pipeline input errors") {
    auto cfg = tiny_config(scratch("run_e"));
    cfg.dataset_path = "/nonexistent/dataset.txt";
    cfg.bvae_training.epochs = 1;
    CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("/nonexistent/dataset.txt"), MissingInputError);
    cfg = tiny_config(scratch("run_f"));
    cfg.bvae_checkpoint = "/nonexistent/bvae.txt";
    CHECK_THROWS_AS(run_pipeline(cfg), MissingInputError);
    cfg = tiny_config(scratch("run_g"));
    cfg.iterations = 0;
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
    CHECK_FALSE(fs::exists(cfg.output_dir));
}
