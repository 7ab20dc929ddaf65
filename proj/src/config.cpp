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

#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bvq/error.hpp"
#include "bvq/pipeline.hpp"
#include "bvq/textio.hpp"

namespace bvq {

SamplerKind parse_sampler_kind(std::string_view text) {
    if (text == "brute_force") return SamplerKind::BruteForce;
    if (text == "simulated_annealing") return SamplerKind::SimulatedAnnealing;
    throw ConfigError("unknown sampler '" + std::string(text) +
                      "' (expected brute_force or simulated_annealing)");
}

std::string_view sampler_kind_name(SamplerKind kind) {
    return kind == SamplerKind::BruteForce ? "brute_force" : "simulated_annealing";
}

AugmentationKind parse_augmentation_kind(std::string_view text) {
    if (text == "none") return AugmentationKind::None;
    if (text == "bit_flip") return AugmentationKind::BitFlip;
    throw ConfigError("unknown augmentation '" + std::string(text) + "' (expected none or bit_flip)");
}

std::string_view augmentation_kind_name(AugmentationKind kind) {
    return kind == AugmentationKind::None ? "none" : "bit_flip";
}

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string current;
    for (const char ch : text) {
        if (ch == ',') {
            items.push_back(current);
            current.clear();
        } else if (ch != ' ' && ch != '\t') {
            current.push_back(ch);
        }
    }
    if (!current.empty() || !items.empty()) items.push_back(current);
    return items;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(textio::parse_uint(v)); }
double to_double(const std::string& v) { return textio::parse_double(v); }

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw FormatError("invalid boolean '" + v + "'");
}

std::vector<std::size_t> to_sizes(const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(v)) out.push_back(to_size(item));
    return out;
}

std::vector<double> to_doubles(const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(to_double(item));
    return out;
}

std::vector<FomBand> to_bands(const std::string& v) {
    std::vector<FomBand> out;
    for (const auto& item : split_list(v)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw FormatError("band '" + item + "' must be lower:upper");
        out.push_back({to_double(item.substr(0, colon)), to_double(item.substr(colon + 1))});
    }
    return out;
}

StratificationSpec& strat(PipelineConfig& c) {
    if (!c.stratification) c.stratification.emplace();
    return *c.stratification;
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"run.iterations", [](PipelineConfig& c, const std::string& v) { c.iterations = to_size(v); }},
        {"run.samples_per_iteration",
         [](PipelineConfig& c, const std::string& v) { c.samples_per_iteration = to_size(v); }},
        {"run.seed", [](PipelineConfig& c, const std::string& v) { c.seed = textio::parse_uint(v); }},
        {"run.dedup", [](PipelineConfig& c, const std::string& v) { c.dedup = to_bool(v); }},
        {"run.warm_start_fm", [](PipelineConfig& c, const std::string& v) { c.warm_start_fm = to_bool(v); }},
        {"run.label_margin", [](PipelineConfig& c, const std::string& v) { c.label_margin = to_double(v); }},
        {"run.output_dir", [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},

        {"bvae.checkpoint", [](PipelineConfig& c, const std::string& v) { c.bvae_checkpoint = v; }},
        {"bvae.corpus", [](PipelineConfig& c, const std::string& v) { c.corpus_path = v; }},
        {"bvae.corpus_kind",
         [](PipelineConfig& c, const std::string& v) {
             try {
                 c.corpus_kind = parse_corpus_kind(v);
             } catch (const InvalidArgument& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"bvae.corpus_count", [](PipelineConfig& c, const std::string& v) { c.corpus_count = to_size(v); }},
        {"bvae.image_side", [](PipelineConfig& c, const std::string& v) { c.architecture.image_side = to_size(v); }},
        {"bvae.latent_bits", [](PipelineConfig& c, const std::string& v) { c.architecture.latent_bits = to_size(v); }},
        {"bvae.encoder_hidden",
         [](PipelineConfig& c, const std::string& v) { c.architecture.encoder_hidden = to_sizes(v); }},
        {"bvae.decoder_hidden",
         [](PipelineConfig& c, const std::string& v) { c.architecture.decoder_hidden = to_sizes(v); }},
        {"bvae.epochs", [](PipelineConfig& c, const std::string& v) { c.bvae_training.epochs = to_size(v); }},
        {"bvae.batch_size", [](PipelineConfig& c, const std::string& v) { c.bvae_training.batch_size = to_size(v); }},
        {"bvae.learning_rate",
         [](PipelineConfig& c, const std::string& v) { c.bvae_training.learning_rate = to_double(v); }},
        {"bvae.validation_fraction",
         [](PipelineConfig& c, const std::string& v) { c.bvae_training.validation_fraction = to_double(v); }},
        {"bvae.tau_max",
         [](PipelineConfig& c, const std::string& v) {
             c.bvae_training.temperature.tau_max = to_double(v);
             c.bvae_training.temperature.tau = c.bvae_training.temperature.tau_max;
         }},
        {"bvae.tau_min", [](PipelineConfig& c, const std::string& v) { c.bvae_training.temperature.tau_min = to_double(v); }},
        {"bvae.gamma", [](PipelineConfig& c, const std::string& v) { c.bvae_training.temperature.gamma = to_double(v); }},
        {"bvae.blur_radius_px", [](PipelineConfig& c, const std::string& v) { c.blur_radius_px = to_double(v); }},

        {"dataset.path", [](PipelineConfig& c, const std::string& v) { c.dataset_path = v; }},
        {"dataset.count", [](PipelineConfig& c, const std::string& v) { c.initial_count = to_size(v); }},
        {"dataset.pool", [](PipelineConfig& c, const std::string& v) { c.stratify_pool = to_size(v); }},
        {"dataset.bands", [](PipelineConfig& c, const std::string& v) { strat(c).bands = to_bands(v); }},
        {"dataset.fractions", [](PipelineConfig& c, const std::string& v) { strat(c).fractions = to_doubles(v); }},

        {"fm.rank", [](PipelineConfig& c, const std::string& v) { c.fm.rank = to_size(v); }},
        {"fm.epochs", [](PipelineConfig& c, const std::string& v) { c.fm.epochs = to_size(v); }},
        {"fm.learning_rate", [](PipelineConfig& c, const std::string& v) { c.fm.learning_rate = to_double(v); }},
        {"fm.init_scale", [](PipelineConfig& c, const std::string& v) { c.fm.init_scale = to_double(v); }},
        {"fm.train_fraction", [](PipelineConfig& c, const std::string& v) { c.fm.train_fraction = to_double(v); }},
        {"fm.val_fraction", [](PipelineConfig& c, const std::string& v) { c.fm.val_fraction = to_double(v); }},
        {"fm.test_fraction", [](PipelineConfig& c, const std::string& v) { c.fm.test_fraction = to_double(v); }},

        {"sampler.kind", [](PipelineConfig& c, const std::string& v) { c.sampler = parse_sampler_kind(v); }},
        {"sampler.beta_start", [](PipelineConfig& c, const std::string& v) { c.schedule.beta_start = to_double(v); }},
        {"sampler.beta_end", [](PipelineConfig& c, const std::string& v) { c.schedule.beta_end = to_double(v); }},
        {"sampler.num_sweeps", [](PipelineConfig& c, const std::string& v) { c.schedule.num_sweeps = to_size(v); }},
        {"sampler.num_reads", [](PipelineConfig& c, const std::string& v) { c.schedule.num_reads = to_size(v); }},

        {"augmentation.kind",
         [](PipelineConfig& c, const std::string& v) { c.augmentation = parse_augmentation_kind(v); }},
        {"augmentation.copies", [](PipelineConfig& c, const std::string& v) { c.flip_copies = to_size(v); }},

        {"objective.kind", [](PipelineConfig& c, const std::string& v) { c.objective.kind = v; }},
        {"objective.target", [](PipelineConfig& c, const std::string& v) { c.objective.target = v; }},
        {"objective.target_fill", [](PipelineConfig& c, const std::string& v) { c.objective.target_fill = to_double(v); }},
        {"objective.smoothness_weight",
         [](PipelineConfig& c, const std::string& v) { c.objective.smoothness_weight = to_double(v); }},
        {"objective.fill_width", [](PipelineConfig& c, const std::string& v) { c.objective.fill_width = to_double(v); }},

        {"hardware.max_clique", [](PipelineConfig& c, const std::string& v) { c.max_clique = to_size(v); }},
    };
    return table;
}

template <class Fn>
void rethrow_as_config(const char* what, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

std::string join(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (iterations < 1) throw ConfigError("run.iterations must be at least 1");
    if (samples_per_iteration < 1) throw ConfigError("run.samples_per_iteration must be at least 1");
    if (!(label_margin >= 0.0)) throw ConfigError("run.label_margin must be non-negative");
    if (!(blur_radius_px >= 0.0)) throw ConfigError("bvae.blur_radius_px must be non-negative");
    if (bvae_checkpoint.empty() && corpus_path.empty() && corpus_count < 1)
        throw ConfigError("bvae.corpus_count must be at least 1");
    if (dataset_path.empty() && initial_count < 1) throw ConfigError("dataset.count must be at least 1");
    rethrow_as_config("bvae", [&] {
        architecture.validate();
        bvae_training.validate();
    });
    rethrow_as_config("fm", [&] { fm.validate(); });
    rethrow_as_config("sampler", [&] { schedule.validate(); });
    if (sampler == SamplerKind::BruteForce && latent_bits() > kBruteForceMaxBits)
        throw ConfigError("brute_force sampler is capped at " + std::to_string(kBruteForceMaxBits) +
                          " latent bits");
    if (augmentation == AugmentationKind::BitFlip && (flip_copies < 1 || flip_copies > latent_bits()))
        throw ConfigError("augmentation.copies must lie in [1, latent_bits]");
    if (stratification) {
        rethrow_as_config("dataset stratification", [&] { stratification->validate(); });
        if (stratify_pool < initial_count)
            throw ConfigError("dataset.pool must be at least dataset.count");
    }
    if (max_clique < 1) throw ConfigError("hardware.max_clique must be at least 1");
    rethrow_as_config("objective", [&] { make_objective(objective, architecture.image_side); });
}

PipelineConfig parse_pipeline_config(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    PipelineConfig cfg;
    const auto& table = setters();
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config key '" + section + "' must appear under a [section] header");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            const auto it = table.find(full);
            if (it == table.end()) throw ConfigError("unknown config key '" + full + "'");
            try {
                it->second(cfg, value.get_value<std::string>());
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("bad value for '" + full + "': " + e.what());
            }
        }
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    auto in = textio::open_input(path);
    return parse_pipeline_config(in);
}

void write_pipeline_config(std::ostream& out, const PipelineConfig& c) {
    using textio::format_decimal;
    out << "[run]\n"
        << "iterations = " << c.iterations << '\n'
        << "samples_per_iteration = " << c.samples_per_iteration << '\n'
        << "seed = " << c.seed << '\n'
        << "dedup = " << (c.dedup ? "true" : "false") << '\n'
        << "warm_start_fm = " << (c.warm_start_fm ? "true" : "false") << '\n'
        << "label_margin = " << format_decimal(c.label_margin) << '\n'
        << "output_dir = " << c.output_dir.string() << "\n\n";
    out << "[bvae]\n";
    if (!c.bvae_checkpoint.empty()) out << "checkpoint = " << c.bvae_checkpoint.string() << '\n';
    if (!c.corpus_path.empty()) out << "corpus = " << c.corpus_path.string() << '\n';
    out << "corpus_kind = " << corpus_kind_name(c.corpus_kind) << '\n'
        << "corpus_count = " << c.corpus_count << '\n'
        << "image_side = " << c.architecture.image_side << '\n'
        << "latent_bits = " << c.architecture.latent_bits << '\n'
        << "encoder_hidden = " << join(c.architecture.encoder_hidden) << '\n'
        << "decoder_hidden = " << join(c.architecture.decoder_hidden) << '\n'
        << "epochs = " << c.bvae_training.epochs << '\n'
        << "batch_size = " << c.bvae_training.batch_size << '\n'
        << "learning_rate = " << format_decimal(c.bvae_training.learning_rate) << '\n'
        << "validation_fraction = " << format_decimal(c.bvae_training.validation_fraction) << '\n'
        << "tau_max = " << format_decimal(c.bvae_training.temperature.tau_max) << '\n'
        << "tau_min = " << format_decimal(c.bvae_training.temperature.tau_min) << '\n'
        << "gamma = " << format_decimal(c.bvae_training.temperature.gamma) << '\n'
        << "blur_radius_px = " << format_decimal(c.blur_radius_px) << "\n\n";
    out << "[dataset]\n";
    if (!c.dataset_path.empty()) out << "path = " << c.dataset_path.string() << '\n';
    out << "count = " << c.initial_count << '\n';
    if (c.stratification) {
        out << "pool = " << c.stratify_pool << '\n' << "bands = ";
        for (std::size_t b = 0; b < c.stratification->bands.size(); ++b)
            out << (b ? "," : "") << format_decimal(c.stratification->bands[b].lower) << ':'
                << format_decimal(c.stratification->bands[b].upper);
        out << "\nfractions = ";
        for (std::size_t b = 0; b < c.stratification->fractions.size(); ++b)
            out << (b ? "," : "") << format_decimal(c.stratification->fractions[b]);
        out << '\n';
    }
    out << "\n[fm]\n"
        << "rank = " << c.fm.rank << '\n'
        << "epochs = " << c.fm.epochs << '\n'
        << "learning_rate = " << format_decimal(c.fm.learning_rate) << '\n'
        << "init_scale = " << format_decimal(c.fm.init_scale) << '\n'
        << "train_fraction = " << format_decimal(c.fm.train_fraction) << '\n'
        << "val_fraction = " << format_decimal(c.fm.val_fraction) << '\n'
        << "test_fraction = " << format_decimal(c.fm.test_fraction) << "\n\n";
    out << "[sampler]\n"
        << "kind = " << sampler_kind_name(c.sampler) << '\n'
        << "beta_start = " << format_decimal(c.schedule.beta_start) << '\n'
        << "beta_end = " << format_decimal(c.schedule.beta_end) << '\n'
        << "num_sweeps = " << c.schedule.num_sweeps << '\n'
        << "num_reads = " << c.schedule.num_reads << "\n\n";
    out << "[augmentation]\n"
        << "kind = " << augmentation_kind_name(c.augmentation) << '\n'
        << "copies = " << c.flip_copies << "\n\n";
    out << "[objective]\n" << "kind = " << c.objective.kind << '\n';
    if (!c.objective.target.empty()) out << "target = " << c.objective.target << '\n';
    out << "target_fill = " << format_decimal(c.objective.target_fill) << '\n'
        << "smoothness_weight = " << format_decimal(c.objective.smoothness_weight) << '\n'
        << "fill_width = " << format_decimal(c.objective.fill_width) << "\n\n";
    out << "[hardware]\n" << "max_clique = " << c.max_clique << '\n';
}

}  // namespace bvq
