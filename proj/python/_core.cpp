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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bvq/bvae.hpp"
#include "bvq/dataset.hpp"
#include "bvq/error.hpp"
#include "bvq/factorization_machine.hpp"
#include "bvq/image.hpp"
#include "bvq/objectives.hpp"
#include "bvq/pipeline.hpp"
#include "bvq/qubo.hpp"
#include "bvq/samplers.hpp"

namespace py = pybind11;
using namespace bvq;

namespace {

QuadraticMap to_quadratic(const py::dict& d) {
    QuadraticMap out;
    for (const auto& [key, value] : d) {
        const auto pair = key.cast<std::pair<std::size_t, std::size_t>>();
        out[pair] = value.cast<double>();
    }
    return out;
}

py::dict from_quadratic(const QuadraticMap& m) {
    py::dict d;
    for (const auto& [key, value] : m) d[py::make_tuple(key.first, key.second)] = value;
    return d;
}

BinaryVector to_bits(const py::handle& obj) {
    if (py::isinstance<BinaryVector>(obj)) return obj.cast<BinaryVector>();
    if (py::isinstance<py::str>(obj)) return BinaryVector::from_string(obj.cast<std::string>());
    std::vector<std::uint8_t> bits;
    for (const auto& item : obj) {
        const auto v = item.cast<long>();
        if (v != 0 && v != 1) throw InvalidArgument("bits must be 0 or 1");
        bits.push_back(static_cast<std::uint8_t>(v));
    }
    return BinaryVector(std::move(bits));
}

Image to_image(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw DimensionError("image must be a square 2-D array");
    const auto side = static_cast<std::size_t>(a.shape(0));
    return Image(side, std::vector<double>(a.data(), a.data() + side * side));
}

py::array_t<double> from_image(const Image& img) {
    const auto m = static_cast<py::ssize_t>(img.side());
    py::array_t<double> out({m, m});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

py::list sample_rows(const SampleSet& s) {
    py::list rows;
    for (const auto& e : s.entries) rows.append(py::make_tuple(e.bits.to_string(), e.energy, e.occurrences));
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Binary VAE + QUBO surrogate optimisation core";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<FormatError>(m, "FormatError", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<MissingInputError>(m, "MissingInputError", error.ptr());

    py::class_<BinaryVector>(m, "BinaryVector")
        .def(py::init([](const py::object& o) { return to_bits(o); }), py::arg("bits"))
        .def("__len__", &BinaryVector::size)
        .def("__getitem__", [](const BinaryVector& x, std::size_t i) {
            if (i >= x.size()) throw py::index_error();
            return static_cast<int>(x[i]);
        })
        .def("__str__", &BinaryVector::to_string)
        .def("__repr__", [](const BinaryVector& x) { return "BinaryVector('" + x.to_string() + "')"; })
        .def("__eq__", [](const BinaryVector& a, const BinaryVector& b) { return a == b; })
        .def("__hash__", [](const BinaryVector& x) { return BinaryVectorHash{}(x); })
        .def("tolist", [](const BinaryVector& x) { return std::vector<int>(x.bits().begin(), x.bits().end()); });
    py::implicitly_convertible<py::str, BinaryVector>();
    py::implicitly_convertible<py::list, BinaryVector>();
    py::implicitly_convertible<py::tuple, BinaryVector>();

    py::class_<QuboProblem>(m, "QuboProblem")
        .def(py::init([](std::vector<double> linear, const py::dict& quadratic, double offset) {
                 return QuboProblem(std::move(linear), to_quadratic(quadratic), offset);
             }),
             py::arg("linear"), py::arg("quadratic") = py::dict(), py::arg("offset") = 0.0)
        .def_property_readonly("n", &QuboProblem::n)
        .def_property_readonly("linear", &QuboProblem::linear)
        .def_property_readonly("quadratic", [](const QuboProblem& q) { return from_quadratic(q.quadratic()); })
        .def_property_readonly("offset", &QuboProblem::offset)
        .def("energy", [](const QuboProblem& q, const BinaryVector& x) { return qubo_energy(q, x); })
        .def("__eq__", [](const QuboProblem& a, const QuboProblem& b) { return a == b; })
        .def("dumps", [](const QuboProblem& q) {
            std::ostringstream s;
            write_qubo(s, q);
            return s.str();
        })
        .def_static("loads", [](const std::string& text) {
            std::istringstream s(text);
            return read_qubo(s);
        });

    py::class_<IsingProblem>(m, "IsingProblem")
        .def(py::init([](std::vector<double> h, const py::dict& j, double offset) {
                 return IsingProblem(std::move(h), to_quadratic(j), offset);
             }),
             py::arg("h"), py::arg("j") = py::dict(), py::arg("offset") = 0.0)
        .def_property_readonly("n", &IsingProblem::n)
        .def_property_readonly("h", &IsingProblem::h)
        .def_property_readonly("j", [](const IsingProblem& p) { return from_quadratic(p.j()); })
        .def_property_readonly("offset", &IsingProblem::offset)
        .def("energy", [](const IsingProblem& p, const std::vector<std::int8_t>& s) {
            return ising_energy(p, SpinVector(s));
        });

    m.def("qubo_energy", &qubo_energy, py::arg("q"), py::arg("x"));
    m.def("qubo_to_ising", &qubo_to_ising, py::arg("q"));
    m.def("ising_to_qubo", &ising_to_qubo, py::arg("m"));

    py::class_<ConnectivityReport>(m, "ConnectivityReport")
        .def_readonly("n", &ConnectivityReport::n)
        .def_readonly("edge_count", &ConnectivityReport::edge_count)
        .def_readonly("is_fully_connected", &ConnectivityReport::is_fully_connected)
        .def_readonly("max_supported_clique", &ConnectivityReport::max_supported_clique)
        .def_readonly("fits_hardware", &ConnectivityReport::fits_hardware);
    m.def("analyze_connectivity", &analyze_connectivity, py::arg("q"), py::arg("max_clique"));
    m.def("analyze_fully_connected", &analyze_fully_connected, py::arg("n"), py::arg("max_clique"));

    py::class_<AnnealSchedule>(m, "AnnealSchedule")
        .def(py::init([](double b0, double b1, std::size_t sweeps, std::size_t reads) {
                 AnnealSchedule s{b0, b1, sweeps, reads};
                 s.validate();
                 return s;
             }),
             py::arg("beta_start") = 0.1, py::arg("beta_end") = 10.0, py::arg("num_sweeps") = 1000,
             py::arg("num_reads") = 20)
        .def_readwrite("beta_start", &AnnealSchedule::beta_start)
        .def_readwrite("beta_end", &AnnealSchedule::beta_end)
        .def_readwrite("num_sweeps", &AnnealSchedule::num_sweeps)
        .def_readwrite("num_reads", &AnnealSchedule::num_reads)
        .def("beta", &AnnealSchedule::beta);

    m.def("brute_force_sample", [](const QuboProblem& q, std::size_t top_k) { return sample_rows(brute_force_sample(q, top_k)); },
          py::arg("q"), py::arg("top_k") = 1,
          "Lowest-energy states as (bits, energy, occurrences) tuples.");
    m.def("simulated_annealing_sample",
          [](const QuboProblem& q, const AnnealSchedule& s, std::uint64_t seed) {
              return sample_rows(simulated_annealing_sample(q, s, seed));
          },
          py::arg("q"), py::arg("schedule") = AnnealSchedule{}, py::arg("seed") = 0);

    py::class_<FmModel>(m, "FmModel")
        .def(py::init<std::size_t, std::size_t>(), py::arg("n"), py::arg("k"))
        .def(py::init<double, Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("w0"), py::arg("w"), py::arg("v"))
        .def_readwrite("w0", &FmModel::w0)
        .def_readwrite("w", &FmModel::w)
        .def_readwrite("v", &FmModel::v)
        .def_property_readonly("n", &FmModel::n)
        .def_property_readonly("k", &FmModel::k)
        .def("predict", [](const FmModel& f, const BinaryVector& x) { return fm_predict(f, x); })
        .def("to_qubo", [](const FmModel& f) { return fm_to_qubo(f); });

    m.def("fm_train",
          [](const std::vector<BinaryVector>& x, const std::vector<double>& y, std::size_t rank, std::size_t epochs,
             double learning_rate, std::uint64_t seed) {
              FmTrainConfig cfg;
              cfg.rank = rank;
              cfg.epochs = epochs;
              cfg.learning_rate = learning_rate;
              cfg.seed = seed;
              auto result = fm_train(x, y, cfg);
              py::dict report;
              report["train_mse"] = result.report.final_train_mse;
              report["val_mse"] = result.report.final_val_mse;
              report["test_mse"] = result.report.test_mse;
              report["test_r2"] = result.report.test_r2;
              report["loss_curve"] = result.report.loss_curve;
              return py::make_tuple(std::move(result.model), report);
          },
          py::arg("x"), py::arg("y"), py::arg("rank") = 8, py::arg("epochs") = 30, py::arg("learning_rate") = 0.05,
          py::arg("seed") = 0, "Train on (x, y); returns (model, report).");

    m.def("bit_flip_augment", &bit_flip_augment, py::arg("x"), py::arg("copies"), py::arg("seed") = 0);
    m.def("bernoulli_kl", &bernoulli_kl, py::arg("q"), py::arg("p") = 0.5);
    m.def("gumbel_softmax",
          [](const std::vector<double>& logits, double tau, const std::vector<double>& noise) {
              return gumbel_softmax(logits, tau, noise);
          },
          py::arg("logits"), py::arg("tau"), py::arg("noise"));

    py::class_<BvaeModel>(m, "BvaeModel")
        .def_static("load", &load_bvae, py::arg("path"))
        .def("save", [](const BvaeModel& b, const std::filesystem::path& p) { save_bvae(p, b); })
        .def_property_readonly("image_side", [](const BvaeModel& b) { return b.arch.image_side; })
        .def_property_readonly("latent_bits", [](const BvaeModel& b) { return b.arch.latent_bits; })
        .def_readonly("tau", &BvaeModel::tau)
        .def("encode", [](const BvaeModel& b, const py::array_t<double>& img) { return encode(b, to_image(img)); })
        .def("decode", [](const BvaeModel& b, const BinaryVector& x, double blur) {
            return from_image(decode(b, x, blur).pattern);
        }, py::arg("x"), py::arg("blur_radius_px") = 0.0);

    m.def("half_plane_patterns", [](std::size_t side) {
        py::list out;
        for (const auto& img : half_plane_patterns(side)) out.append(from_image(img));
        return out;
    });
    m.def("target_overlap", [](const py::array_t<double>& target, const py::array_t<double>& pattern) {
        return TargetOverlapObjective(to_image(target)).evaluate(to_image(pattern));
    });
    m.def("product_efficiency",
          [](const py::array_t<double>& pattern, double target_fill, double smoothness_weight, double fill_width) {
              const auto img = to_image(pattern);
              return ProductEfficiencyObjective(img.side(), target_fill, smoothness_weight, fill_width).evaluate(img);
          },
          py::arg("pattern"), py::arg("target_fill") = 0.5, py::arg("smoothness_weight") = 1.0,
          py::arg("fill_width") = 0.02);

    m.def("check_hardware_feasibility",
          [](std::size_t n, std::size_t max_clique) {
              PipelineConfig cfg;
              cfg.architecture.latent_bits = n;
              return check_hardware_feasibility(cfg, max_clique);
          },
          py::arg("n"), py::arg("max_clique") = 180);

    m.def("run_pipeline",
          [](const std::filesystem::path& config, const std::optional<std::filesystem::path>& out,
             std::optional<std::uint64_t> seed) {
              auto cfg = load_pipeline_config(config);
              if (out) cfg.output_dir = *out;
              if (seed) cfg.seed = *seed;
              PipelineResult result = [&] {
                  py::gil_scoped_release release;
                  return run_pipeline(cfg);
              }();
              py::list history;
              for (const auto& r : result.state.history) {
                  py::dict row;
                  row["iteration"] = r.iteration;
                  row["mean_fom"] = r.mean_fom;
                  row["std_fom"] = r.std_fom;
                  row["max_fom"] = r.max_fom;
                  row["running_max_fom"] = r.running_max_fom;
                  row["dataset_size"] = r.dataset_size;
                  row["min_energy"] = r.sampler_energy_min;
                  history.append(row);
              }
              py::dict summary;
              summary["initial_best_fom"] = result.state.initial_best_fom;
              summary["running_max_fom"] = result.state.running_max_fom;
              summary["history"] = history;
              summary["convergence_csv"] = result.convergence_csv.string();
              return summary;
          },
          py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
          "Run the loop described by a config file and return its convergence history.");
}
