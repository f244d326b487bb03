#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "svss/svss.hpp"

namespace py = pybind11;
using namespace svss;

namespace {

using MeanVar = std::tuple<VectorXd, VectorXd>;

MeanVar unpack(const Predictive& p) { return {p.mean, p.variance}; }

std::vector<SpectralSample> as_samples(const py::object& obj) {
  if (py::isinstance<SpectralSample>(obj)) return {obj.cast<SpectralSample>()};
  return obj.cast<std::vector<SpectralSample>>();
}

template <typename E>
void register_error(py::module_& m, const char* name, py::handle base) {
  py::register_exception<E>(m, name, base);
}

}  // namespace

PYBIND11_MODULE(_svss, m) {
  m.doc() = "Spectral mixture kernels with variance-optimal spectral sampling";

  // Registered base first: pybind11 tries translators newest first, so the
  // most derived type wins.
  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  register_error<ShapeError>(m, "ShapeError", error);
  register_error<InvalidParams>(m, "InvalidParams", error);
  register_error<InvalidSample>(m, "InvalidSample", error);
  register_error<StaleSample>(m, "StaleSample", error);
  register_error<InsufficientData>(m, "InsufficientData", error);
  register_error<BudgetTooSmall>(m, "BudgetTooSmall", error);
  register_error<NumericalFailure>(m, "NumericalFailure", error);
  register_error<TooLarge>(m, "TooLarge", error);
  auto data_error = py::register_exception<DataError>(m, "DataError", error);
  register_error<ParseError>(m, "ParseError", data_error);
  register_error<FileNotFound>(m, "FileNotFound", data_error);
  register_error<UsageError>(m, "UsageError", error);

  py::class_<SMParams>(m, "SMParams")
      .def(py::init([](VectorXd weights, MatrixXd means, MatrixXd scales, double noise_var) {
             SMParams p{std::move(weights), std::move(means), std::move(scales), noise_var};
             p.validate();
             return p;
           }),
           py::arg("weights"), py::arg("means"), py::arg("scales"), py::arg("noise_var"))
      .def_readwrite("weights", &SMParams::weights)
      .def_readwrite("means", &SMParams::means)
      .def_readwrite("scales", &SMParams::scales)
      .def_readwrite("noise_var", &SMParams::noise_var)
      .def_property_readonly("components", &SMParams::components)
      .def_property_readonly("dims", &SMParams::dims)
      .def("validate", &SMParams::validate)
      .def("__repr__", [](const SMParams& p) {
        return "SMParams(Q=" + std::to_string(p.components()) + ", D=" + std::to_string(p.dims()) + ")";
      });

  py::class_<Allocation>(m, "Allocation")
      .def_readonly("counts", &Allocation::counts)
      .def_readonly("ratios", &Allocation::ratios)
      .def_readonly("total", &Allocation::total);

  py::class_<SpectralSample>(m, "SpectralSample")
      .def_readonly("points", &SpectralSample::points)
      .def_readonly("noise", &SpectralSample::noise)
      .def_readonly("component_of", &SpectralSample::component_of)
      .def_readonly("allocation", &SpectralSample::allocation);

  m.def("sm_kernel", &sm_kernel, py::arg("params"), py::arg("tau"));
  m.def("sm_gram", &sm_gram, py::arg("params"), py::arg("X"));
  m.def("sm_cross_gram", &sm_cross_gram, py::arg("params"), py::arg("A"), py::arg("B"));
  m.def(
      "feature_map",
      [](const SMParams& p, const SpectralSample& s, const MatrixXd& X) { return feature_map(p, s, X).values; },
      py::arg("params"), py::arg("sample"), py::arg("X"));
  m.def("concentration_bound", &concentration_bound, py::arg("params"), py::arg("n"), py::arg("m0"),
        py::arg("k_norm"), py::arg("eps"));

  m.def("equal_ratios", &equal_ratios, py::arg("components"));
  m.def("weight_ratios", &weight_ratios, py::arg("params"));
  m.def(
      "optimal_ratios",
      [](const SMParams& p, const MatrixXd& X, double rate, std::uint64_t seed, std::optional<std::uint64_t> max_pairs) {
        Rng rng(seed);
        return optimal_ratios(p, pairwise_subset(X, rate, rng, max_pairs));
      },
      py::arg("params"), py::arg("X"), py::arg("rate") = 1.0, py::arg("seed") = 0,
      py::arg("max_pairs") = std::optional<std::uint64_t>(kDefaultMaxPairs));
  m.def("allocate", &allocate, py::arg("ratios"), py::arg("total"));
  m.def(
      "draw_sample",
      [](const SMParams& p, const Allocation& a, std::uint64_t seed) {
        Rng rng(seed);
        return draw_sample(p, a, rng);
      },
      py::arg("params"), py::arg("allocation"), py::arg("seed") = 0);
  m.def("sample_from_noise", &sample_from_noise, py::arg("params"), py::arg("allocation"), py::arg("noise"));

  m.def(
      "log_marginal",
      [](const SMParams& p, const MatrixXd& phi, const VectorXd& y) { return log_marginal(p, FeatureMatrix{phi, {}}, y); },
      py::arg("params"), py::arg("phi"), py::arg("y"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_property(
          "mode", [](const TrainConfig& c) { return std::string(mode_name(c.mode)); },
          [](TrainConfig& c, const std::string& name) { c.mode = parse_mode(name); })
      .def_property(
          "init", [](const TrainConfig& c) { return std::string(init_name(c.init)); },
          [](TrainConfig& c, const std::string& name) { c.init = parse_init(name); })
      .def_readwrite("use_ws", &TrainConfig::use_ws)
      .def_readwrite("use_ng", &TrainConfig::use_ng)
      .def_readwrite("mc_samples", &TrainConfig::mc_samples)
      .def_readwrite("pair_rate", &TrainConfig::pair_rate)
      .def_readwrite("max_pairs", &TrainConfig::max_pairs)
      .def_readwrite("iterations", &TrainConfig::iterations)
      .def_readwrite("step_size", &TrainConfig::step_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("total_points", &TrainConfig::total_points)
      .def_readwrite("components", &TrainConfig::components)
      .def_readwrite("prior_scale_factor", &TrainConfig::prior_scale_factor)
      .def("validate", &TrainConfig::validate);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("failure", &TrainResult::failure)
      .def_property_readonly("allocation", [](const TrainResult& r) { return r.state.allocation; })
      .def_property_readonly("fixed_noise", [](const TrainResult& r) { return r.state.fixed_noise; })
      .def_property_readonly("objective", [](const TrainResult& r) {
        VectorXd v(static_cast<Index>(r.state.trace.size()));
        for (std::size_t i = 0; i < r.state.trace.size(); ++i) v(static_cast<Index>(i)) = r.state.trace[i].objective;
        return v;
      });

  m.def(
      "train",
      [](const MatrixXd& X, const VectorXd& y, const TrainConfig& config) {
        py::gil_scoped_release release;
        return train(X, y, config);
      },
      py::arg("X"), py::arg("y"), py::arg("config"));

  m.def(
      "ssgp_predict",
      [](const SMParams& p, const py::object& samples, const MatrixXd& X, const VectorXd& y, const MatrixXd& T) {
        return unpack(ssgp_predict(p, as_samples(samples), X, y, T));
      },
      py::arg("params"), py::arg("samples"), py::arg("X"), py::arg("y"), py::arg("X_test"),
      "Mean and variance from one sample or the moment-matched average of several.");
  m.def(
      "exact_predict",
      [](const SMParams& p, const MatrixXd& X, const VectorXd& y, const MatrixXd& T) {
        return unpack(exact_predict(p, X, y, T));
      },
      py::arg("params"), py::arg("X"), py::arg("y"), py::arg("X_test"));
  m.def(
      "metrics",
      [](const VectorXd& mean, const VectorXd& variance, const VectorXd& targets) {
        const Metrics r = metrics(Predictive{mean, variance, std::nullopt}, targets);
        return std::make_tuple(r.rmse, r.mnll);
      },
      py::arg("mean"), py::arg("variance"), py::arg("targets"), "Returns (rmse, mnll).");

  m.def(
      "load_csv",
      [](const std::string& path, const std::string& target, bool header) {
        const RawTable t = load_csv(path, target, header);
        return std::make_tuple(t.X, t.y);
      },
      py::arg("path"), py::arg("target_column") = "-1", py::arg("has_header") = true);
  m.def(
      "synth_sm",
      [](const SMParams& p, Index n, double x_min, double x_max, std::uint64_t seed, bool grid) {
        const SyntheticData d = synth_sm(p, n, x_min, x_max, seed, grid);
        return std::make_tuple(d.table.X, d.table.y);
      },
      py::arg("params"), py::arg("n"), py::arg("x_min") = 0.0, py::arg("x_max") = 1.0, py::arg("seed") = 0,
      py::arg("grid") = true);
}
