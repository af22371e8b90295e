/*
 * Copyright 2026 The mccshap Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python bindings for data loading, model fitting and Shapley estimation.

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mccshap/adjust.hpp"
#include "mccshap/cli.hpp"
#include "mccshap/dataset.hpp"
#include "mccshap/error.hpp"
#include "mccshap/models.hpp"
#include "mccshap/shapley.hpp"
#include "mccshap/synthetic.hpp"

namespace py = pybind11;
using namespace mccshap;

namespace {

Mode ParseMode(const std::string& mode) {
  if (mode == "mcc") return Mode::kMcc;
  if (mode == "nmcc") return Mode::kNmcc;
  throw Error(ErrorCode::kInvalidArgument, "mode must be 'mcc' or 'nmcc', got '" + mode + "'");
}

std::vector<double> CheckedInstance(const Eigen::VectorXd& x) {
  return {x.data(), x.data() + x.size()};
}

py::dict ToDict(const ShapleyEstimate& e, const std::vector<std::string>& names) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["iterations"] = e.iterations;
  d["mode"] = std::string(ModeName(e.mode));
  d["target"] = TargetLabel(e, names);
  return d;
}

std::vector<std::size_t> ResolveFeatures(const DataMatrix& data,
                                         const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const std::string& n : names) out.push_back(data.index_of(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shapley values with multicollinearity correction";

  static py::exception<Error> error(m, "MccshapError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object instance = exc(e.what());
      instance.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(error.ptr(), instance.ptr());
    }
  });

  py::class_<DataMatrix>(m, "Dataset")
      .def(py::init([](const RowMatrix& values, std::vector<std::string> names,
                       const std::vector<std::string>& categorical) {
             std::vector<FeatureKind> kinds(names.size(), FeatureKind::kNumeric);
             for (const std::string& c : categorical) {
               for (std::size_t j = 0; j < names.size(); ++j) {
                 if (names[j] == c) kinds[j] = FeatureKind::kEncodedCategorical;
               }
             }
             return DataMatrix(values, std::move(names), std::move(kinds));
           }),
           py::arg("values"), py::arg("names"), py::arg("categorical") = std::vector<std::string>{})
      .def_static(
          "from_csv",
          [](const std::filesystem::path& path, const std::vector<std::string>& categorical) {
            return LoadCsv(path, CsvSchema{categorical}).data;
          },
          py::arg("path"), py::arg("categorical") = std::vector<std::string>{})
      .def_property_readonly("values", &DataMatrix::values)
      .def_property_readonly("names", &DataMatrix::names)
      .def_property_readonly("shape",
                             [](const DataMatrix& d) { return py::make_tuple(d.rows(), d.cols()); })
      .def_property_readonly("fingerprint", &DataMatrix::fingerprint)
      .def("index_of", &DataMatrix::index_of)
      .def("to_csv", [](const DataMatrix& d) {
        std::ostringstream out;
        WriteCsv(d, out);
        return out.str();
      });

  m.def(
      "synthetic",
      [](const std::string& preset, std::size_t rows, std::uint64_t seed, std::size_t width) {
        return GenerateSynthetic(SyntheticPreset(preset, rows, seed, width));
      },
      py::arg("preset"), py::arg("rows") = 1000, py::arg("seed") = 42, py::arg("width") = 10);
  m.def("synthetic_presets", &SyntheticPresetNames);

  py::class_<Predictor, std::shared_ptr<Predictor>>(m, "Model")
      .def("predict", &Predictor::Predict, py::arg("x"))
      .def_property_readonly("descriptor", &Predictor::descriptor)
      .def_property_readonly("feature_names", &Predictor::feature_names)
      .def_property_readonly("width", &Predictor::width);

  m.def(
      "fit",
      [](const std::string& family, const DataMatrix& data, const std::string& target,
         const std::vector<std::string>& options) -> std::shared_ptr<Predictor> {
        return std::const_pointer_cast<Predictor>(
            FitModel(ParseModelSpec(family, options), data, target));
      },
      py::arg("family"), py::arg("data"), py::arg("target") = "y",
      py::arg("options") = std::vector<std::string>{},
      "Fit a model; options are KEY=VALUE strings.");

  m.def(
      "explain",
      [](const Predictor& model, const DataMatrix& background, const Eigen::VectorXd& instance,
         const std::vector<std::string>& features, const std::string& mode,
         std::int64_t iterations, std::uint64_t seed, int workers) {
        EstimatorConfig config{iterations, seed, ParseMode(mode),
                               std::make_shared<const Background>(background), workers};
        const std::vector<double> x = CheckedInstance(instance);
        const std::vector<std::size_t> coalition = ResolveFeatures(background, features);
        ShapleyEstimate e;
        {
          py::gil_scoped_release release;
          e = EstimateCoalition(model, config, x, coalition);
        }
        return ToDict(e, background.names());
      },
      py::arg("model"), py::arg("background"), py::arg("instance"), py::arg("features"),
      py::arg("mode") = "mcc", py::arg("iterations") = 10000, py::arg("seed") = 42,
      py::arg("workers") = 1,
      "Shapley value of one feature or of a coalition played as one player.");

  m.def(
      "exact_shapley",
      [](const Predictor& model, const DataMatrix& background, const Eigen::VectorXd& instance,
         const std::vector<std::string>& features) {
        const std::vector<double> x = CheckedInstance(instance);
        return ExactCoalitionShapley(model, background, x, ResolveFeatures(background, features));
      },
      py::arg("model"), py::arg("background"), py::arg("instance"), py::arg("features"));

  m.def(
      "adjustment_plan",
      [](const DataMatrix& data, const std::vector<std::string>& coalition) {
        const CovarianceCache cache = ComputeCovariance(data);
        const AdjustmentPlan plan =
            BuildPlan(cache, data, CoalitionSpec(ResolveFeatures(data, coalition), cache));
        py::dict d;
        std::vector<std::string> adjustable;
        for (std::size_t k : plan.adjustable) adjustable.push_back(data.names()[k]);
        d["adjustable"] = adjustable;
        d["coefficients"] = plan.coefficients;
        d["max_normalized_residual"] = plan.max_normalized_residual;
        return d;
      },
      py::arg("data"), py::arg("coalition"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = RunCli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI command in-process; returns (exit_code, stdout, stderr).");
}
