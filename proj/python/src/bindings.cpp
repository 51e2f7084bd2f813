// Copyright 2026 The mtlb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"
#include "mtlb/metrics/evaluate.hpp"
#include "mtlb/metrics/metrics.hpp"
#include "mtlb/report/run_config.hpp"
#include "mtlb/report/study.hpp"
#include "mtlb/scene/dataset.hpp"
#include "mtlb/scene/generator.hpp"
#include "mtlb/train/experiment.hpp"
#include "mtlb/train/optimizer.hpp"

namespace py = pybind11;
using namespace mtlb;

namespace
{

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array & a)
{
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor & t)
{
  Array a(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

// Accepts a [K x T x 2] array or a list of [T x 2] arrays.
std::vector<Tensor> to_modes(const py::object & obj)
{
  std::vector<Tensor> modes;
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    for (const auto & item : obj) modes.push_back(to_tensor(item.cast<Array>()));
    return modes;
  }
  const Tensor all = to_tensor(obj.cast<Array>());
  if (all.rank() != 3) throw DimensionError("predictions must be [K x T x 2] or a list of [T x 2] arrays");
  const std::size_t T = all.dim(1), C = all.dim(2);
  for (std::size_t k = 0; k < all.dim(0); ++k) {
    Tensor m({T, C});
    std::copy_n(all.data().begin() + static_cast<std::ptrdiff_t>(k * T * C), T * C, m.data().begin());
    modes.push_back(std::move(m));
  }
  return modes;
}

py::dict report_dict(const MetricsReport & r)
{
  py::dict d;
  d["mAP"] = r.map;
  d["minADE"] = r.min_ade;
  d["minFDE"] = r.min_fde;
  d["missRate"] = r.miss_rate;
  d["samples"] = r.samples;
  return d;
}

DatasetHandle generate(const std::string & preset, std::size_t count, std::uint64_t seed, double duration)
{
  GeneratorConfig g;
  g.duration = duration;
  g.preset = preset_from_string(preset);
  g.count = count;
  g.seed = seed;
  const auto role = g.preset == Preset::SourceLike ? DatasetRole::Source : DatasetRole::Target;
  return make_dataset(role, generate_synthetic(g), seed);
}

}  // namespace

PYBIND11_MODULE(_mtlb, m)
{
  m.doc() = "Motion-prediction transfer-learning workbench (native core)";

  auto base = py::register_exception<Error>(m, "MtlbError");
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<DatasetHandle>(m, "Dataset")
    .def_property_readonly("role", [](const DatasetHandle & d) { return std::string(to_string(d.role)); })
    .def("__len__", &DatasetHandle::count)
    .def(
      "split_sizes",
      [](const DatasetHandle & d) {
        py::dict out;
        for (Split s : {Split::Train, Split::Val, Split::Test}) out[py::str(std::string(to_string(s)))] = d.indices(s).size();
        return out;
      })
    .def("scenario_ids",
         [](const DatasetHandle & d) {
           std::vector<std::string> ids;
           for (const auto & s : d.scenarios) ids.push_back(s.id);
           return ids;
         })
    .def("to_bytes", [](const DatasetHandle & d) { return py::bytes(encode_dataset(d)); })
    .def_static("from_bytes", [](const py::bytes & b) { return decode_dataset(std::string(b)); })
    .def("save", [](const DatasetHandle & d, const std::string & path) { save_dataset(path, d); })
    .def_static("load", &load_dataset);

  m.def("generate", &generate, py::arg("preset"), py::arg("count"), py::arg("seed") = 0, py::arg("duration") = GeneratorConfig{}.duration,
        "Synthetic dataset: preset is 'source_like' or 'target_like'.");

  m.def(
    "min_ade", [](const Array & gt, const py::object & preds) { return min_ade(to_tensor(gt), to_modes(preds)); },
    py::arg("gt"), py::arg("preds"));
  m.def(
    "min_fde", [](const Array & gt, const py::object & preds) { return min_fde(to_tensor(gt), to_modes(preds)); },
    py::arg("gt"), py::arg("preds"));
  m.def(
    "average_precision",
    [](const std::vector<std::pair<std::vector<double>, std::vector<bool>>> & sets) {
      std::vector<ScoredSet> s;
      for (const auto & [conf, match] : sets) s.push_back({conf, std::vector<char>(match.begin(), match.end())});
      return average_precision(s);
    },
    py::arg("sets"), "Each set is (confidences, matches); returns None for no sets.");

  m.def(
    "lr_at",
    [](double epoch, double initial, double total_epochs) {
      LrSchedule s;
      s.initial = initial;
      s.total_epochs = total_epochs;
      return lr_at(s, epoch);
    },
    py::arg("epoch"), py::arg("initial") = LrSchedule::kPlateaus[0], py::arg("total_epochs") = LrSchedule::kReferenceEpochs);
  m.def("scale_lr", &scale_lr, py::arg("recommended_lr"), py::arg("recommended_batch"), py::arg("actual_batch"));

  m.def(
    "evaluate_oracle",
    [](const DatasetHandle & d, const std::string & split) {
      const RunConfig rc;
      const auto scenes = prepare_split(d, split_from_string(split), rc.model);
      EvalOptions opts;
      opts.metrics.sample_rate = rc.generate.sample_rate;
      opts.metrics.eval_step = rc.eval_step;
      opts.output_modes = rc.model.output_modes;
      opts.nms_radius = rc.model.nms_radius;
      return report_dict(evaluate(oracle_predictor(rc.model.modes), scenes, opts));
    },
    py::arg("dataset"), py::arg("split") = "test", "Scores the ground truth replayed as the top mode.");

  m.def(
    "run_study",
    [](const std::string & config_text, const DatasetHandle & source, const DatasetHandle & target) {
      const RunConfig rc = RunConfig::from_kv(KeyValueConfig::parse(config_text));
      StudyOutcome out = [&] {
        py::gil_scoped_release release;
        return run_study(rc, source, target);
      }();
      py::dict d;
      d["report_text"] = out.report.to_text();
      d["report_json"] = out.report.to_json();
      d["timing_total_csv"] = total_time_csv(out.timings);
      d["timing_target_csv"] = target_time_csv(out.timings);
      py::dict rows;
      for (const auto & r : out.report.rows()) {
        py::dict row;
        row["source"] = report_dict(r.source);
        row["target"] = report_dict(r.target);
        rows[py::str(std::string(to_string(r.method)))] = row;
      }
      d["rows"] = rows;
      return d;
    },
    py::arg("config"), py::arg("source"), py::arg("target"),
    "Runs all seven methods; `config` holds key=value lines.");

  m.attr("__version__") = "0.1.0";
  m.def("_array_roundtrip", [](const Array & a) { return to_array(to_tensor(a)); });
}
