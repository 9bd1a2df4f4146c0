#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "vteach/config.hpp"
#include "vteach/error.hpp"
#include "vteach/eval.hpp"
#include "vteach/letters.hpp"
#include "vteach/runner.hpp"
#include "vteach/stats.hpp"

namespace py = pybind11;
using namespace vteach;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Point2> to_points(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) throw py::value_error("expected an array of shape (n, 2)");
  auto r = a.unchecked<2>();
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) out.push_back({r(i, 0), r(i, 1)});
  return out;
}

Array to_array(std::span<const Point2> pts) {
  Array out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    w(static_cast<py::ssize_t>(i), 0) = pts[i].x;
    w(static_cast<py::ssize_t>(i), 1) = pts[i].y;
  }
  return out;
}

py::list rows_to_list(const std::vector<GameUnitResult>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["repetition"] = r.repetition;
    d["unit"] = r.unit;
    d["connected"] = r.connected;
    d["task"] = std::string(to_string(r.task));
    d["similarity"] = r.similarity;
    out.append(d);
  }
  return out;
}

std::vector<GameUnitResult> rows_from_list(const py::list& rows) {
  std::vector<GameUnitResult> out;
  for (const auto& item : rows) {
    auto d = item.cast<py::dict>();
    GameUnitResult r;
    r.repetition = d["repetition"].cast<int>();
    r.unit = d["unit"].cast<int>();
    r.connected = d["connected"].cast<bool>();
    r.task = task_from_string(d["task"].cast<std::string>());
    r.similarity = d["similarity"].cast<double>();
    out.push_back(r);
  }
  return out;
}

py::dict report_to_dict(const stats::HypothesisReport& rep) {
  py::list comps;
  for (const auto& c : rep.comparisons) {
    py::dict d;
    d["label"] = c.label;
    d["mean_not_connected"] = c.mean_not_connected;
    d["mean_connected"] = c.mean_connected;
    d["median_not_connected"] = c.median_not_connected;
    d["median_connected"] = c.median_connected;
    d["t"] = c.test.t;
    d["p"] = c.test.p;
    d["df"] = c.test.df;
    comps.append(d);
  }
  py::dict out;
  out["id"] = rep.id;
  out["verdict"] = rep.verdict;
  out["comparisons"] = comps;
  return out;
}

}  // namespace

PYBIND11_MODULE(_vteach, m) {
  m.doc() = "Teacher-learner coupling simulation, imitation and statistics";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<AlignmentError>(m, "AlignmentError", PyExc_ValueError);
  py::register_exception<IncompleteData>(m, "IncompleteData", PyExc_ValueError);

  m.def("fc_target", [](int s, double alpha) {
    auto p = fc_target(s, alpha);
    return py::make_tuple(p.x, p.y);
  });
  m.def("fc_target_trajectory", [](double alpha) { return to_array(fc_target_trajectory(alpha).points()); });
  m.def("letters", [] {
    py::dict out;
    for (const auto& [c, t] : letters::bundled()) out[py::str(std::string(1, c))] = to_array(t.points());
    return out;
  });

  m.def("frechet_distance", [](const Array& a, const Array& b) {
    return frechet_distance(to_points(a), to_points(b));
  });
  m.def("procrustes_align", [](const Array& a, const Array& b) {
    auto r = procrustes_align(Trajectory(to_points(a)), Trajectory(to_points(b)));
    py::dict d;
    d["aligned_a"] = to_array(r.aligned_a.points());
    d["aligned_b"] = to_array(r.aligned_b.points());
    d["disparity"] = r.disparity;
    d["rotation"] = r.rotation;
    d["scale"] = r.scale;
    return d;
  });
  m.def("similarity", [](const Array& target, const Array& produced) {
    auto s = similarity(Trajectory(to_points(target)), Trajectory(to_points(produced)));
    return py::make_tuple(s.value, s.degenerate);
  });

  m.def("welch_t_test", [](std::vector<double> a, std::vector<double> b) {
    auto t = stats::welch_t_test(a, b);
    return py::make_tuple(t.t, t.p, t.df);
  });

  // Configurations cross the boundary as JSON text.
  m.def("default_config", [](const std::string& task) {
    return config::to_json(default_config(task_from_string(task))).dump();
  });
  m.def("normalize_config", [](const std::string& text) {
    return config::to_json(config::from_json(nlohmann::json::parse(text))).dump();
  });
  m.def("run_experiment", [](const std::string& text) {
    const auto cfg = config::from_json(nlohmann::json::parse(text));
    RunResults r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg);
    }
    py::dict out;
    out["rows"] = rows_to_list(r.rows);
    out["failures"] = r.failures;
    return out;
  });
  m.def("reports", [](const py::list& rows, const std::string& task) {
    py::list out;
    for (const auto& rep : stats::all_reports(rows_from_list(rows), task_from_string(task)))
      out.append(report_to_dict(rep));
    return out;
  });
}
