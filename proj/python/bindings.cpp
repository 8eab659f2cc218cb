#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "trajguide/config.hpp"
#include "trajguide/error.hpp"
#include "trajguide/io.hpp"
#include "trajguide/report.hpp"

namespace py = pybind11;
using namespace trajguide;

namespace {

std::string outcomes_jsonl(const std::vector<EpisodeOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) out += episode_record_to_json(o.config, o.result).dump() + "\n";
  return out;
}

std::vector<EpisodeRecord> records_from_jsonl(const std::string& text) {
  std::vector<EpisodeRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(episode_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_trajguide, m) {
  m.doc() = "Trajectory-guided navigation benchmark core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NoPathError>(m, "NoPathError", PyExc_RuntimeError);
  py::register_exception<SamplingError>(m, "SamplingError", PyExc_RuntimeError);

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("norm", &Vec2::norm)
      .def(py::self == py::self)
      .def("__iter__", [](const Vec2& v) { return py::iter(py::make_tuple(v.x, v.y)); })
      .def("__repr__", [](const Vec2& v) { return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")"; });
  py::class_<Vec3>(m, "Vec3")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z)
      .def("norm", &Vec3::norm)
      .def(py::self == py::self)
      .def("__iter__", [](const Vec3& v) { return py::iter(py::make_tuple(v.x, v.y, v.z)); });

  py::class_<Pose>(m, "Pose")
      .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"), py::arg("yaw"))
      .def_property_readonly("x", &Pose::x)
      .def_property_readonly("y", &Pose::y)
      .def_property_readonly("z", &Pose::z)
      .def_property_readonly("yaw", &Pose::yaw)
      .def("position", &Pose::position)
      .def(py::self == py::self)
      .def("__repr__", [](const Pose& p) {
        std::ostringstream os;
        os << "Pose(" << p.x() << ", " << p.y() << ", " << p.z() << ", " << p.yaw() << ")";
        return os.str();
      });

  py::class_<CameraModel>(m, "CameraModel")
      .def(py::init<double, double, double>(), py::arg("fov_h"), py::arg("aspect"), py::arg("mount_height"))
      .def_property_readonly("fov_h", &CameraModel::fov_h)
      .def_property_readonly("fov_v", &CameraModel::fov_v)
      .def_property_readonly("aspect", &CameraModel::aspect)
      .def_property_readonly("mount_height", &CameraModel::mount_height)
      .def(py::self == py::self);

  py::class_<ImagePoint>(m, "ImagePoint")
      .def(py::init([](double u, double v, double depth) { return ImagePoint{u, v, depth}; }), py::arg("u"),
           py::arg("v"), py::arg("depth"))
      .def_readwrite("u", &ImagePoint::u)
      .def_readwrite("v", &ImagePoint::v)
      .def_readwrite("depth", &ImagePoint::depth);

  m.def("project", &project, py::arg("camera"), py::arg("observer"), py::arg("point"),
        "Image coordinates and depth of a world point, or None outside the frustum.");
  m.def("back_project", &back_project, py::arg("camera"), py::arg("observer"), py::arg("image_point"));
  m.def("wrap_angle", &wrap_angle);
  m.def("deg2rad", &deg2rad);
  m.def("rad2deg", &rad2deg);

  py::class_<WorldParams>(m, "WorldParams")
      .def(py::init<>())
      .def_readwrite("width", &WorldParams::width)
      .def_readwrite("height", &WorldParams::height)
      .def_readwrite("cell_size", &WorldParams::cell_size)
      .def_readwrite("obstacle_height", &WorldParams::obstacle_height)
      .def_readwrite("density", &WorldParams::density)
      .def_readwrite("min_rect", &WorldParams::min_rect)
      .def_readwrite("max_rect", &WorldParams::max_rect);

  py::class_<World>(m, "World")
      .def_static("empty", &World::empty, py::arg("width"), py::arg("height"), py::arg("cell_size"),
                  py::arg("obstacle_height") = 2.5)
      .def_static("from_text", [](const std::string& text) { return world_from_text(text); })
      .def_static("load", &load_world)
      .def_property_readonly("width", &World::width)
      .def_property_readonly("height", &World::height)
      .def_property_readonly("cell_size", &World::cell_size)
      .def_property_readonly("obstacle_height", &World::obstacle_height)
      .def("occupied", py::overload_cast<int, int>(&World::occupied, py::const_), py::arg("ix"), py::arg("iy"))
      .def("is_free", &World::is_free)
      .def("free_cell_count", &World::free_cell_count)
      .def("largest_free_component", &World::largest_free_component)
      .def("occupancy", [](const World& w) { return std::vector<int>(w.occupancy().begin(), w.occupancy().end()); },
           "Row-major 0/1 occupancy, row 0 at y = 0.")
      .def("to_text", &world_to_text)
      .def("save", [](const World& w, const std::string& path) { save_world(w, path); });

  m.def("generate_world", &generate_world, py::arg("seed"), py::arg("params") = WorldParams{});
  m.def("raycast", &raycast, py::arg("world"), py::arg("origin"), py::arg("target"),
        "True when the segment between two points is unobstructed.");

  py::class_<DistanceField>(m, "DistanceField")
      .def("at", py::overload_cast<int, int>(&DistanceField::at, py::const_))
      .def("sample", &DistanceField::sample)
      .def("values", &DistanceField::values)
      .def_property_readonly("width", &DistanceField::width)
      .def_property_readonly("height", &DistanceField::height);
  m.def("build_distance_field", &build_distance_field, py::arg("world"), py::arg("saturation") = kDistanceSaturation);

  py::class_<PlannedPath>(m, "PlannedPath")
      .def_readonly("polyline", &PlannedPath::polyline)
      .def_readonly("geodesic", &PlannedPath::geodesic)
      .def("polyline_length", &PlannedPath::polyline_length);
  m.def("plan_path", &plan_path, py::arg("world"), py::arg("start"), py::arg("goal"), py::arg("clearance") = 0.2);

  py::class_<ReferenceTrajectory>(m, "ReferenceTrajectory")
      .def_readonly("poses", &ReferenceTrajectory::poses)
      .def_readonly("camera", &ReferenceTrajectory::camera)
      .def("__len__", &ReferenceTrajectory::size);
  m.def(
      "sample_reference_trajectory",
      [](const World& w, std::uint64_t seed, const CameraModel& cam) { return sample_reference_trajectory(w, seed, cam); },
      py::arg("world"), py::arg("seed"), py::arg("camera"));

  py::class_<GuidanceTriplet>(m, "GuidanceTriplet")
      .def_readonly("p", &GuidanceTriplet::p)
      .def_readonly("v_logit", &GuidanceTriplet::v_logit)
      .def_readonly("d", &GuidanceTriplet::d)
      .def("visible", &GuidanceTriplet::visible)
      .def(py::self == py::self);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init([](double sigma_p, double flip_prob, double sigma_d, double backward_degradation) {
             NoiseModel n{sigma_p, flip_prob, sigma_d, backward_degradation};
             n.validate();
             return n;
           }),
           py::arg("sigma_p") = 0.0, py::arg("flip_prob") = 0.0, py::arg("sigma_d") = 0.0,
           py::arg("backward_degradation") = 1.0)
      .def_readonly("sigma_p", &NoiseModel::sigma_p)
      .def_readonly("flip_prob", &NoiseModel::flip_prob)
      .def_readonly("sigma_d", &NoiseModel::sigma_d)
      .def_readonly("backward_degradation", &NoiseModel::backward_degradation);

  m.def("oracle_guidance", &oracle_guidance, py::arg("world"), py::arg("camera"), py::arg("query"),
        py::arg("trajectory"));
  m.def(
      "perturb_guidance",
      [](const Guidance& g, const NoiseModel& n, std::uint64_t seed, bool opposing) {
        Rng rng(seed);
        return perturb_guidance(g, n, rng, opposing);
      },
      py::arg("triplets"), py::arg("noise"), py::arg("seed"), py::arg("opposing") = false);
  m.def("visible_set", &visible_set, "1-based indices of visible triplets.");

  m.def(
      "importance_weights",
      [](const std::vector<double>& costs, double beta) { return importance_weights(costs, beta); },
      py::arg("costs"), py::arg("beta"));

  m.def(
      "default_config", [] { return emit_run_config(RunConfig{}); }, "Every run setting at its default, as YAML.");
  m.def(
      "normalize_config", [](const std::string& text) { return emit_run_config(parse_run_config(text)); },
      py::arg("yaml"), "Parses and validates a run config, returning the full materialized document.");
  m.def(
      "_run_suite_jsonl",
      [](const std::string& text, std::size_t workers) {
        const RunConfig cfg = parse_run_config(text);
        const Scenario sc = cfg.scenario();
        const auto episodes = build_suite(cfg.suite_config(), sc);
        py::gil_scoped_release release;
        return outcomes_jsonl(run_suite(episodes, sc, workers == 0 ? cfg.run.workers : workers));
      },
      py::arg("yaml"), py::arg("workers") = 0);
  m.def(
      "_sweep_jsonl",
      [](const std::string& text, std::size_t workers) {
        const RunConfig cfg = parse_run_config(text);
        const Scenario sc = cfg.scenario();
        SuiteConfig suite = cfg.suite_config();
        suite.camera_modes = {CameraModeKind::Matched};
        const auto base = build_suite(suite, sc);
        py::gil_scoped_release release;
        return outcomes_jsonl(sweep_mismatch(cfg.sweep_parameter(), cfg.sweep.magnitudes, base, sc,
                                             workers == 0 ? cfg.run.workers : workers)
                                  .outcomes);
      },
      py::arg("yaml"), py::arg("workers") = 0);
  m.def(
      "_aggregate_csv", [](const std::string& jsonl) { return aggregate_csv(aggregate(records_from_jsonl(jsonl))); },
      py::arg("jsonl"));
  m.def(
      "_init_curve_csv",
      [](const std::string& jsonl, double bucket) {
        return curve_csv(init_distance_curve(records_from_jsonl(jsonl), bucket), "init_distance");
      },
      py::arg("jsonl"), py::arg("bucket") = 0.5);
}
