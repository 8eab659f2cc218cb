#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trajguide/eval.hpp"

namespace trajguide {

/// Declarative run description. Mirrors the YAML document field for field;
/// angles stay in degrees as written so an echoed config reproduces a run exactly.
struct RunConfig {
  struct Run {
    std::uint64_t master_seed = 1;
    std::size_t workers = 1;
    std::string output_dir = "results";
    bool trace = false;
  } run;

  struct Suite {
    std::size_t trajectories = 50;
    std::size_t poses_per_trajectory = 2;
    std::vector<std::string> tasks{"to_end", "to_start", "any_point"};
    std::vector<std::string> inits{"on", "off"};
    std::vector<std::string> camera_modes{"matched", "cross"};
    std::string controller = "yaw_avoid";
  } suite;

  struct Episode {
    std::size_t step_cap = 1000;
    double success_radius = 0.5;
    std::string contact = "slide";
  } episode;

  NoiseModel noise;
  WorldParams world;

  struct Trajectory {
    double min_geodesic = 8.0;
    double max_geodesic = 60.0;
    double min_spacing = 0.5;
    double max_spacing = 1.5;
    std::size_t max_frames = 40;
    double yaw_sigma_deg = 5.0;
    double clearance = 0.5;
  } trajectory;

  struct Query {
    double offset_mode = 2.0;
    double offset_max = 10.0;
    std::size_t min_visible = 3;
    double clearance = 0.2;
  } query;

  struct Camera {
    double fov_deg = 90.0;
    double aspect = 4.0 / 3.0;
    double mount_height = 1.2;
  } recorder_camera;

  CrossCameraParams cross_camera;

  struct Yaw {
    double k_p = 2.0;
    double v_forward = 0.5;
    std::size_t lookahead = 2;
    double omega_max = 1.5;
    double dt = 0.25;
    double agent_radius = 0.2;
  } yaw_controller;

  struct Avoidance {
    double cone_u = 0.25;
    double stop_steps = 3.0;
    double steer_window_deg = 60.0;
    std::size_t rays = 64;
  } avoidance;

  MppiConfig mppi;

  struct Sweep {
    std::string parameter = "height";
    std::vector<double> magnitudes{0.0, 0.3, 0.6, 0.9, 1.2};
  } sweep;

  /// Validated views used by the runner. Throw std::invalid_argument.
  Scenario scenario() const;
  SuiteConfig suite_config() const;
  SweepParameter sweep_parameter() const;
};

/// Parses a YAML document. Unknown sections or keys and malformed values throw
/// ParseError whose message carries the line number and the offending key.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Every field with its effective value, in a stable order and format.
std::string emit_run_config(const RunConfig& cfg);

}  // namespace trajguide
