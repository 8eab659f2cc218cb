#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajguide/control.hpp"
#include "trajguide/geometry.hpp"
#include "trajguide/guidance.hpp"
#include "trajguide/mppi.hpp"
#include "trajguide/world.hpp"

namespace trajguide {

enum class Task { ToEnd, ToStart, AnyPoint };
enum class CameraModeKind { Matched, Cross, Sweep };
enum class SweepParameter { Fov, Aspect, Height };
enum class ControllerKind { Yaw, YawAvoid, Mppi };

std::string_view to_string(Task t);
std::string_view to_string(InitMode m);
std::string_view to_string(CameraModeKind k);
std::string_view to_string(SweepParameter p);
std::string_view to_string(ControllerKind c);

// Parsers throw std::invalid_argument on unknown names.
Task parse_task(std::string_view s);
InitMode parse_init(std::string_view s);
CameraModeKind parse_camera_mode(std::string_view s);
SweepParameter parse_sweep_parameter(std::string_view s);
ControllerKind parse_controller(std::string_view s);

struct CameraMode {
  CameraModeKind kind = CameraModeKind::Matched;
  std::uint64_t seed = 0;  // Cross: perturbation draw; Sweep: sign draw
  SweepParameter parameter = SweepParameter::Fov;
  double magnitude = 0.0;  // Sweep only: degrees for fov, meters for height
  friend bool operator==(const CameraMode&, const CameraMode&) = default;
};

/// (mean, max) of the absolute mismatch per camera parameter.
struct CrossCameraParams {
  double fov_mean_deg = 20.0;
  double fov_max_deg = 60.0;
  double aspect_mean = 0.5;
  double aspect_max = 1.5;
  double height_mean = 0.5;
  double height_max = 1.2;
  friend bool operator==(const CrossCameraParams&, const CrossCameraParams&) = default;
};

/// Settings shared by every episode of a run.
struct Scenario {
  WorldParams world;
  TrajectoryParams trajectory;
  QueryParams query;
  CameraModel recorder_camera{deg2rad(90.0), 4.0 / 3.0, 1.2};
  YawControllerConfig yaw;
  AvoidanceConfig avoidance;
  MppiConfig mppi;
  CrossCameraParams cross;
  ContactModel contact = ContactModel::Slide;
};

struct EpisodeConfig {
  std::uint64_t id = 0;
  std::uint64_t world_seed = 0;
  std::uint64_t trajectory_seed = 0;
  std::uint64_t pose_seed = 0;
  Task task = Task::ToEnd;
  std::size_t goal_index = 0;  // AnyPoint only, 1-based
  InitMode init = InitMode::On;
  CameraMode camera;
  ControllerKind controller = ControllerKind::YawAvoid;
  NoiseModel noise;
  std::size_t step_cap = 1000;
  double success_radius = 0.5;

  friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

struct EpisodeResult {
  std::uint64_t id = 0;
  bool valid = true;
  std::string error;  // why the episode could not be constructed
  bool success = false;
  std::size_t steps = 0;
  double path_length = 0.0;
  double geodesic = 0.0;
  std::size_t collisions = 0;
  double final_distance_to_goal = 0.0;
  double min_distance_to_goal = 0.0;
  double init_distance = 0.0;  // start offset from the anchor frame
  std::size_t n_frames = 0;
  std::size_t goal_index = 0;
  CameraModel agent_camera;

  friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

struct TraceStep {
  std::size_t step = 0;
  Pose pose;
  Guidance triplets;
};

/// Magnitudes are drawn from half-normal laws whose truncation at the max keeps
/// the requested mean; signs are uniform. Deterministic in `seed`.
CameraModel sample_cross_camera(const CameraModel& base, std::uint64_t seed,
                                const CrossCameraParams& params = {});

/// Scale of the half-normal whose truncation to [0, max] has the given mean.
double truncated_half_normal_sigma(double mean, double max);

/// Base camera with exactly one parameter offset by +/- magnitude (sign from seed).
CameraModel sweep_camera(const CameraModel& base, SweepParameter parameter, double magnitude,
                         std::uint64_t seed);

CameraModel agent_camera_for(const CameraModel& recorder, const CameraMode& mode,
                             const CrossCameraParams& params);

/// Goal frame index for a task on a trajectory of n frames.
std::size_t goal_frame(Task task, std::size_t n, std::size_t any_point_goal);

/// Runs one closed-loop episode. Construction failures yield valid = false.
EpisodeResult run_episode(const EpisodeConfig& cfg, const Scenario& scenario,
                          std::vector<TraceStep>* trace = nullptr);

/// Fraction of successful valid episodes (0 for an empty set).
double success_rate(const std::vector<EpisodeResult>& results);

/// Mean of success * l / max(p, l) over valid episodes; l = 0 counts success as 1.
/// Throws std::invalid_argument for an empty set.
double spl(const std::vector<EpisodeResult>& results);

struct SuiteConfig {
  std::uint64_t master_seed = 1;
  std::size_t trajectories = 50;
  std::size_t poses_per_trajectory = 2;
  std::vector<Task> tasks{Task::ToEnd, Task::ToStart, Task::AnyPoint};
  std::vector<InitMode> inits{InitMode::On, InitMode::Off};
  std::vector<CameraModeKind> camera_modes{CameraModeKind::Matched, CameraModeKind::Cross};
  ControllerKind controller = ControllerKind::YawAvoid;
  NoiseModel noise;
  std::size_t step_cap = 1000;
  double success_radius = 0.5;

  friend bool operator==(const SuiteConfig&, const SuiteConfig&) = default;
};

/// Crossing of trajectories x poses x tasks x inits x camera modes; AnyPoint is
/// only paired with Off. Ids are positions in the returned list.
std::vector<EpisodeConfig> build_suite(const SuiteConfig& suite, const Scenario& scenario);

struct EpisodeOutcome {
  EpisodeConfig config;
  EpisodeResult result;
  std::vector<TraceStep> trace;
};

/// Runs all episodes on `workers` threads; output is sorted by episode id.
std::vector<EpisodeOutcome> run_suite(const std::vector<EpisodeConfig>& configs, const Scenario& scenario,
                                      std::size_t workers, bool with_trace = false);

struct SweepBucket {
  double magnitude = 0.0;
  double success_rate = 0.0;
  double spl = 0.0;
  std::size_t n = 0;
  std::size_t invalid = 0;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::Fov;
  std::vector<SweepBucket> buckets;
  std::vector<EpisodeOutcome> outcomes;
};

/// Re-runs `base` with one camera parameter offset by each magnitude.
SweepResult sweep_mismatch(SweepParameter parameter, const std::vector<double>& magnitudes,
                           const std::vector<EpisodeConfig>& base, const Scenario& scenario,
                           std::size_t workers);

}  // namespace trajguide
