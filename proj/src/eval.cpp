#include "trajguide/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "trajguide/error.hpp"

namespace trajguide {

namespace {

// Stream labels for derive_seed.
enum : std::uint64_t {
  kWorldStream = 1,
  kTrajectoryStream = 2,
  kPoseStream = 3,
  kCameraStream = 4,
  kGoalStream = 5,
  kInitStream = 6,
  kNoiseStream = 7,
  kMppiStream = 8,
  kAnchorStream = 9,
  kSweepStream = 10,
};

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[N], const char* what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::pair<Task, std::string_view> kTasks[] = {
    {Task::ToEnd, "to_end"}, {Task::ToStart, "to_start"}, {Task::AnyPoint, "any_point"}};
constexpr std::pair<InitMode, std::string_view> kInits[] = {{InitMode::On, "on"}, {InitMode::Off, "off"}};
constexpr std::pair<CameraModeKind, std::string_view> kCameraModes[] = {
    {CameraModeKind::Matched, "matched"}, {CameraModeKind::Cross, "cross"}, {CameraModeKind::Sweep, "sweep"}};
constexpr std::pair<SweepParameter, std::string_view> kSweepParams[] = {
    {SweepParameter::Fov, "fov"}, {SweepParameter::Aspect, "aspect"}, {SweepParameter::Height, "height"}};
constexpr std::pair<ControllerKind, std::string_view> kControllers[] = {
    {ControllerKind::Yaw, "yaw"}, {ControllerKind::YawAvoid, "yaw_avoid"}, {ControllerKind::Mppi, "mppi"}};

double truncated_half_normal_mean(double sigma, double max) {
  const double a = max / sigma;
  return sigma * std::sqrt(2.0 / kPi) * (1.0 - std::exp(-0.5 * a * a)) / std::erf(a / std::sqrt(2.0));
}

double sample_magnitude(Rng& rng, double mean, double max) {
  if (max <= 0.0 || mean <= 0.0) return 0.0;
  const double sigma = truncated_half_normal_sigma(mean, max);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (;;) {
    const double x = std::abs(gauss(rng));
    if (x <= max) return x;
  }
}

double signed_draw(Rng& rng) { return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0; }

constexpr double kMinFov = deg2rad(5.0);

}  // namespace

std::string_view to_string(Task t) { return enum_name(t, kTasks); }
std::string_view to_string(InitMode m) { return enum_name(m, kInits); }
std::string_view to_string(CameraModeKind k) { return enum_name(k, kCameraModes); }
std::string_view to_string(SweepParameter p) { return enum_name(p, kSweepParams); }
std::string_view to_string(ControllerKind c) { return enum_name(c, kControllers); }

Task parse_task(std::string_view s) { return parse_enum(s, kTasks, "task"); }
InitMode parse_init(std::string_view s) { return parse_enum(s, kInits, "init mode"); }
CameraModeKind parse_camera_mode(std::string_view s) { return parse_enum(s, kCameraModes, "camera mode"); }
SweepParameter parse_sweep_parameter(std::string_view s) { return parse_enum(s, kSweepParams, "sweep parameter"); }
ControllerKind parse_controller(std::string_view s) { return parse_enum(s, kControllers, "controller"); }

double truncated_half_normal_sigma(double mean, double max) {
  if (!(mean > 0.0 && mean < 0.5 * max)) {
    throw std::invalid_argument("truncated half-normal needs 0 < mean < max / 2");
  }
  // The truncated mean increases monotonically from 0 to max / 2 with sigma.
  double lo = 1e-6 * max;
  double hi = 1e3 * max;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_half_normal_mean(mid, max) < mean) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

CameraModel sample_cross_camera(const CameraModel& base, std::uint64_t seed, const CrossCameraParams& params) {
  Rng rng(seed);
  const double dfov = deg2rad(sample_magnitude(rng, params.fov_mean_deg, params.fov_max_deg)) * signed_draw(rng);
  const double daspect = sample_magnitude(rng, params.aspect_mean, params.aspect_max) * signed_draw(rng);
  const double dheight = sample_magnitude(rng, params.height_mean, params.height_max) * signed_draw(rng);
  const double fov = std::clamp(base.fov_h() + dfov, kMinFov, kPi - kMinFov);
  const double aspect = std::max(0.25, base.aspect() + daspect);
  const double height = std::max(0.0, base.mount_height() + dheight);
  return CameraModel(fov, aspect, height);
}

CameraModel sweep_camera(const CameraModel& base, SweepParameter parameter, double magnitude, std::uint64_t seed) {
  if (magnitude == 0.0) return base;
  Rng rng(seed);
  const double sign = signed_draw(rng);
  switch (parameter) {
    case SweepParameter::Fov:
      return CameraModel(std::clamp(base.fov_h() + sign * deg2rad(magnitude), kMinFov, kPi - kMinFov),
                         base.aspect(), base.mount_height());
    case SweepParameter::Aspect:
      return CameraModel(base.fov_h(), std::max(0.25, base.aspect() + sign * magnitude), base.mount_height());
    case SweepParameter::Height:
      return CameraModel(base.fov_h(), base.aspect(), std::max(0.0, base.mount_height() + sign * magnitude));
  }
  return base;
}

CameraModel agent_camera_for(const CameraModel& recorder, const CameraMode& mode, const CrossCameraParams& params) {
  switch (mode.kind) {
    case CameraModeKind::Matched:
      return recorder;
    case CameraModeKind::Cross:
      return sample_cross_camera(recorder, mode.seed, params);
    case CameraModeKind::Sweep:
      return sweep_camera(recorder, mode.parameter, mode.magnitude, mode.seed);
  }
  return recorder;
}

std::size_t goal_frame(Task task, std::size_t n, std::size_t any_point_goal) {
  switch (task) {
    case Task::ToEnd:
      return n;
    case Task::ToStart:
      return 1;
    case Task::AnyPoint:
      if (any_point_goal < 1 || any_point_goal > n) throw std::invalid_argument("goal index out of range");
      return any_point_goal;
  }
  return n;
}

namespace {

std::size_t nearest_frame(const ReferenceTrajectory& traj, Vec2 p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (distance(traj.poses[i].xy(), p) < distance(traj.poses[best].xy(), p)) best = i;
  }
  return best;
}

// Visible frames from the closest visible one toward the goal, in travel order.
std::vector<std::size_t> frames_toward_goal(const Guidance& triplets, std::size_t goal) {
  const std::vector<std::size_t> vis = visible_set(triplets);
  if (vis.empty()) return {};
  std::size_t j = 0;
  for (std::size_t pos = 1; pos < vis.size(); ++pos) {
    if (triplets[vis[pos] - 1].d < triplets[vis[j] - 1].d) j = pos;
  }
  const std::size_t k = vis[j];
  std::vector<std::size_t> order;
  if (goal >= k) {
    for (std::size_t pos = j; pos < vis.size() && vis[pos] <= goal; ++pos) order.push_back(vis[pos]);
  } else {
    for (std::size_t pos = j + 1; pos-- > 0 && vis[pos] >= goal;) order.push_back(vis[pos]);
  }
  return order;
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg, const Scenario& scenario, std::vector<TraceStep>* trace) {
  EpisodeResult res;
  res.id = cfg.id;
  if (cfg.step_cap < 1) throw std::invalid_argument("run_episode: step_cap must be >= 1");
  cfg.noise.validate();

  std::optional<World> built;
  ReferenceTrajectory traj;
  QuerySample start;
  std::size_t goal = 0;
  CameraModel camera;
  try {
    built = generate_world(cfg.world_seed, scenario.world);
    const World& world = *built;
    traj = sample_reference_trajectory(world, cfg.trajectory_seed, scenario.recorder_camera, scenario.trajectory);
    goal = goal_frame(cfg.task, traj.size(), cfg.goal_index);
    camera = agent_camera_for(scenario.recorder_camera, cfg.camera, scenario.cross);
    std::size_t anchor = 1;
    switch (cfg.task) {
      case Task::ToEnd: anchor = 1; break;
      case Task::ToStart: anchor = traj.size(); break;
      case Task::AnyPoint: {
        Rng anchor_rng(derive_seed(cfg.pose_seed, {kAnchorStream}));
        anchor = std::uniform_int_distribution<std::size_t>(1, traj.size())(anchor_rng);
        break;
      }
    }
    start = sample_query_pose(world, traj, cfg.init, anchor, derive_seed(cfg.pose_seed, {kInitStream}), camera,
                              scenario.query);
    res.geodesic = plan_path(world, start.pose.xy(), traj.frame(goal).xy(), scenario.yaw.agent_radius).geodesic;
  } catch (const SamplingError& e) {
    res.valid = false;
    res.error = e.what();
    return res;
  } catch (const NoPathError& e) {
    res.valid = false;
    res.error = e.what();
    return res;
  } catch (const std::invalid_argument& e) {
    res.valid = false;
    res.error = e.what();
    return res;
  }

  const World& world = *built;
  res.n_frames = traj.size();
  res.goal_index = goal;
  res.agent_camera = camera;
  res.init_distance = start.offset;

  const DistanceField df = build_distance_field(world);
  const Vec2 goal_xy = traj.frame(goal).xy();
  Rng noise_rng(derive_seed(cfg.pose_seed, {kNoiseStream}));
  Rng mppi_rng(derive_seed(cfg.pose_seed, {kMppiStream}));
  MppiController mppi(scenario.mppi);
  const double agent_radius = scenario.yaw.agent_radius;
  const double dt = cfg.controller == ControllerKind::Mppi ? scenario.mppi.dt : scenario.yaw.dt;

  Pose pose = start.pose;
  double dist = distance(pose.xy(), goal_xy);
  res.min_distance_to_goal = dist;
  res.success = dist <= cfg.success_radius;

  while (!res.success && res.steps < cfg.step_cap) {
    const Guidance clean = oracle_guidance(world, camera, pose, traj);
    const Pose& near = traj.poses[nearest_frame(traj, pose.xy())];
    const bool opposing = std::abs(wrap_angle(pose.yaw() - near.yaw())) > kPi / 2.0;
    const Guidance triplets = perturb_guidance(clean, cfg.noise, noise_rng, opposing);
    if (trace) trace->push_back({res.steps, pose, triplets});

    StepResult step;
    if (cfg.controller == ControllerKind::Mppi) {
      const std::vector<std::size_t> order = frames_toward_goal(triplets, goal);
      std::vector<Vec2> grounded;
      double v_z = 0.0;
      if (!order.empty()) {
        const DepthScan scan = render_depth(world, camera, pose, scenario.mppi.depth_rays);
        grounded = ground_predictions(triplets, order, scan, camera, pose, df, scenario.mppi.collision_radius,
                                      scenario.mppi.scale_candidates);
        const std::size_t goal_point = order[std::min(scenario.mppi.goal_point_rank, order.size()) - 1];
        v_z = height_command(triplets, goal_point, scenario.mppi);
      }
      const VelocityControl u = mppi.step({pose.x(), pose.y(), pose.yaw()}, grounded, df, mppi_rng);
      step = step_holonomic_agent(pose, {u.vx, u.vy}, u.omega, v_z, df, dt, agent_radius, scenario.contact);
    } else {
      ControlCommand cmd = yaw_command(select_target(triplets, goal, scenario.yaw), scenario.yaw);
      if (cfg.controller == ControllerKind::YawAvoid) {
        const DepthScan scan = render_depth(world, camera, pose, scenario.avoidance.n_rays);
        cmd = avoid_obstacles(cmd, scan, scenario.yaw, scenario.avoidance);
      }
      step = step_ground_agent(pose, cmd, df, dt, agent_radius, scenario.contact);
    }

    res.path_length += distance(pose.xy(), step.pose.xy());
    if (step.collided) ++res.collisions;
    pose = step.pose;
    ++res.steps;
    dist = distance(pose.xy(), goal_xy);
    res.min_distance_to_goal = std::min(res.min_distance_to_goal, dist);
    res.success = dist <= cfg.success_radius;
  }
  res.final_distance_to_goal = dist;
  return res;
}

double success_rate(const std::vector<EpisodeResult>& results) {
  std::size_t n = 0;
  std::size_t ok = 0;
  for (const auto& r : results) {
    if (!r.valid) continue;
    ++n;
    if (r.success) ++ok;
  }
  return n == 0 ? 0.0 : static_cast<double>(ok) / static_cast<double>(n);
}

double spl(const std::vector<EpisodeResult>& results) {
  std::size_t n = 0;
  double total = 0.0;
  for (const auto& r : results) {
    if (!r.valid) continue;
    ++n;
    if (!r.success) continue;
    total += r.geodesic <= 0.0 ? 1.0 : r.geodesic / std::max(r.path_length, r.geodesic);
  }
  if (n == 0) throw std::invalid_argument("spl: no valid episodes");
  return total / static_cast<double>(n);
}

std::vector<EpisodeConfig> build_suite(const SuiteConfig& suite, const Scenario& scenario) {
  std::vector<EpisodeConfig> out;
  for (std::size_t t = 0; t < suite.trajectories; ++t) {
    const std::uint64_t world_seed = derive_seed(suite.master_seed, {kWorldStream, t});
    const std::uint64_t traj_seed = derive_seed(suite.master_seed, {kTrajectoryStream, t});
    std::optional<std::size_t> n_frames;
    const auto frames = [&]() -> std::size_t {
      if (!n_frames) {
        try {
          const World world = generate_world(world_seed, scenario.world);
          n_frames = sample_reference_trajectory(world, traj_seed, scenario.recorder_camera, scenario.trajectory).size();
        } catch (const std::exception&) {
          n_frames = 0;
        }
      }
      return *n_frames;
    };
    for (std::size_t p = 0; p < suite.poses_per_trajectory; ++p) {
      const std::uint64_t pose_seed = derive_seed(suite.master_seed, {kPoseStream, t, p});
      for (Task task : suite.tasks) {
        for (InitMode init : suite.inits) {
          if (task == Task::AnyPoint && init == InitMode::On) continue;
          for (CameraModeKind mode : suite.camera_modes) {
            EpisodeConfig cfg;
            cfg.id = out.size();
            cfg.world_seed = world_seed;
            cfg.trajectory_seed = traj_seed;
            cfg.pose_seed = pose_seed;
            cfg.task = task;
            cfg.init = init;
            cfg.camera.kind = mode;
            cfg.camera.seed = derive_seed(suite.master_seed, {kCameraStream, t, p});
            cfg.controller = suite.controller;
            cfg.noise = suite.noise;
            cfg.step_cap = suite.step_cap;
            cfg.success_radius = suite.success_radius;
            if (task == Task::AnyPoint) {
              const std::size_t n = frames();
              if (n > 0) {
                Rng rng(derive_seed(suite.master_seed, {kGoalStream, t, p}));
                cfg.goal_index = std::uniform_int_distribution<std::size_t>(1, n)(rng);
              }
            }
            out.push_back(cfg);
          }
        }
      }
    }
  }
  return out;
}

std::vector<EpisodeOutcome> run_suite(const std::vector<EpisodeConfig>& configs, const Scenario& scenario,
                                      std::size_t workers, bool with_trace) {
  std::vector<EpisodeOutcome> out(configs.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
      EpisodeOutcome& o = out[i];
      o.config = configs[i];
      o.result = run_episode(configs[i], scenario, with_trace ? &o.trace : nullptr);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, configs.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.config.id < b.config.id; });
  return out;
}

SweepResult sweep_mismatch(SweepParameter parameter, const std::vector<double>& magnitudes,
                           const std::vector<EpisodeConfig>& base, const Scenario& scenario, std::size_t workers) {
  const CrossCameraParams& lim = scenario.cross;
  const double max = parameter == SweepParameter::Fov      ? lim.fov_max_deg
                     : parameter == SweepParameter::Aspect ? lim.aspect_max
                                                           : lim.height_max;
  std::vector<EpisodeConfig> all;
  for (std::size_t b = 0; b < magnitudes.size(); ++b) {
    if (!(magnitudes[b] >= 0.0 && magnitudes[b] <= max)) {
      throw std::invalid_argument("sweep_mismatch: magnitude outside [0, " + std::to_string(max) + "]");
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      EpisodeConfig cfg = base[i];
      cfg.id = b * base.size() + i;
      cfg.camera = {CameraModeKind::Sweep, derive_seed(base[i].pose_seed, {kSweepStream}), parameter, magnitudes[b]};
      all.push_back(cfg);
    }
  }
  SweepResult out;
  out.parameter = parameter;
  out.outcomes = run_suite(all, scenario, workers);
  for (std::size_t b = 0; b < magnitudes.size(); ++b) {
    std::vector<EpisodeResult> results;
    for (std::size_t i = 0; i < base.size(); ++i) results.push_back(out.outcomes[b * base.size() + i].result);
    SweepBucket bucket;
    bucket.magnitude = magnitudes[b];
    bucket.n = static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return r.valid; }));
    bucket.invalid = results.size() - bucket.n;
    bucket.success_rate = success_rate(results);
    bucket.spl = bucket.n > 0 ? spl(results) : 0.0;
    out.buckets.push_back(bucket);
  }
  return out;
}

}  // namespace trajguide
