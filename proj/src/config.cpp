#include "trajguide/config.hpp"

#include <charconv>
#include <fstream>
#include <algorithm>
#include <sstream>
#include <variant>

#include <yaml-cpp/yaml.h>

#include "trajguide/error.hpp"

namespace trajguide {

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seeds and counts share one field kind");

using FieldRef = std::variant<double*, std::size_t*, int*, bool*, std::string*,
                              std::vector<std::string>*, std::vector<double>*>;

struct Field {
  const char* name;
  FieldRef ref;
};

struct Section {
  const char* name;
  std::vector<Field> fields;
};

std::vector<Section> layout(RunConfig& c) {
  return {
      {"run",
       {{"master_seed", &c.run.master_seed},
        {"workers", &c.run.workers},
        {"output_dir", &c.run.output_dir},
        {"trace", &c.run.trace}}},
      {"suite",
       {{"trajectories", &c.suite.trajectories},
        {"poses_per_trajectory", &c.suite.poses_per_trajectory},
        {"tasks", &c.suite.tasks},
        {"inits", &c.suite.inits},
        {"camera_modes", &c.suite.camera_modes},
        {"controller", &c.suite.controller}}},
      {"episode", {{"step_cap", &c.episode.step_cap}, {"success_radius", &c.episode.success_radius},
        {"contact", &c.episode.contact}}},
      {"noise",
       {{"sigma_p", &c.noise.sigma_p},
        {"flip_prob", &c.noise.flip_prob},
        {"sigma_d", &c.noise.sigma_d},
        {"backward_degradation", &c.noise.backward_degradation}}},
      {"world",
       {{"width", &c.world.width},
        {"height", &c.world.height},
        {"cell_size", &c.world.cell_size},
        {"obstacle_height", &c.world.obstacle_height},
        {"density", &c.world.density},
        {"min_rect", &c.world.min_rect},
        {"max_rect", &c.world.max_rect}}},
      {"trajectory",
       {{"min_geodesic", &c.trajectory.min_geodesic},
        {"max_geodesic", &c.trajectory.max_geodesic},
        {"min_spacing", &c.trajectory.min_spacing},
        {"max_spacing", &c.trajectory.max_spacing},
        {"max_frames", &c.trajectory.max_frames},
        {"yaw_sigma_deg", &c.trajectory.yaw_sigma_deg},
        {"clearance", &c.trajectory.clearance}}},
      {"query",
       {{"offset_mode", &c.query.offset_mode},
        {"offset_max", &c.query.offset_max},
        {"min_visible", &c.query.min_visible},
        {"clearance", &c.query.clearance}}},
      {"recorder_camera",
       {{"fov_deg", &c.recorder_camera.fov_deg},
        {"aspect", &c.recorder_camera.aspect},
        {"mount_height", &c.recorder_camera.mount_height}}},
      {"cross_camera",
       {{"fov_mean_deg", &c.cross_camera.fov_mean_deg},
        {"fov_max_deg", &c.cross_camera.fov_max_deg},
        {"aspect_mean", &c.cross_camera.aspect_mean},
        {"aspect_max", &c.cross_camera.aspect_max},
        {"height_mean", &c.cross_camera.height_mean},
        {"height_max", &c.cross_camera.height_max}}},
      {"yaw_controller",
       {{"k_p", &c.yaw_controller.k_p},
        {"v_forward", &c.yaw_controller.v_forward},
        {"lookahead", &c.yaw_controller.lookahead},
        {"omega_max", &c.yaw_controller.omega_max},
        {"dt", &c.yaw_controller.dt},
        {"agent_radius", &c.yaw_controller.agent_radius}}},
      {"avoidance",
       {{"cone_u", &c.avoidance.cone_u},
        {"stop_steps", &c.avoidance.stop_steps},
        {"steer_window_deg", &c.avoidance.steer_window_deg},
        {"rays", &c.avoidance.rays}}},
      {"mppi",
       {{"rollouts", &c.mppi.rollouts},
        {"horizon", &c.mppi.horizon},
        {"dt", &c.mppi.dt},
        {"sigma_vx", &c.mppi.sigma_vx},
        {"sigma_vy", &c.mppi.sigma_vy},
        {"sigma_omega", &c.mppi.sigma_omega},
        {"beta", &c.mppi.beta},
        {"w_goal", &c.mppi.w_goal},
        {"w_coll", &c.mppi.w_coll},
        {"w_vis", &c.mppi.w_vis},
        {"collision_radius", &c.mppi.collision_radius},
        {"goal_point_rank", &c.mppi.goal_point_rank},
        {"k_z", &c.mppi.k_z},
        {"v_max", &c.mppi.v_max},
        {"omega_max", &c.mppi.omega_max},
        {"penetration_cost", &c.mppi.penetration_cost},
        {"scale_candidates", &c.mppi.scale_candidates},
        {"depth_rays", &c.mppi.depth_rays}}},
      {"sweep", {{"parameter", &c.sweep.parameter}, {"magnitudes", &c.sweep.magnitudes}}},
  };
}

std::string where(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  return m.line >= 0 ? "line " + std::to_string(m.line + 1) : "unknown line";
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  // keep YAML from reading integral values as ints
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

template <typename T>
T convert(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("config " + where(node) + ": bad value for '" + key + "'");
  }
}

void assign(const YAML::Node& node, const FieldRef& ref, const std::string& key) {
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, std::vector<std::string>> || std::is_same_v<T, std::vector<double>>) {
          if (!node.IsSequence()) throw ParseError("config " + where(node) + ": '" + key + "' must be a list");
          T values;
          for (const auto& item : node) values.push_back(convert<typename T::value_type>(item, key));
          *target = std::move(values);
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          const std::string text = convert<std::string>(node, key);
          if (!text.empty() && text.front() == '-') {
            throw ParseError("config " + where(node) + ": '" + key + "' must be non-negative");
          }
          *target = convert<T>(node, key);
        } else {
          if (!node.IsScalar()) throw ParseError("config " + where(node) + ": '" + key + "' must be a scalar");
          *target = convert<T>(node, key);
        }
      },
      ref);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ParseError("config: top level must be a mapping of sections");
  auto sections = layout(cfg);
  for (const auto& entry : root) {
    const std::string section_name = entry.first.as<std::string>();
    auto sec = std::find_if(sections.begin(), sections.end(),
                            [&](const Section& s) { return section_name == s.name; });
    if (sec == sections.end()) {
      throw ParseError("config " + where(entry.first) + ": unknown section '" + section_name + "'");
    }
    if (entry.second.IsNull()) continue;
    if (!entry.second.IsMap()) {
      throw ParseError("config " + where(entry.second) + ": section '" + section_name + "' must be a mapping");
    }
    for (const auto& kv : entry.second) {
      const std::string key = kv.first.as<std::string>();
      auto field = std::find_if(sec->fields.begin(), sec->fields.end(),
                                [&](const Field& f) { return key == f.name; });
      if (field == sec->fields.end()) {
        throw ParseError("config " + where(kv.first) + ": unknown key '" + section_name + "." + key + "'");
      }
      assign(kv.second, field->ref, section_name + "." + key);
    }
  }
  try {
    (void)cfg.scenario();
    (void)cfg.suite_config();
    (void)cfg.sweep_parameter();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string emit_run_config(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out;
  for (const Section& sec : layout(copy)) {
    out += std::string(sec.name) + ":\n";
    for (const Field& f : sec.fields) {
      out += "  " + std::string(f.name) + ": ";
      std::visit(
          [&](auto* v) {
            using T = std::remove_pointer_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out += format_double(*v);
            } else if constexpr (std::is_same_v<T, bool>) {
              out += *v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
              out += quote(*v);
            } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
              out += "[";
              for (std::size_t i = 0; i < v->size(); ++i) out += (i ? ", " : "") + quote((*v)[i]);
              out += "]";
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
              out += "[";
              for (std::size_t i = 0; i < v->size(); ++i) out += (i ? ", " : "") + format_double((*v)[i]);
              out += "]";
            } else {
              out += std::to_string(*v);
            }
          },
          f.ref);
      out += "\n";
    }
  }
  return out;
}

Scenario RunConfig::scenario() const {
  Scenario s;
  s.world = world;
  if (world.width < 10 || world.height < 10) throw std::invalid_argument("world size must be >= 10x10");
  if (!(world.density >= 0.0 && world.density <= 0.35)) throw std::invalid_argument("world.density must be in [0, 0.35]");

  s.trajectory.min_geodesic = trajectory.min_geodesic;
  s.trajectory.max_geodesic = trajectory.max_geodesic;
  s.trajectory.min_spacing = trajectory.min_spacing;
  s.trajectory.max_spacing = trajectory.max_spacing;
  s.trajectory.max_frames = trajectory.max_frames;
  s.trajectory.yaw_sigma = deg2rad(trajectory.yaw_sigma_deg);
  s.trajectory.clearance = trajectory.clearance;
  if (trajectory.max_frames < 2) throw std::invalid_argument("trajectory.max_frames must be >= 2");
  if (!(trajectory.min_spacing > 0.0 && trajectory.max_spacing >= trajectory.min_spacing)) {
    throw std::invalid_argument("trajectory spacing range is invalid");
  }

  s.query.offset_mode = query.offset_mode;
  s.query.offset_max = query.offset_max;
  s.query.min_visible = query.min_visible;
  s.query.clearance = query.clearance;
  if (!(query.offset_mode >= 0.0 && query.offset_max > query.offset_mode)) {
    throw std::invalid_argument("query offsets need 0 <= offset_mode < offset_max");
  }

  s.recorder_camera = CameraModel(deg2rad(recorder_camera.fov_deg), recorder_camera.aspect, recorder_camera.mount_height);
  s.cross = cross_camera;
  (void)truncated_half_normal_sigma(cross_camera.fov_mean_deg, cross_camera.fov_max_deg);
  (void)truncated_half_normal_sigma(cross_camera.aspect_mean, cross_camera.aspect_max);
  (void)truncated_half_normal_sigma(cross_camera.height_mean, cross_camera.height_max);

  s.yaw.k_p = yaw_controller.k_p;
  s.yaw.v_forward = yaw_controller.v_forward;
  s.yaw.lookahead = yaw_controller.lookahead;
  s.yaw.omega_max = yaw_controller.omega_max;
  s.yaw.dt = yaw_controller.dt;
  s.yaw.agent_radius = yaw_controller.agent_radius;
  s.yaw.validate();

  s.avoidance.cone_u = avoidance.cone_u;
  s.avoidance.stop_steps = avoidance.stop_steps;
  s.avoidance.steer_window = deg2rad(avoidance.steer_window_deg);
  s.avoidance.n_rays = avoidance.rays;
  if (avoidance.rays < 8) throw std::invalid_argument("avoidance.rays must be >= 8");

  s.contact = parse_contact_model(episode.contact);
  s.mppi = mppi;
  s.mppi.validate();
  if (mppi.depth_rays < 8) throw std::invalid_argument("mppi.depth_rays must be >= 8");
  return s;
}

SuiteConfig RunConfig::suite_config() const {
  SuiteConfig s;
  s.master_seed = run.master_seed;
  s.trajectories = suite.trajectories;
  s.poses_per_trajectory = suite.poses_per_trajectory;
  s.tasks.clear();
  for (const auto& t : suite.tasks) s.tasks.push_back(parse_task(t));
  s.inits.clear();
  for (const auto& i : suite.inits) s.inits.push_back(parse_init(i));
  s.camera_modes.clear();
  for (const auto& m : suite.camera_modes) {
    const CameraModeKind kind = parse_camera_mode(m);
    if (kind == CameraModeKind::Sweep) throw std::invalid_argument("suite.camera_modes: use the sweep command for sweeps");
    s.camera_modes.push_back(kind);
  }
  s.controller = parse_controller(suite.controller);
  s.noise = noise;
  s.noise.validate();
  s.step_cap = episode.step_cap;
  if (s.step_cap < 1) throw std::invalid_argument("episode.step_cap must be >= 1");
  s.success_radius = episode.success_radius;
  if (!(s.success_radius > 0.0)) throw std::invalid_argument("episode.success_radius must be > 0");
  return s;
}

SweepParameter RunConfig::sweep_parameter() const { return parse_sweep_parameter(sweep.parameter); }

}  // namespace trajguide
