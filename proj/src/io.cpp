#include "trajguide/io.hpp"

#include <fstream>

#include "trajguide/error.hpp"

namespace trajguide {

using nlohmann::json;

json pose_to_json(const Pose& pose) {
  return {{"x", pose.x()}, {"y", pose.y()}, {"z", pose.z()}, {"yaw", pose.yaw()}};
}

Pose pose_from_json(const json& j) {
  return Pose(j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>(), j.at("yaw").get<double>());
}

json trajectory_to_json(const ReferenceTrajectory& traj) {
  json arr = json::array();
  for (const Pose& p : traj.poses) arr.push_back(pose_to_json(p));
  return arr;
}

std::vector<Pose> trajectory_poses_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("trajectory: expected a JSON array");
  std::vector<Pose> poses;
  for (const auto& e : j) poses.push_back(pose_from_json(e));
  return poses;
}

json episode_record_to_json(const EpisodeConfig& cfg, const EpisodeResult& r) {
  json j;
  j["schema"] = kEpisodeSchema;
  j["id"] = cfg.id;
  j["world_seed"] = cfg.world_seed;
  j["trajectory_seed"] = cfg.trajectory_seed;
  j["pose_seed"] = cfg.pose_seed;
  j["task"] = to_string(cfg.task);
  j["goal_index"] = cfg.goal_index;
  j["init"] = to_string(cfg.init);
  j["camera_mode"] = to_string(cfg.camera.kind);
  j["camera_seed"] = cfg.camera.seed;
  j["sweep_parameter"] = to_string(cfg.camera.parameter);
  j["sweep_magnitude"] = cfg.camera.magnitude;
  j["controller"] = to_string(cfg.controller);
  j["noise"] = {{"sigma_p", cfg.noise.sigma_p},
                {"flip_prob", cfg.noise.flip_prob},
                {"sigma_d", cfg.noise.sigma_d},
                {"backward_degradation", cfg.noise.backward_degradation}};
  j["step_cap"] = cfg.step_cap;
  j["success_radius"] = cfg.success_radius;

  j["valid"] = r.valid;
  j["error"] = r.error;
  j["success"] = r.success;
  j["steps"] = r.steps;
  j["path_length"] = r.path_length;
  j["geodesic"] = r.geodesic;
  j["collisions"] = r.collisions;
  j["final_distance_to_goal"] = r.final_distance_to_goal;
  j["min_distance_to_goal"] = r.min_distance_to_goal;
  j["init_distance"] = r.init_distance;
  j["n_frames"] = r.n_frames;
  j["resolved_goal_index"] = r.goal_index;
  j["agent_camera"] = {{"fov_h", r.agent_camera.fov_h()},
                       {"aspect", r.agent_camera.aspect()},
                       {"mount_height", r.agent_camera.mount_height()}};
  return j;
}

EpisodeRecord episode_record_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kEpisodeSchema) {
      throw ParseError("episode record: schema mismatch (" + j.at("schema").get<std::string>() + ")");
    }
    EpisodeRecord rec;
    EpisodeConfig& c = rec.config;
    c.id = j.at("id").get<std::uint64_t>();
    c.world_seed = j.at("world_seed").get<std::uint64_t>();
    c.trajectory_seed = j.at("trajectory_seed").get<std::uint64_t>();
    c.pose_seed = j.at("pose_seed").get<std::uint64_t>();
    c.task = parse_task(j.at("task").get<std::string>());
    c.goal_index = j.at("goal_index").get<std::size_t>();
    c.init = parse_init(j.at("init").get<std::string>());
    c.camera.kind = parse_camera_mode(j.at("camera_mode").get<std::string>());
    c.camera.seed = j.at("camera_seed").get<std::uint64_t>();
    c.camera.parameter = parse_sweep_parameter(j.at("sweep_parameter").get<std::string>());
    c.camera.magnitude = j.at("sweep_magnitude").get<double>();
    c.controller = parse_controller(j.at("controller").get<std::string>());
    const json& n = j.at("noise");
    c.noise = {n.at("sigma_p").get<double>(), n.at("flip_prob").get<double>(), n.at("sigma_d").get<double>(),
               n.at("backward_degradation").get<double>()};
    c.step_cap = j.at("step_cap").get<std::size_t>();
    c.success_radius = j.at("success_radius").get<double>();

    EpisodeResult& r = rec.result;
    r.id = c.id;
    r.valid = j.at("valid").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.success = j.at("success").get<bool>();
    r.steps = j.at("steps").get<std::size_t>();
    r.path_length = j.at("path_length").get<double>();
    r.geodesic = j.at("geodesic").get<double>();
    r.collisions = j.at("collisions").get<std::size_t>();
    r.final_distance_to_goal = j.at("final_distance_to_goal").get<double>();
    r.min_distance_to_goal = j.at("min_distance_to_goal").get<double>();
    r.init_distance = j.at("init_distance").get<double>();
    r.n_frames = j.at("n_frames").get<std::size_t>();
    r.goal_index = j.at("resolved_goal_index").get<std::size_t>();
    const json& cam = j.at("agent_camera");
    r.agent_camera = CameraModel(cam.at("fov_h").get<double>(), cam.at("aspect").get<double>(),
                                 cam.at("mount_height").get<double>());
    return rec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("episode record: ") + e.what());
  }
}

json trace_step_to_json(std::uint64_t episode_id, const TraceStep& step) {
  json triplets = json::array();
  for (const GuidanceTriplet& t : step.triplets) {
    triplets.push_back({{"u", t.p.x}, {"v", t.p.y}, {"v_logit", t.v_logit}, {"d", t.d}});
  }
  return {{"episode", episode_id}, {"step", step.step}, {"pose", pose_to_json(step.pose)}, {"triplets", triplets}};
}

std::vector<EpisodeRecord> read_episode_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::vector<EpisodeRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      out.push_back(episode_record_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace trajguide
