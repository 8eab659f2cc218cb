#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trajguide/error.hpp"
#include "trajguide/eval.hpp"
#include "trajguide/world.hpp"

namespace trajguide {

inline constexpr std::string_view kEpisodeSchema = "trajguide-episode v1";

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

/// JSON array of {x, y, z, yaw}.
nlohmann::json trajectory_to_json(const ReferenceTrajectory& traj);
std::vector<Pose> trajectory_poses_from_json(const nlohmann::json& j);

/// One results line: the EpisodeConfig echo plus every EpisodeResult field.
nlohmann::json episode_record_to_json(const EpisodeConfig& cfg, const EpisodeResult& result);

struct EpisodeRecord {
  EpisodeConfig config;
  EpisodeResult result;
};

/// Throws ParseError on schema mismatch or missing fields.
EpisodeRecord episode_record_from_json(const nlohmann::json& j);

/// One guidance-trace line per simulation step.
nlohmann::json trace_step_to_json(std::uint64_t episode_id, const TraceStep& step);

/// Reads every non-empty line of a JSON-lines file; ParseError names the line.
std::vector<EpisodeRecord> read_episode_jsonl(const std::string& path);

}  // namespace trajguide
