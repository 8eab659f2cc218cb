#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "trajguide/geometry.hpp"
#include "trajguide/guidance.hpp"
#include "trajguide/world.hpp"

namespace trajguide {

struct YawControllerConfig {
  double k_p = 2.0;        // 1/s, gain on the target's u
  double v_forward = 0.5;  // m/s
  std::size_t lookahead = 2;
  double omega_max = 1.5;  // rad/s
  double dt = 0.25;        // s, simulation step for ground agents
  double agent_radius = 0.2;

  void validate() const;
};

struct ControlCommand {
  double v_forward = 0.0;
  double omega = 0.0;
  double v_z = 0.0;
  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

struct Target {
  Vec2 point;               // image-space (u, v)
  int direction = 1;        // traversal direction s
  std::size_t index = 0;    // 1-based frame index of the target
  std::size_t nearest = 0;  // 1-based index k of the closest visible frame (0 on fallback)
  bool fallback = false;    // taken from a non-visible frame
};

/// Lookahead target on the ordered visible sequence. With no visible frame the
/// border point of the closest non-visible frame is used; ties there go to the
/// smaller index. std::nullopt when there are no triplets.
std::optional<Target> select_target(const Guidance& triplets, std::size_t goal_index,
                                    const YawControllerConfig& cfg);

/// Proportional yaw law at constant forward speed; holds still without a target.
ControlCommand yaw_command(const std::optional<Target>& target, const YawControllerConfig& cfg);

struct AvoidanceConfig {
  double cone_u = 0.25;          // |u| below this is the forward cone
  double stop_steps = 3.0;       // stop distance = stop_steps * v * dt + radius
  double steer_window = deg2rad(60.0);
  std::size_t n_rays = 64;
};

/// Reactive override: when the forward cone is closer than the stop distance,
/// turn at full rate toward the deepest ray within the steering window and slow
/// down proportionally. Ties go to the positive-omega (left) side.
ControlCommand avoid_obstacles(const ControlCommand& cmd, const DepthScan& scan,
                               const YawControllerConfig& cfg, const AvoidanceConfig& avoid = {});

struct StepResult {
  Pose pose;
  bool collided = false;
};

/// What happens when a motion would break the clearance radius. Stop cuts the
/// motion back to the last admissible point on the segment. Slide does the same
/// and then spends the blocked remainder along the wall.
enum class ContactModel { Stop, Slide };

std::string_view to_string(ContactModel c);
ContactModel parse_contact_model(std::string_view s);

/// Unicycle Euler step: turn first, then advance along the new heading.
StepResult step_ground_agent(const Pose& pose, const ControlCommand& cmd, const DistanceField& df,
                             double dt, double agent_radius, ContactModel contact = ContactModel::Slide);

/// Holonomic variant with world-frame velocity (vx, vy) and yaw rate.
StepResult step_holonomic_agent(const Pose& pose, Vec2 velocity, double omega, double v_z,
                                const DistanceField& df, double dt, double agent_radius,
                                ContactModel contact = ContactModel::Slide);

}  // namespace trajguide
