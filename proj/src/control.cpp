#include "trajguide/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trajguide {

void YawControllerConfig::validate() const {
  if (!(k_p > 0.0)) throw std::invalid_argument("YawControllerConfig: k_p must be > 0");
  if (!(v_forward > 0.0)) throw std::invalid_argument("YawControllerConfig: v_forward must be > 0");
  if (!(omega_max > 0.0)) throw std::invalid_argument("YawControllerConfig: omega_max must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("YawControllerConfig: dt must be > 0");
  if (!(agent_radius >= 0.0)) throw std::invalid_argument("YawControllerConfig: agent_radius must be >= 0");
}

namespace {

int direction_to(std::size_t goal, std::size_t from) { return goal >= from ? 1 : -1; }

}  // namespace

std::optional<Target> select_target(const Guidance& triplets, std::size_t goal_index,
                                    const YawControllerConfig& cfg) {
  if (triplets.empty()) return std::nullopt;
  if (goal_index < 1 || goal_index > triplets.size()) {
    throw std::invalid_argument("select_target: goal index out of range");
  }
  const std::vector<std::size_t> vis = visible_set(triplets);
  if (!vis.empty()) {
    std::size_t j = 0;
    for (std::size_t pos = 1; pos < vis.size(); ++pos) {
      if (triplets[vis[pos] - 1].d < triplets[vis[j] - 1].d) j = pos;
    }
    const std::size_t k = vis[j];
    const int s = direction_to(goal_index, k);
    const auto last = static_cast<std::ptrdiff_t>(vis.size()) - 1;
    const std::ptrdiff_t m = std::clamp(static_cast<std::ptrdiff_t>(j) + s * static_cast<std::ptrdiff_t>(cfg.lookahead),
                                        std::ptrdiff_t{0}, last);
    const std::size_t idx = vis[static_cast<std::size_t>(m)];
    return Target{triplets[idx - 1].p, s, idx, k, false};
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < triplets.size(); ++i) {
    if (triplets[i].d < triplets[best].d) best = i;
  }
  const std::size_t idx = best + 1;
  return Target{triplets[best].p, direction_to(goal_index, idx), idx, 0, true};
}

ControlCommand yaw_command(const std::optional<Target>& target, const YawControllerConfig& cfg) {
  if (!target) return {};
  const double omega = std::clamp(-cfg.k_p * target->point.x, -cfg.omega_max, cfg.omega_max);
  return {cfg.v_forward, omega, 0.0};
}

ControlCommand avoid_obstacles(const ControlCommand& cmd, const DepthScan& scan,
                               const YawControllerConfig& cfg, const AvoidanceConfig& avoid) {
  if (scan.size() == 0) throw std::invalid_argument("avoid_obstacles: empty scan");
  double cone_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (std::abs(scan.u[i]) < avoid.cone_u) cone_min = std::min(cone_min, scan.range[i]);
  }
  const double stop = avoid.stop_steps * cfg.v_forward * cfg.dt + cfg.agent_radius;
  if (!(cone_min < stop)) return cmd;

  // scan order is left (u = -1) to right, so the first maximum is the leftmost
  std::size_t best = scan.size();
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (std::abs(scan.bearing(i)) > avoid.steer_window) continue;
    if (best == scan.size() || scan.range[i] > scan.range[best]) best = i;
  }
  ControlCommand out = cmd;
  const bool turn_right = best < scan.size() && scan.bearing(best) > 0.0;
  out.omega = turn_right ? -cfg.omega_max : cfg.omega_max;
  out.v_forward = cmd.v_forward * std::clamp(cone_min / stop, 0.0, 1.0);
  return out;
}

namespace {

// Moves from `from` toward `to`, stopping at the last point that keeps clearance.
std::pair<Vec2, bool> clamp_motion(Vec2 from, Vec2 to, const DistanceField& df, double radius) {
  const double start_clearance = df.sample(from);
  if (start_clearance < radius) {
    // already inside the band: only accept motion that does not go deeper
    if (df.sample(to) >= start_clearance) return {to, df.sample(to) < radius};
    return {from, true};
  }
  const double len = distance(from, to);
  if (len == 0.0) return {from, false};
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (df.cell_size() / 8.0))));
  double ok = 0.0;
  double bad = -1.0;
  for (int i = 1; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    if (df.sample(from + t * (to - from)) < radius) {
      bad = t;
      break;
    }
    ok = t;
  }
  if (bad < 0.0) return {to, false};
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (ok + bad);
    if (df.sample(from + mid * (to - from)) >= radius) ok = mid;
    else bad = mid;
  }
  return {from + ok * (to - from), true};
}

// Clamped move; with sliding, the part of the blocked displacement that runs
// along the wall (normal from the distance-field gradient) is applied as a second
// clamped move from the contact point.
std::pair<Vec2, bool> resolve_motion(Vec2 from, Vec2 to, const DistanceField& df, double radius,
                                     ContactModel contact) {
  auto [p, collided] = clamp_motion(from, to, df, radius);
  if (!collided || contact == ContactModel::Stop) return {p, collided};
  const double h = df.cell_size() / 8.0;
  const Vec2 grad{df.sample(p + Vec2{h, 0.0}) - df.sample(p - Vec2{h, 0.0}),
                  df.sample(p + Vec2{0.0, h}) - df.sample(p - Vec2{0.0, h})};
  const double norm = std::hypot(grad.x, grad.y);
  if (norm == 0.0) return {p, collided};
  const Vec2 n{grad.x / norm, grad.y / norm};
  const Vec2 rest = to - p;
  const double into = rest.x * n.x + rest.y * n.y;
  const Vec2 along = into < 0.0 ? rest - into * n : rest;
  return {clamp_motion(p, p + along, df, radius).first, true};
}

}  // namespace

std::string_view to_string(ContactModel c) { return c == ContactModel::Stop ? "stop" : "slide"; }

ContactModel parse_contact_model(std::string_view s) {
  if (s == "stop") return ContactModel::Stop;
  if (s == "slide") return ContactModel::Slide;
  throw std::invalid_argument("unknown contact model '" + std::string(s) + "'");
}

StepResult step_ground_agent(const Pose& pose, const ControlCommand& cmd, const DistanceField& df,
                             double dt, double agent_radius, ContactModel contact) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_ground_agent: dt must be > 0");
  const double yaw = wrap_angle(pose.yaw() + cmd.omega * dt);
  const Vec2 heading{std::cos(yaw), std::sin(yaw)};
  const Vec2 candidate = pose.xy() + (cmd.v_forward * dt) * heading;
  const auto [p, collided] = resolve_motion(pose.xy(), candidate, df, agent_radius, contact);
  return {Pose(p.x, p.y, pose.z(), yaw), collided};
}

StepResult step_holonomic_agent(const Pose& pose, Vec2 velocity, double omega, double v_z,
                                const DistanceField& df, double dt, double agent_radius,
                                ContactModel contact) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_holonomic_agent: dt must be > 0");
  const double yaw = wrap_angle(pose.yaw() + omega * dt);
  const Vec2 candidate = pose.xy() + dt * velocity;
  const auto [p, collided] = resolve_motion(pose.xy(), candidate, df, agent_radius, contact);
  const double z = std::max(0.0, pose.z() + v_z * dt);
  return {Pose(p.x, p.y, z, yaw), collided};
}

}  // namespace trajguide
