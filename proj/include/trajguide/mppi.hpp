#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trajguide/geometry.hpp"
#include "trajguide/guidance.hpp"
#include "trajguide/rng.hpp"
#include "trajguide/world.hpp"

namespace trajguide {

struct MppiConfig {
  std::size_t rollouts = 256;  // M
  std::size_t horizon = 20;    // K
  double dt = 0.1;
  double sigma_vx = 0.3;
  double sigma_vy = 0.3;
  double sigma_omega = 0.5;
  double beta = 1.0;  // inverse temperature
  double w_goal = 10.0;
  double w_coll = 100.0;
  double w_vis = 10.0;
  double collision_radius = 0.3;
  std::size_t goal_point_rank = 3;
  double k_z = 0.5;
  // sample box; not part of the optimization itself
  double v_max = 1.0;
  double omega_max = 1.5;
  // (r - DF)+ instead of the indicator form 1[DF <= r] * DF
  bool penetration_cost = false;
  std::size_t scale_candidates = 64;
  std::size_t depth_rays = 64;

  void validate() const;
};

/// Single-integrator state [p_x, p_y, psi].
struct PlanarState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  Vec2 xy() const { return {x, y}; }
  friend bool operator==(const PlanarState&, const PlanarState&) = default;
};

/// World-frame velocity and yaw rate [v_x, v_y, omega].
struct VelocityControl {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  friend bool operator==(const VelocityControl&, const VelocityControl&) = default;
};

using ControlSequence = std::vector<VelocityControl>;

/// Places each selected triplet along its bearing at range d, then applies the
/// largest common scale (out of `candidates` evenly spaced values up to the scan
/// depth along the farthest point's ray) that keeps all points at least `r` from
/// obstacles. `order` lists 1-based frame indices to ground; they should be visible.
std::vector<Vec2> ground_predictions(const Guidance& triplets, std::span<const std::size_t> order,
                                     const DepthScan& scan, const CameraModel& camera,
                                     const Pose& observer, const DistanceField& df, double r,
                                     std::size_t candidates = 64);

/// Grounds every visible triplet in index order.
std::vector<Vec2> ground_predictions(const Guidance& triplets, const DepthScan& scan,
                                     const CameraModel& camera, const Pose& observer,
                                     const DistanceField& df, double r, std::size_t candidates = 64);

/// x_{k+1} = x_k + dt * u_k with psi wrapped; returns K + 1 states.
std::vector<PlanarState> rollout(const PlanarState& x0, std::span<const VelocityControl> controls, double dt);

/// Sum over states 1..K of the weighted goal, visibility and collision terms.
double trajectory_cost(std::span<const PlanarState> states, Vec2 goal, const DistanceField& df,
                       const MppiConfig& cfg);

/// w_m = exp(-(J_m - min J) / beta) / eta, normalized to sum to one.
std::vector<double> importance_weights(std::span<const double> costs, double beta);

/// Sum of weights[m] * sequences[m], element-wise.
ControlSequence weighted_average(std::span<const ControlSequence> sequences, std::span<const double> weights);

/// Goal point: the goal_point_rank-th grounded point, clamped to the list length.
Vec2 select_goal_point(std::span<const Vec2> grounded, std::size_t rank);

struct MppiStepResult {
  VelocityControl command;
  ControlSequence nominal;  // shifted for the next step
  ControlSequence optimal;  // weighted average before shifting
  std::vector<double> costs;
  std::vector<double> weights;
};

/// One receding-horizon MPPI iteration. `grounded` must be non-empty.
MppiStepResult mppi_step(const PlanarState& x0, const ControlSequence& nominal,
                         std::span<const Vec2> grounded, const DistanceField& df,
                         const MppiConfig& cfg, Rng& rng);

/// Shifts left by one, repeating the last element.
ControlSequence shift_sequence(const ControlSequence& seq);

/// v_z = -k_z * v of the goal triplet; 0 if that triplet is not visible.
double height_command(const Guidance& triplets, std::size_t goal_index, const MppiConfig& cfg);

/// Holds the nominal sequence between steps of one episode.
class MppiController {
 public:
  explicit MppiController(MppiConfig cfg);

  /// Optimizes when `grounded` is non-empty, otherwise replays the previous plan.
  VelocityControl step(const PlanarState& x0, std::span<const Vec2> grounded, const DistanceField& df,
                       Rng& rng);

  const ControlSequence& nominal() const { return nominal_; }
  const MppiConfig& config() const { return cfg_; }

 private:
  MppiConfig cfg_;
  ControlSequence nominal_;
};

}  // namespace trajguide
