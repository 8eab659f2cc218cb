#pragma once

#include <cstddef>
#include <vector>

#include "trajguide/geometry.hpp"
#include "trajguide/rng.hpp"
#include "trajguide/world.hpp"

namespace trajguide {

/// Saturated logit emitted by the oracle.
inline constexpr double kOracleLogit = 10.0;

/// Image-space location, visibility logit and normalized distance of one
/// reference frame as seen from the query view.
struct GuidanceTriplet {
  Vec2 p;               // (u, v) in [-1, 1]^2
  double v_logit = 0.0;  // visible iff sigmoid(v_logit) > 0.5, i.e. v_logit > 0
  double d = 0.0;        // in [0, 1]; farthest visible frame is at 1

  bool visible() const { return v_logit > 0.0; }
  friend bool operator==(const GuidanceTriplet&, const GuidanceTriplet&) = default;
};

using Guidance = std::vector<GuidanceTriplet>;

struct NoiseModel {
  double sigma_p = 0.0;
  double flip_prob = 0.0;
  double sigma_d = 0.0;
  double backward_degradation = 1.0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  bool is_zero() const { return sigma_p == 0.0 && flip_prob == 0.0 && sigma_d == 0.0; }
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct OracleGuidance {
  Guidance triplets;
  /// Metric distance of the farthest visible frame (0 when nothing is visible).
  double scale = 0.0;
};

/// Ground-truth guidance from geometry: projection, frustum and occlusion tests.
OracleGuidance oracle_guidance_with_scale(const World& world, const CameraModel& camera,
                                          const Pose& query, const ReferenceTrajectory& traj);

inline Guidance oracle_guidance(const World& world, const CameraModel& camera, const Pose& query,
                                const ReferenceTrajectory& traj) {
  return oracle_guidance_with_scale(world, camera, query, traj).triplets;
}

/// Gaussian noise on p and d, visibility flips; magnitudes scaled by
/// backward_degradation when `opposing`. d is renormalized so that the visible
/// maximum is 1 again.
Guidance perturb_guidance(const Guidance& triplets, const NoiseModel& noise, Rng& rng, bool opposing);

/// 1-based ascending indices of visible triplets.
std::vector<std::size_t> visible_set(const Guidance& triplets);

}  // namespace trajguide
