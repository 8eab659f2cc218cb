#include "trajguide/guidance.hpp"

#include <algorithm>
#include <stdexcept>

namespace trajguide {

void NoiseModel::validate() const {
  if (!(sigma_p >= 0.0) || !(sigma_d >= 0.0)) throw std::invalid_argument("NoiseModel: negative sigma");
  if (!(flip_prob >= 0.0 && flip_prob <= 0.5)) throw std::invalid_argument("NoiseModel: flip_prob must be in [0, 0.5]");
  if (!(backward_degradation >= 1.0)) throw std::invalid_argument("NoiseModel: backward_degradation must be >= 1");
}

OracleGuidance oracle_guidance_with_scale(const World& world, const CameraModel& camera,
                                          const Pose& query, const ReferenceTrajectory& traj) {
  if (!world.in_bounds(query.xy())) throw std::invalid_argument("oracle_guidance: query outside world");
  const std::size_t n = traj.size();
  std::vector<double> dist(n);
  std::vector<bool> visible(n, false);
  Guidance out(n);
  const Vec3 eye = query.position();

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 target = traj.poses[i].position();
    const double range = distance(eye, target);
    GuidanceTriplet& t = out[i];
    if (range <= kNearPlane) {
      dist[i] = 0.0;
      t.p = {0.0, 0.0};
      t.v_logit = -kOracleLogit;
      continue;
    }
    dist[i] = range;
    const auto ip = project(camera, query, target);
    if (ip) {
      t.p = {ip->u, ip->v};
      visible[i] = raycast(world, eye, target);
    } else {
      t.p = border_point(camera, to_camera_frame(query, target));
    }
    t.v_logit = visible[i] ? kOracleLogit : -kOracleLogit;
  }

  OracleGuidance result;
  result.scale = visible_distance_scale(dist, visible);
  const std::vector<double> d = normalize_distances(dist, visible);
  for (std::size_t i = 0; i < n; ++i) out[i].d = d[i];
  result.triplets = std::move(out);
  return result;
}

Guidance perturb_guidance(const Guidance& triplets, const NoiseModel& noise, Rng& rng, bool opposing) {
  noise.validate();
  const double m = opposing ? noise.backward_degradation : 1.0;
  const double sigma_p = noise.sigma_p * m;
  const double sigma_d = noise.sigma_d * m;
  const double flip = std::min(noise.flip_prob * m, 0.5);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution flipper(flip);
  Guidance out = triplets;
  bool d_changed = false;
  bool vis_changed = false;
  for (GuidanceTriplet& t : out) {
    if (sigma_p > 0.0) {
      t.p.x = std::clamp(t.p.x + sigma_p * gauss(rng), -1.0, 1.0);
      t.p.y = std::clamp(t.p.y + sigma_p * gauss(rng), -1.0, 1.0);
    }
    if (sigma_d > 0.0) {
      t.d = std::max(0.0, t.d + sigma_d * gauss(rng));
      d_changed = true;
    }
    if (flip > 0.0 && flipper(rng)) {
      t.v_logit = -t.v_logit;
      vis_changed = true;
    }
  }
  if (d_changed || vis_changed) {
    double top = 0.0;
    for (const auto& t : out) {
      if (t.visible()) top = std::max(top, t.d);
    }
    for (auto& t : out) t.d = top > 0.0 ? std::clamp(t.d / top, 0.0, 1.0) : std::clamp(t.d, 0.0, 1.0);
  }
  return out;
}

std::vector<std::size_t> visible_set(const Guidance& triplets) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    if (triplets[i].visible()) idx.push_back(i + 1);
  }
  return idx;
}

}  // namespace trajguide
