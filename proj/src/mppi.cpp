#include "trajguide/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trajguide {

void MppiConfig::validate() const {
  if (rollouts < 2) throw std::invalid_argument("MppiConfig: need at least 2 rollouts");
  if (horizon < 1) throw std::invalid_argument("MppiConfig: horizon must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("MppiConfig: dt must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("MppiConfig: beta must be > 0");
  if (!(w_goal >= 0.0 && w_coll >= 0.0 && w_vis >= 0.0)) throw std::invalid_argument("MppiConfig: negative weight");
  if (!(sigma_vx >= 0.0 && sigma_vy >= 0.0 && sigma_omega >= 0.0)) throw std::invalid_argument("MppiConfig: negative sigma");
  if (goal_point_rank < 1) throw std::invalid_argument("MppiConfig: goal_point_rank must be >= 1");
  if (scale_candidates < 1) throw std::invalid_argument("MppiConfig: scale_candidates must be >= 1");
}

std::vector<Vec2> ground_predictions(const Guidance& triplets, std::span<const std::size_t> order,
                                     const DepthScan& scan, const CameraModel& camera,
                                     const Pose& observer, const DistanceField& df, double r,
                                     std::size_t candidates) {
  if (order.empty()) return {};
  std::vector<Vec2> unit;
  unit.reserve(order.size());
  std::size_t farthest = order.front();
  for (std::size_t idx : order) {
    const GuidanceTriplet& t = triplets.at(idx - 1);
    const double bearing = std::atan(t.p.x * camera.tan_half_h());
    const double heading = observer.yaw() - bearing;
    unit.push_back(t.d * Vec2{std::cos(heading), std::sin(heading)});
    if (t.d > triplets[farthest - 1].d) farthest = idx;
  }
  const double alpha_max = scan.range.at(scan.nearest_ray(triplets[farthest - 1].p.x));

  const auto place = [&](double alpha) {
    std::vector<Vec2> pts;
    pts.reserve(unit.size());
    for (const Vec2& u : unit) pts.push_back(observer.xy() + alpha * u);
    return pts;
  };
  for (std::size_t c = candidates; c >= 1; --c) {
    const double alpha = alpha_max * static_cast<double>(c) / static_cast<double>(candidates);
    std::vector<Vec2> pts = place(alpha);
    const bool clear = std::all_of(pts.begin(), pts.end(), [&](Vec2 p) { return df.sample(p) >= r; });
    if (clear || c == 1) return pts;  // smallest candidate when nothing is clear
  }
  return {};
}

std::vector<Vec2> ground_predictions(const Guidance& triplets, const DepthScan& scan,
                                     const CameraModel& camera, const Pose& observer,
                                     const DistanceField& df, double r, std::size_t candidates) {
  const std::vector<std::size_t> vis = visible_set(triplets);
  return ground_predictions(triplets, vis, scan, camera, observer, df, r, candidates);
}

std::vector<PlanarState> rollout(const PlanarState& x0, std::span<const VelocityControl> controls, double dt) {
  std::vector<PlanarState> states;
  states.reserve(controls.size() + 1);
  states.push_back(x0);
  for (const VelocityControl& u : controls) {
    const PlanarState& x = states.back();
    states.push_back({x.x + dt * u.vx, x.y + dt * u.vy, wrap_angle(x.psi + dt * u.omega)});
  }
  return states;
}

double trajectory_cost(std::span<const PlanarState> states, Vec2 goal, const DistanceField& df,
                       const MppiConfig& cfg) {
  if (states.empty()) throw std::invalid_argument("trajectory_cost: no states");
  const double r = cfg.collision_radius;
  double total = 0.0;
  for (std::size_t k = 1; k < states.size(); ++k) {
    const PlanarState& s = states[k];
    const double c_goal = distance(s.xy(), goal);
    const double bearing_err = wrap_angle(std::atan2(goal.y - s.y, goal.x - s.x) - s.psi);
    const double c_vis = bearing_err * bearing_err;
    const double dist = df.sample(s.xy());
    double c_coll = 0.0;
    if (cfg.penetration_cost) c_coll = std::max(0.0, r - dist);
    else if (dist <= r) c_coll = dist;
    total += cfg.w_goal * c_goal + cfg.w_vis * c_vis + cfg.w_coll * c_coll;
  }
  return total;
}

std::vector<double> importance_weights(std::span<const double> costs, double beta) {
  if (costs.empty()) throw std::invalid_argument("importance_weights: no costs");
  if (!(beta > 0.0)) throw std::invalid_argument("importance_weights: beta must be > 0");
  const double rho = *std::min_element(costs.begin(), costs.end());
  std::vector<double> w(costs.size());
  double eta = 0.0;
  for (std::size_t m = 0; m < costs.size(); ++m) {
    w[m] = std::exp(-(costs[m] - rho) / beta);
    eta += w[m];
  }
  for (double& x : w) x /= eta;
  return w;
}

ControlSequence weighted_average(std::span<const ControlSequence> sequences, std::span<const double> weights) {
  if (sequences.size() != weights.size() || sequences.empty()) {
    throw std::invalid_argument("weighted_average: size mismatch");
  }
  ControlSequence out(sequences.front().size());
  for (std::size_t m = 0; m < sequences.size(); ++m) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k].vx += weights[m] * sequences[m][k].vx;
      out[k].vy += weights[m] * sequences[m][k].vy;
      out[k].omega += weights[m] * sequences[m][k].omega;
    }
  }
  return out;
}

Vec2 select_goal_point(std::span<const Vec2> grounded, std::size_t rank) {
  if (grounded.empty()) throw std::invalid_argument("select_goal_point: no grounded points");
  return grounded[std::min(rank, grounded.size()) - 1];
}

ControlSequence shift_sequence(const ControlSequence& seq) {
  if (seq.empty()) return seq;
  ControlSequence out(seq.begin() + 1, seq.end());
  out.push_back(seq.back());
  return out;
}

MppiStepResult mppi_step(const PlanarState& x0, const ControlSequence& nominal,
                         std::span<const Vec2> grounded, const DistanceField& df,
                         const MppiConfig& cfg, Rng& rng) {
  cfg.validate();
  if (nominal.size() != cfg.horizon) throw std::invalid_argument("mppi_step: nominal length != horizon");
  const Vec2 goal = select_goal_point(grounded, cfg.goal_point_rank);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ControlSequence> samples(cfg.rollouts, ControlSequence(cfg.horizon));
  std::vector<double> costs(cfg.rollouts);
  for (std::size_t m = 0; m < cfg.rollouts; ++m) {
    ControlSequence& v = samples[m];
    for (std::size_t k = 0; k < cfg.horizon; ++k) {
      v[k].vx = std::clamp(nominal[k].vx + cfg.sigma_vx * gauss(rng), -cfg.v_max, cfg.v_max);
      v[k].vy = std::clamp(nominal[k].vy + cfg.sigma_vy * gauss(rng), -cfg.v_max, cfg.v_max);
      v[k].omega = std::clamp(nominal[k].omega + cfg.sigma_omega * gauss(rng), -cfg.omega_max, cfg.omega_max);
    }
    costs[m] = trajectory_cost(rollout(x0, v, cfg.dt), goal, df, cfg);
  }

  MppiStepResult out;
  out.weights = importance_weights(costs, cfg.beta);
  out.optimal = weighted_average(samples, out.weights);
  out.command = out.optimal.front();
  out.nominal = shift_sequence(out.optimal);
  out.costs = std::move(costs);
  return out;
}

double height_command(const Guidance& triplets, std::size_t goal_index, const MppiConfig& cfg) {
  if (goal_index < 1 || goal_index > triplets.size()) return 0.0;
  const GuidanceTriplet& t = triplets[goal_index - 1];
  if (!t.visible()) return 0.0;
  return -cfg.k_z * t.p.y;
}

MppiController::MppiController(MppiConfig cfg) : cfg_(cfg), nominal_(cfg.horizon) { cfg_.validate(); }

VelocityControl MppiController::step(const PlanarState& x0, std::span<const Vec2> grounded,
                                     const DistanceField& df, Rng& rng) {
  if (grounded.empty()) {
    const VelocityControl held = nominal_.front();
    nominal_ = shift_sequence(nominal_);
    return held;
  }
  MppiStepResult r = mppi_step(x0, nominal_, grounded, df, cfg_, rng);
  nominal_ = std::move(r.nominal);
  return r.command;
}

}  // namespace trajguide
