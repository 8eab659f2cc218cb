// Acceptance suite: prints one PASS/FAIL line per criterion.
//
//   trajguide_acceptance [--expect-red 3,5]
//
// Without --expect-red the exit code is 0 only when every criterion passes.
// With it, the exit code is 0 only when the failing set is exactly the given set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "trajguide/config.hpp"
#include "trajguide/io.hpp"
#include "trajguide/mppi.hpp"
#include "trajguide/report.hpp"

using namespace trajguide;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v, int precision = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SuiteConfig oracle_suite(Task task, InitMode init) {
  SuiteConfig s;
  s.trajectories = 50;
  s.poses_per_trajectory = 2;
  s.tasks = {task};
  s.inits = {init};
  s.camera_modes = {CameraModeKind::Matched};
  s.controller = ControllerKind::YawAvoid;
  return s;
}

std::vector<EpisodeResult> results_of(const std::vector<EpisodeOutcome>& outs) {
  std::vector<EpisodeResult> r;
  for (const auto& o : outs) r.push_back(o.result);
  return r;
}

std::vector<EpisodeRecord> records_of(const std::vector<EpisodeOutcome>& outs) {
  std::vector<EpisodeRecord> r;
  for (const auto& o : outs) r.push_back({o.config, o.result});
  return r;
}

double forward_sr = -1.0;

Verdict forward_ceiling(const Scenario& sc) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const auto outs = run_suite(build_suite(oracle_suite(Task::ToEnd, InitMode::On), sc), sc, 1);
  const double secs = seconds_since(t0);
  const auto r = results_of(outs);
  forward_sr = success_rate(r);
  const double p = spl(r);
  v.note("SR " + num(forward_sr) + " SPL " + num(p) + " over " + std::to_string(r.size()) + " episodes in " +
         num(secs, 1) + " s");
  v.require(forward_sr >= 0.95, "SR >= 0.95");
  v.require(p >= 0.85, "SPL >= 0.85");
  v.require(secs < 300.0, "runtime < 5 min");
  return v;
}

Verdict backward_parity(const Scenario& sc) {
  Verdict v;
  const double back = success_rate(results_of(run_suite(build_suite(oracle_suite(Task::ToStart, InitMode::On), sc), sc, 1)));
  v.note("backward SR " + num(back) + " forward SR " + num(forward_sr));
  v.require(std::abs(back - forward_sr) <= 0.05, "|SR_back - SR_fwd| <= 5 points");
  return v;
}

Verdict off_trajectory_shape(const Scenario& sc) {
  Verdict v;
  SuiteConfig s = oracle_suite(Task::ToEnd, InitMode::Off);
  s.trajectories = 200;
  s.noise = NoiseModel{0.1, 0.1, 0.3, 1.0};
  const auto outs = run_suite(build_suite(s, sc), sc, 1);
  const auto recs = records_of(outs);
  std::size_t valid = 0;
  for (const auto& r : recs) valid += r.result.valid ? 1 : 0;
  const auto curve = smooth_curve(init_distance_curve(recs, 0.5), 3);
  v.note(std::to_string(valid) + " valid off-trajectory episodes");
  v.require(valid >= 400, ">= 400 off-trajectory episodes");
  if (curve.empty()) {
    v.require(false, "non-empty curve");
    return v;
  }
  double prev = 2.0;
  std::string shape;
  bool monotone = true;
  for (const auto& p : curve) {
    if (p.n == 0) continue;
    shape += (shape.empty() ? "" : " ") + num(p.success_rate(), 2);
    if (p.success_rate() > prev) monotone = false;
    prev = p.success_rate();
  }
  const double at2 = bucket_at(curve, 2.0).success_rate();
  const double at8 = bucket_at(curve, 8.0).success_rate();
  v.note("smoothed SR by 0.5 m bucket: " + shape);
  v.note("SR(2 m) " + num(at2) + " SR(8 m) " + num(at8));
  v.require(monotone, "smoothed curve non-increasing");
  v.require(at2 >= at8 + 0.10, "SR(2 m) >= SR(8 m) + 10 points");
  return v;
}

Verdict mismatch_sensitivity(const Scenario& sc) {
  Verdict v;
  const auto base = build_suite(oracle_suite(Task::ToEnd, InitMode::On), sc);
  const SweepResult height = sweep_mismatch(SweepParameter::Height, {0.0, 1.2}, base, sc, 1);
  const SweepResult fov = sweep_mismatch(SweepParameter::Fov, {0.0, 20.0}, base, sc, 1);
  const double h0 = height.buckets[0].success_rate, h12 = height.buckets[1].success_rate;
  const double f0 = fov.buckets[0].success_rate, f20 = fov.buckets[1].success_rate;
  v.note("height SR " + num(h0) + " -> " + num(h12) + " at 1.2 m; fov SR " + num(f0) + " -> " + num(f20) + " at 20 deg");
  v.require(h12 < h0, "SR(height 1.2 m) < SR(0)");
  v.require(std::abs(f20 - f0) <= 0.05, "|SR(fov 20 deg) - SR(0)| <= 5 points");
  return v;
}

Verdict mppi_numerics() {
  Verdict v;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> cost(0.0, 500.0), beta(0.01, 100.0), unit(-1.0, 1.0);

  double worst_sum = 0.0;
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> costs(2 + rng() % 300);
    for (double& c : costs) c = cost(rng);
    const auto w = importance_weights(costs, beta(rng));
    double sum = 0.0;
    for (double x : w) sum += x;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  v.require(worst_sum <= 1e-12, "weights sum to 1 within 1e-12");

  bool shift_exact = true;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> costs(128), shifted(128);
    const double shift = static_cast<double>(rng() % 4096) / 8.0;
    for (std::size_t m = 0; m < costs.size(); ++m) {
      costs[m] = static_cast<double>(rng() % 8192) / 16.0;
      shifted[m] = costs[m] + shift;
    }
    shift_exact = shift_exact && importance_weights(costs, 1.5) == importance_weights(shifted, 1.5);
  }
  v.require(shift_exact, "uniform cost shift leaves weights unchanged");

  double worst_argmin = 0.0;
  for (int it = 0; it < 100; ++it) {
    std::vector<ControlSequence> seqs(256, ControlSequence(20));
    std::vector<double> costs;
    for (auto& s : seqs) {
      for (auto& u : s) u = {unit(rng), unit(rng), unit(rng)};
      costs.push_back(cost(rng));
    }
    const auto best = static_cast<std::size_t>(std::min_element(costs.begin(), costs.end()) - costs.begin());
    const auto avg = weighted_average(seqs, importance_weights(costs, 1e-9));
    for (std::size_t k = 0; k < 20; ++k) {
      worst_argmin = std::max({worst_argmin, std::abs(avg[k].vx - seqs[best][k].vx),
                               std::abs(avg[k].vy - seqs[best][k].vy), std::abs(avg[k].omega - seqs[best][k].omega)});
    }
  }
  v.require(worst_argmin <= 1e-6, "beta -> 0 selects the argmin within 1e-6");

  const World open = World::empty(80, 80, 0.25);
  const DistanceField df = build_distance_field(open);
  const MppiConfig cfg;
  const std::vector<PlanarState> at_goal{{10, 10, 0}, {10, 10, 0}};
  v.require(trajectory_cost(at_goal, {10, 10}, df, cfg) == 0.0, "zero-error state costs 0");

  const double b = 1.7;
  const auto w = importance_weights(std::vector<double>{0.0, b * std::log(3.0)}, b);
  v.require(std::abs(w[0] - 0.75) <= 1e-12 && std::abs(w[1] - 0.25) <= 1e-12, "(0, beta ln 3) -> (0.75, 0.25)");

  const std::vector<Vec2> grounded{{11, 10}, {12, 10}, {13, 10}};
  Rng step_rng(3);
  ControlSequence nominal(cfg.horizon);
  const auto t0 = std::chrono::steady_clock::now();
  int calls = 0;
  while (seconds_since(t0) < 1.0) {
    nominal = mppi_step({10, 10, 0}, nominal, grounded, df, cfg, step_rng).nominal;
    ++calls;
  }
  const double rate = calls / seconds_since(t0);
  v.note("weight sum error " + sci(worst_sum) + ", argmin gap " + sci(worst_argmin) + ", " +
         num(rate, 0) + " steps/s at M = " + std::to_string(cfg.rollouts) + ", K = " + std::to_string(cfg.horizon));
  v.require(cfg.rollouts == 256 && cfg.horizon == 20, "default M = 256, K = 20");
  v.require(rate >= 10.0, ">= 10 mppi_step calls/s");
  return v;
}

Verdict geometry_equivalence() {
  Verdict v;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-20, 20), z(0, 3), yaw(-kPi, kPi), fov(0.3, 2.8), asp(0.5, 2.5);
  double worst = 0.0;
  std::size_t in_view = 0;
  for (int i = 0; i < 50000; ++i) {
    const CameraModel cam(fov(rng), asp(rng), 1.0);
    const Pose obs(pos(rng), pos(rng), z(rng), yaw(rng));
    const Vec3 pt{pos(rng), pos(rng), z(rng)};
    const auto ip = project(cam, obs, pt);
    if (!ip) continue;
    ++in_view;
    worst = std::max(worst, distance(back_project(cam, obs, *ip), pt) / std::max(1.0, pt.norm()));
  }
  v.require(worst <= 1e-9, "projection round trip within 1e-9");

  std::size_t df_worlds = 0;
  bool df_equal = true;
  for (int t = 0; t < 40; ++t) {
    WorldParams p;
    p.width = 10 + static_cast<int>(rng() % 41);
    p.height = 10 + static_cast<int>(rng() % 41);
    p.density = 0.05 * static_cast<double>(t % 7);
    p.max_rect = 6;
    const World w = generate_world(500 + t, p);
    df_equal = df_equal && build_distance_field(w).values() == oracle::brute_force_distance_field(w);
    ++df_worlds;
  }
  v.require(df_equal, "distance field equals brute force");

  std::size_t planned = 0, unreachable = 0;
  bool plan_equal = true;
  WorldParams p;
  p.width = 50;
  p.height = 50;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const World w = generate_world(seed, p);
    const auto brute = oracle::brute_force_distance_field(w);
    Rng pick_rng(seed * 97);
    std::vector<Cell> free;
    for (int y = 0; y < w.height(); ++y) {
      for (int x = 0; x < w.width(); ++x) {
        if (!w.occupied(x, y)) free.push_back({x, y});
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    const Cell a = free[pick(pick_rng)], b = free[pick(pick_rng)];
    const double ref = oracle::dijkstra_length(w, brute, a, b, 0.2);
    if (ref < 0.0) {
      bool threw = false;
      try {
        plan_path(w, w.cell_center(a), w.cell_center(b), 0.2);
      } catch (const NoPathError&) {
        threw = true;
      }
      plan_equal = plan_equal && threw;
      ++unreachable;
      continue;
    }
    plan_equal = plan_equal && plan_path(w, w.cell_center(a), w.cell_center(b), 0.2).geodesic == ref;
    ++planned;
  }
  v.require(plan_equal, "plan_path equals Dijkstra exactly");
  v.note(std::to_string(in_view) + " projections, worst error " + sci(worst) + "; " +
         std::to_string(df_worlds) + " distance fields; " + std::to_string(planned) + " paths + " +
         std::to_string(unreachable) + " unreachable pairs on 100 worlds");
  return v;
}

Verdict protocol_constants() {
  Verdict v;
  const RunConfig cfg = parse_run_config(emit_run_config(RunConfig{}));
  const SuiteConfig s = cfg.suite_config();
  const Scenario sc = cfg.scenario();
  v.require(s.success_radius == 0.5, "success radius 0.5 m");
  v.require(s.step_cap == 1000, "step cap 1000");
  v.require(sc.mppi.w_goal == 10.0 && sc.mppi.w_coll == 100.0 && sc.mppi.w_vis == 10.0, "cost weights (10, 100, 10)");
  v.require(sc.mppi.goal_point_rank == 3, "goal rank 3");
  v.require(sc.trajectory.max_frames <= 40, "N <= 40 in config");

  // sigma(v) > 0.5 strictly: logit exactly 0 is not visible, the smallest positive one is
  Guidance g{{{0, 0}, 0.0, 1.0}, {{0, 0}, 5e-324, 1.0}, {{0, 0}, -5e-324, 1.0}};
  v.require(visible_set(g) == std::vector<std::size_t>{2}, "visibility threshold strict");

  EpisodeConfig ep = build_suite(oracle_suite(Task::ToEnd, InitMode::On), sc).front();
  std::size_t longest = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const World w = generate_world(seed, sc.world);
    try {
      longest = std::max(longest, sample_reference_trajectory(w, seed, sc.recorder_camera, sc.trajectory).size());
    } catch (const SamplingError&) {
    }
  }
  v.require(longest >= 2 && longest <= 40, "sampled trajectories have N <= 40");
  ep.step_cap = 1;
  v.require(run_episode(ep, sc).steps <= 1, "step cap enforced");
  v.note("radius " + num(s.success_radius, 1) + ", cap " + std::to_string(s.step_cap) + ", weights (" +
         num(sc.mppi.w_goal, 0) + ", " + num(sc.mppi.w_coll, 0) + ", " + num(sc.mppi.w_vis, 0) + "), rank " +
         std::to_string(sc.mppi.goal_point_rank) + ", longest N " + std::to_string(longest));
  return v;
}

Verdict determinism(const Scenario& sc) {
  Verdict v;
  SuiteConfig s;
  s.trajectories = 5;
  s.noise = NoiseModel{0.05, 0.05, 0.1, 2.0};
  const auto cfgs = build_suite(s, sc);
  std::vector<std::size_t> hashes;
  for (std::size_t workers : {1, 2, 4}) {
    auto outs = run_suite(cfgs, sc, workers);
    std::sort(outs.begin(), outs.end(), [](const auto& a, const auto& b) { return a.config.id < b.config.id; });
    std::string jsonl;
    for (const auto& o : outs) jsonl += episode_record_to_json(o.config, o.result).dump() + "\n";
    hashes.push_back(std::hash<std::string>{}(jsonl));
  }
  v.note(std::to_string(cfgs.size()) + " episodes, hashes " + std::to_string(hashes[0]) + " " +
         std::to_string(hashes[1]) + " " + std::to_string(hashes[2]));
  v.require(hashes[0] == hashes[1] && hashes[1] == hashes[2], "identical JSONL for 1, 2 and 4 workers");
  return v;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_red;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--expect-red" && i + 1 < argc) {
      expect_red = parse_list(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--expect-red N[,M...]]\n", argv[0]);
      return 1;
    }
  }

  const Scenario sc;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle ceiling, forward", [&] { return forward_ceiling(sc); }},
      {"backward parity", [&] { return backward_parity(sc); }},
      {"off-trajectory degradation shape", [&] { return off_trajectory_shape(sc); }},
      {"camera mismatch sensitivity", [&] { return mismatch_sensitivity(sc); }},
      {"MPPI numerics", mppi_numerics},
      {"geometry and world oracles", geometry_equivalence},
      {"protocol constants", protocol_constants},
      {"determinism across workers", [&] { return determinism(sc); }},
  };

  std::set<int> red;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) red.insert(id);
    std::printf("criterion %d %s: %s (%s)%s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                v.detail.c_str(), !v.pass && expect_red.count(id) ? " [expected]" : "");
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria pass\n", criteria.size() - red.size(), criteria.size());
  if (red == expect_red) return 0;
  for (int id : expect_red) {
    if (!red.count(id)) std::printf("criterion %d was expected to fail but passed\n", id);
  }
  return 1;
}
