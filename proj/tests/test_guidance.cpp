#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "trajguide/guidance.hpp"

using namespace trajguide;

namespace {

ReferenceTrajectory line_trajectory(std::vector<Vec3> pts, CameraModel cam) {
  ReferenceTrajectory t;
  for (const Vec3& p : pts) t.poses.emplace_back(p.x, p.y, p.z, 0.0);
  t.camera = cam;
  return t;
}

}  // namespace

TEST_CASE("oracle guidance examples") {
  const World w = World::empty(40, 40, 0.25);
  const CameraModel cam(kPi / 2.0, 1.0, 1.0);
  const Pose q(5, 5, 1, 0);
  const auto t = line_trajectory({{6, 5, 1}, {7, 5, 1}, {9, 5, 1}}, cam);
  const OracleGuidance g = oracle_guidance_with_scale(w, cam, q, t);
  REQUIRE(g.triplets.size() == 3);
  const double expect_d[3] = {0.25, 0.5, 1.0};
  for (int i = 0; i < 3; ++i) {
    CHECK(g.triplets[i].p == Vec2{0, 0});
    CHECK(g.triplets[i].v_logit == kOracleLogit);
    CHECK(g.triplets[i].d == expect_d[i]);
  }
  CHECK(g.scale == 4.0);

  const auto behind = line_trajectory({{3, 5, 1}, {7, 5, 1}}, cam);
  const Guidance gb = oracle_guidance(w, cam, q, behind);
  CHECK(gb[0].v_logit == -kOracleLogit);
  CHECK(gb[1].visible());
  // out of view points sit on the frame border
  CHECK(std::abs(gb[0].p.x) == doctest::Approx(1.0));

  std::vector<Cell> wall;
  for (int y = 15; y <= 25; ++y) wall.push_back({28, y});
  const World walled = oracle::world_with(40, 40, 0.25, wall);
  const Guidance gw = oracle_guidance(walled, cam, q, line_trajectory({{6, 5, 1}, {8, 5, 1}}, cam));
  CHECK(gw[0].visible());
  CHECK_FALSE(gw[1].visible());
  CHECK(gw[1].p.x == doctest::Approx(0.0));

  // a frame on top of the camera is not visible and has d = 0
  const Guidance self = oracle_guidance(w, cam, q, line_trajectory({{5, 5, 1}, {8, 5, 1}}, cam));
  CHECK_FALSE(self[0].visible());
  CHECK(self[0].d == 0.0);

  CHECK_THROWS_AS(oracle_guidance(w, cam, Pose(20, 5, 1, 0), t), std::invalid_argument);
}

TEST_CASE("visible triplets back-project onto their frames") {
  WorldParams p;
  const CameraModel cam(deg2rad(90), 4.0 / 3.0, 1.2);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const World w = generate_world(seed, p);
    const ReferenceTrajectory t = sample_reference_trajectory(w, seed, cam);
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t anchor = 1 + (seed + k * 7) % t.size();
      const QuerySample q = sample_query_pose(w, t, InitMode::Off, anchor, seed * 100 + k, cam);
      const OracleGuidance g = oracle_guidance_with_scale(w, cam, q.pose, t);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const GuidanceTriplet& tr = g.triplets[i];
        if (!tr.visible()) continue;
        const double range = tr.d * g.scale;
        // unit ray through (u, v) in the camera frame
        const CameraVector ray{1.0, tr.p.x * cam.tan_half_h(), tr.p.y * cam.tan_half_v()};
        const double n = std::sqrt(ray.forward * ray.forward + ray.right * ray.right + ray.down * ray.down);
        const Vec3 rec = from_camera_frame(q.pose, {range * ray.forward / n, range * ray.right / n, range * ray.down / n});
        CHECK(distance(rec, t.poses[i].position()) <= 1e-9 * std::max(1.0, range));
      }
    }
  }
}

TEST_CASE("on-trajectory forward view sees the route in an empty world") {
  WorldParams p;
  p.density = 0.0;
  const World w = generate_world(1, p);
  const CameraModel cam(deg2rad(90), 4.0 / 3.0, 1.2);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const ReferenceTrajectory t = sample_reference_trajectory(w, seed, cam);
    REQUIRE(t.size() >= 2);
    CHECK_FALSE(visible_set(oracle_guidance(w, cam, t.frame(1), t)).empty());
  }
}

TEST_CASE("perturbation") {
  const World w = World::empty(40, 40, 0.25);
  const CameraModel cam(kPi / 2.0, 1.0, 1.0);
  const Guidance clean = oracle_guidance(
      w, cam, Pose(2, 5, 1, 0),
      line_trajectory({{3, 5, 1}, {4, 5.2, 1}, {5, 4.5, 1}, {6, 5, 1}, {7, 5.5, 1}, {1, 5, 1}}, cam));

  Rng rng(1);
  CHECK(perturb_guidance(clean, NoiseModel{}, rng, false) == clean);
  CHECK(perturb_guidance(clean, NoiseModel{}, rng, true) == clean);

  NoiseModel flip;
  flip.flip_prob = 0.5;
  std::size_t flips = 0, total = 0;
  for (int i = 0; i < 20000; ++i) {
    const Guidance g = perturb_guidance(clean, flip, rng, false);
    for (std::size_t k = 0; k < g.size(); ++k) {
      flips += g[k].visible() != clean[k].visible() ? 1 : 0;
      ++total;
    }
  }
  REQUIRE(total >= 100000);
  CHECK(static_cast<double>(flips) / static_cast<double>(total) == doctest::Approx(0.5).epsilon(0.02));

  NoiseModel nd;
  nd.sigma_d = 0.3;
  nd.sigma_p = 0.4;
  for (int i = 0; i < 2000; ++i) {
    const Guidance g = perturb_guidance(clean, nd, rng, i % 2 == 0);
    double vmax = 0.0;
    for (const auto& tr : g) {
      CHECK(std::abs(tr.p.x) <= 1.0);
      CHECK(std::abs(tr.p.y) <= 1.0);
      CHECK(tr.d >= 0.0);
      CHECK(tr.d <= 1.0);
      if (tr.visible()) vmax = std::max(vmax, tr.d);
    }
    CHECK(vmax == 1.0);
  }

  Rng a(42), b(42);
  NoiseModel all{0.2, 0.2, 0.2, 2.0};
  CHECK(perturb_guidance(clean, all, a, true) == perturb_guidance(clean, all, b, true));

  CHECK_THROWS_AS((NoiseModel{0.0, 0.6, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NoiseModel{-0.1, 0.0, 0.0, 1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((NoiseModel{0.0, 0.0, 0.0, 0.5}.validate()), std::invalid_argument);
}

TEST_CASE("backward degradation scales the noise") {
  const World w = World::empty(40, 40, 0.25);
  const CameraModel cam(kPi / 2.0, 1.0, 1.0);
  const Guidance clean =
      oracle_guidance(w, cam, Pose(2, 5, 1, 0), line_trajectory({{3, 5, 1}, {4, 5, 1}, {6, 5, 1}}, cam));
  NoiseModel n{0.05, 0.1, 0.0, 4.0};
  Rng rng(3);
  double fwd = 0.0, bwd = 0.0;
  std::size_t flips_f = 0, flips_b = 0;
  for (int i = 0; i < 20000; ++i) {
    const Guidance f = perturb_guidance(clean, n, rng, false);
    const Guidance b = perturb_guidance(clean, n, rng, true);
    for (std::size_t k = 0; k < clean.size(); ++k) {
      fwd += std::abs(f[k].p.x - clean[k].p.x);
      bwd += std::abs(b[k].p.x - clean[k].p.x);
      flips_f += f[k].visible() != clean[k].visible();
      flips_b += b[k].visible() != clean[k].visible();
    }
  }
  CHECK(bwd / fwd == doctest::Approx(4.0).epsilon(0.05));
  // flip probability is capped at 0.5
  CHECK(static_cast<double>(flips_b) / 60000.0 == doctest::Approx(0.4).epsilon(0.05));
  CHECK(static_cast<double>(flips_f) / 60000.0 == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("visible set") {
  auto make = [](std::vector<double> logits) {
    Guidance g;
    for (double l : logits) g.push_back({{0, 0}, l, 0.5});
    return g;
  };
  CHECK(visible_set(make({-10, 10, 10})) == std::vector<std::size_t>{2, 3});
  CHECK(visible_set(make({-1, -2})).empty());
  CHECK(visible_set(make({0.0, 1e-300})) == std::vector<std::size_t>{2});
  CHECK(visible_set({}).empty());
}
