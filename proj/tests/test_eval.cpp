#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "trajguide/eval.hpp"

using namespace trajguide;

namespace {

// mean of |N(0, sigma)| truncated to [0, max], by Simpson's rule
double simpson_truncated_mean(double sigma, double max) {
  const int n = 20000;
  const double h = max / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double pdf = std::exp(-0.5 * (x / sigma) * (x / sigma));
    num += w * x * pdf;
    den += w * pdf;
  }
  return num / den;
}

SuiteConfig single_suite(std::size_t trajectories, Task task, InitMode init) {
  SuiteConfig s;
  s.trajectories = trajectories;
  s.poses_per_trajectory = 1;
  s.tasks = {task};
  s.inits = {init};
  s.camera_modes = {CameraModeKind::Matched};
  return s;
}

std::vector<EpisodeResult> results_of(const std::vector<EpisodeOutcome>& outs) {
  std::vector<EpisodeResult> r;
  for (const auto& o : outs) r.push_back(o.result);
  return r;
}

}  // namespace

TEST_CASE("truncated half-normal scale matches numerical integration") {
  for (auto [mean, max] : {std::pair{20.0, 60.0}, {0.5, 1.5}, {0.5, 1.2}, {0.1, 10.0}, {0.59, 1.2}}) {
    const double sigma = truncated_half_normal_sigma(mean, max);
    CHECK(simpson_truncated_mean(sigma, max) == doctest::Approx(mean).epsilon(1e-6));
  }
  CHECK_THROWS_AS(truncated_half_normal_sigma(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncated_half_normal_sigma(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("cross camera mismatch statistics") {
  const CameraModel base(deg2rad(90), 4.0 / 3.0, 1.2);
  const CrossCameraParams params;
  double fov_sum = 0.0, fov_max = 0.0, h_sum = 0.0, h_max = 0.0;
  std::size_t fov_pos = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const CameraModel c = sample_cross_camera(base, 1000 + i, params);
    const double dfov = rad2deg(c.fov_h() - base.fov_h());
    const double dh = std::abs(c.mount_height() - base.mount_height());
    fov_sum += std::abs(dfov);
    fov_max = std::max(fov_max, std::abs(dfov));
    fov_pos += dfov > 0 ? 1 : 0;
    h_sum += dh;
    h_max = std::max(h_max, dh);
    CHECK(c.mount_height() >= 0.0);
  }
  CHECK(fov_sum / n == doctest::Approx(20.0).epsilon(0.05));
  CHECK(fov_max <= 60.0 + 1e-9);
  CHECK(h_sum / n == doctest::Approx(0.5).epsilon(0.05));
  CHECK(h_max <= 1.2 + 1e-9);
  CHECK(static_cast<double>(fov_pos) / n == doctest::Approx(0.5).epsilon(0.05));
  CHECK(sample_cross_camera(base, 7, params) == sample_cross_camera(base, 7, params));
}

TEST_CASE("sweep camera offsets exactly one parameter") {
  const CameraModel base(deg2rad(90), 4.0 / 3.0, 1.2);
  CHECK(sweep_camera(base, SweepParameter::Fov, 0.0, 3) == base);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const CameraModel f = sweep_camera(base, SweepParameter::Fov, 10.0, seed);
    CHECK(std::abs(rad2deg(f.fov_h() - base.fov_h())) == doctest::Approx(10.0));
    CHECK(f.aspect() == base.aspect());
    CHECK(f.mount_height() == base.mount_height());
    const CameraModel h = sweep_camera(base, SweepParameter::Height, 0.6, seed);
    CHECK(std::abs(h.mount_height() - base.mount_height()) == doctest::Approx(0.6));
    CHECK(h.fov_h() == base.fov_h());
  }
  CHECK(agent_camera_for(base, CameraMode{}, {}) == base);
}

TEST_CASE("goal frames and enum names") {
  CHECK(goal_frame(Task::ToEnd, 12, 0) == 12);
  CHECK(goal_frame(Task::ToStart, 12, 0) == 1);
  CHECK(goal_frame(Task::AnyPoint, 12, 5) == 5);
  CHECK_THROWS_AS(goal_frame(Task::AnyPoint, 12, 0), std::invalid_argument);
  CHECK_THROWS_AS(goal_frame(Task::AnyPoint, 12, 13), std::invalid_argument);
  for (Task t : {Task::ToEnd, Task::ToStart, Task::AnyPoint}) CHECK(parse_task(to_string(t)) == t);
  for (ControllerKind c : {ControllerKind::Yaw, ControllerKind::YawAvoid, ControllerKind::Mppi}) {
    CHECK(parse_controller(to_string(c)) == c);
  }
  CHECK(parse_init("off") == InitMode::Off);
  CHECK_THROWS_AS(parse_task("sideways"), std::invalid_argument);
}

TEST_CASE("success rate and spl") {
  auto r = [](bool success, double p, double l) {
    EpisodeResult e;
    e.success = success;
    e.path_length = p;
    e.geodesic = l;
    return e;
  };
  CHECK(spl({r(true, 10, 5)}) == doctest::Approx(0.5));
  CHECK(spl({r(true, 4, 5)}) == doctest::Approx(1.0));
  CHECK(spl({r(false, 4, 5)}) == 0.0);
  CHECK(spl({r(true, 0, 0)}) == 1.0);
  CHECK(spl({r(true, 10, 5), r(false, 1, 1)}) == doctest::Approx(0.25));
  EpisodeResult bad = r(true, 1, 1);
  bad.valid = false;
  CHECK(success_rate({bad, r(true, 1, 1), r(false, 1, 1)}) == doctest::Approx(0.5));
  CHECK(success_rate({}) == 0.0);
  CHECK_THROWS_AS(spl({}), std::invalid_argument);
}

TEST_CASE("suite construction") {
  const Scenario sc;
  const auto one = build_suite(single_suite(1, Task::ToEnd, InitMode::On), sc);
  CHECK(one.size() == 1);
  SuiteConfig two = single_suite(1, Task::ToEnd, InitMode::On);
  two.camera_modes = {CameraModeKind::Matched, CameraModeKind::Cross};
  CHECK(build_suite(two, sc).size() == 2);

  const auto full = build_suite(SuiteConfig{}, sc);
  CHECK(full.size() == 1000);
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].id == i);
    CHECK_FALSE((full[i].task == Task::AnyPoint && full[i].init == InitMode::On));
  }
  CHECK(build_suite(SuiteConfig{}, sc) == full);
}

TEST_CASE("episode boundary cases") {
  const Scenario sc;
  auto cfgs = build_suite(single_suite(3, Task::ToEnd, InitMode::Off), sc);
  for (EpisodeConfig cfg : cfgs) {
    cfg.success_radius = 1e6;
    const EpisodeResult r = run_episode(cfg, sc);
    REQUIRE(r.valid);
    CHECK(r.success);
    CHECK(r.steps == 0);
    CHECK(r.path_length == 0.0);
  }
  for (EpisodeConfig cfg : cfgs) {
    cfg.step_cap = 1;
    std::vector<TraceStep> trace;
    const EpisodeResult r = run_episode(cfg, sc, &trace);
    REQUIRE(r.valid);
    CHECK(r.steps == 1);
    CHECK(trace.size() == 1);
    CHECK_FALSE(r.success);
  }
  EpisodeConfig zero = cfgs[0];
  zero.step_cap = 0;
  CHECK_THROWS_AS(run_episode(zero, sc), std::invalid_argument);

  // a crowded small world cannot host a long trajectory
  Scenario cramped;
  cramped.world.width = 10;
  cramped.world.height = 10;
  const EpisodeResult r = run_episode(cfgs[0], cramped);
  CHECK_FALSE(r.valid);
  CHECK_FALSE(r.error.empty());
}

TEST_CASE("episodes are deterministic and independent of worker count") {
  const Scenario sc;
  SuiteConfig s = SuiteConfig{};
  s.trajectories = 6;
  s.noise = NoiseModel{0.05, 0.05, 0.1, 2.0};
  const auto cfgs = build_suite(s, sc);
  const auto a = run_suite(cfgs, sc, 1, true);
  const auto b = run_suite(cfgs, sc, 3, true);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].result == b[i].result);
    CHECK(a[i].trace.size() == b[i].trace.size());
    CHECK(a[i].config == cfgs[i]);
  }
  const auto r = results_of(a);
  CHECK(spl(r) <= success_rate(r) + 1e-12);
  for (const auto& o : a) {
    if (!o.result.valid) continue;
    CHECK(o.result.steps <= o.config.step_cap);
    CHECK(o.result.min_distance_to_goal <= o.result.final_distance_to_goal + 1e-12);
    if (o.result.success) CHECK(o.result.final_distance_to_goal <= o.config.success_radius);
  }
}

TEST_CASE("a larger step cap never turns a success into a failure") {
  const Scenario sc;
  const auto cfgs = build_suite(single_suite(20, Task::ToEnd, InitMode::On), sc);
  for (const EpisodeConfig& base : cfgs) {
    EpisodeConfig c = base;
    c.step_cap = 150;
    const EpisodeResult small = run_episode(c, sc);
    c.step_cap = 1000;
    const EpisodeResult large = run_episode(c, sc);
    if (small.success) {
      CHECK(large.success);
      CHECK(large.steps == small.steps);
    }
  }
}

TEST_CASE("mismatch sweep") {
  const Scenario sc;
  const auto base = build_suite(single_suite(10, Task::ToEnd, InitMode::On), sc);
  const std::vector<double> mags{0.0, 0.3, 0.6, 0.9, 1.2};
  const SweepResult sw = sweep_mismatch(SweepParameter::Height, mags, base, sc, 2);
  REQUIRE(sw.buckets.size() == 5);
  CHECK(sw.outcomes.size() == 50);
  for (std::size_t b = 0; b < 5; ++b) CHECK(sw.buckets[b].magnitude == mags[b]);

  const auto matched = run_suite(base, sc, 1);
  CHECK(sw.buckets[0].success_rate == success_rate(results_of(matched)));
  for (std::size_t i = 0; i < base.size(); ++i) {
    EpisodeResult a = sw.outcomes[i].result;
    a.id = matched[i].result.id;
    CHECK(a == matched[i].result);
  }
  CHECK_THROWS_AS(sweep_mismatch(SweepParameter::Height, {2.0}, base, sc, 1), std::invalid_argument);
}

namespace {

// Paired outcomes at fixed seeds for noise levels of one field, 200 episodes each.
std::vector<std::vector<bool>> noise_ladder(const std::vector<NoiseModel>& levels) {
  const Scenario sc;
  SuiteConfig s = single_suite(200, Task::ToEnd, InitMode::On);
  std::vector<std::vector<bool>> out;
  for (const NoiseModel& n : levels) {
    s.noise = n;
    std::vector<bool> ok;
    for (const auto& o : run_suite(build_suite(s, sc), sc, 1)) ok.push_back(o.result.valid && o.result.success);
    out.push_back(ok);
  }
  return out;
}

// One-sided exact McNemar p-value for "the noisier arm succeeds more often".
double improvement_p_value(const std::vector<bool>& less_noise, const std::vector<bool>& more_noise) {
  std::size_t gained = 0, lost = 0;
  for (std::size_t i = 0; i < less_noise.size(); ++i) {
    gained += !less_noise[i] && more_noise[i];
    lost += less_noise[i] && !more_noise[i];
  }
  const std::size_t n = gained + lost;
  double p = 0.0;
  for (std::size_t k = gained; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  MESSAGE("gained " << gained << " lost " << lost << " p " << p);
  return p;
}

void check_non_increasing(const std::vector<NoiseModel>& levels) {
  const auto ladder = noise_ladder(levels);
  for (std::size_t i = 1; i < ladder.size(); ++i) CHECK(improvement_p_value(ladder[i - 1], ladder[i]) >= 0.05);
}

}  // namespace

TEST_CASE("success is non-increasing in flip probability") {
  check_non_increasing({{}, {0.0, 0.1, 0.0, 1.0}, {0.0, 0.25, 0.0, 1.0}, {0.0, 0.45, 0.0, 1.0}});
}

// Known violations: a little noise on p or d breaks deterministic corner
// deadlocks of the reactive controller, so SR rises before it falls.
TEST_CASE("success is non-increasing in sigma_p" * doctest::should_fail()) {
  check_non_increasing({{}, {0.2, 0.0, 0.0, 1.0}, {0.6, 0.0, 0.0, 1.0}});
}

TEST_CASE("success is non-increasing in sigma_d" * doctest::should_fail()) {
  check_non_increasing({{}, {0.0, 0.0, 0.3, 1.0}, {0.0, 0.0, 1.0, 1.0}});
}
