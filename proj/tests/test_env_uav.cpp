#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "acer/env/uav_env.hpp"

using namespace acer;

namespace {

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double dist3(const Vec3& a, const Vec3& b) {
  return norm3({a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}

ArenaConfig small_arena() {
  ArenaConfig arena;
  arena.extents = {12e3, 9e3, 1e3};
  arena.target_radius = 500.0;
  arena.n_obstacles = 3;
  arena.obstacle_speed = 5.0;
  arena.obstacle_radius_min = 400.0;
  arena.obstacle_radius_max = 800.0;
  arena.min_start_distance = 5e3;
  arena.radar_range = 2e3;
  arena.max_steps = 300;
  return arena;
}

// fine ray march at 0.1 m; independent of the analytic intersection
double ray_march(const Vec3& origin, const Vec3& dir, std::span<const Obstacle> obstacles,
                 double range) {
  const double step = 0.1;
  for (double t = 0.0; t <= range; t += step) {
    const Vec3 p{origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]};
    if (p[2] <= 0.0) return t;
    for (const auto& obs : obstacles) {
      const double dx = p[0] - obs.cx, dy = p[1] - obs.cy;
      if (std::sqrt(dx * dx + dy * dy + p[2] * p[2]) <= obs.radius) return t;
    }
  }
  return range;
}

}  // namespace

TEST_CASE("dynamics: unit vertical load factor cancels gravity exactly") {
  ArenaConfig cfg = small_arena();
  UavPhysical uav;
  uav.position = {1000, 1000, 500};
  uav.velocity = {50, 20, 10};
  attitude_from_velocity(uav);
  const UavPhysical before = uav;
  Vec3 ref_pos = uav.position;
  for (int step = 0; step < 1000; ++step) {
    uav = step_dynamics(uav, {0, 0, 1}, cfg);
    for (int i = 0; i < 3; ++i) ref_pos[i] += before.velocity[i] * cfg.dt;
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(uav.velocity[i] == before.velocity[i]);  // bit-identical
    CHECK(uav.position[i] == ref_pos[i]);          // exact straight line
  }
  CHECK(uav.pitch == before.pitch);
  CHECK(uav.yaw == before.yaw);
}

TEST_CASE("dynamics: attitude angles from the velocity direction") {
  ArenaConfig cfg = small_arena();

  UavPhysical uav;
  uav.velocity = {70, 0, 70};  // horizontal speed equals vertical speed
  attitude_from_velocity(uav);
  CHECK(uav.pitch == doctest::Approx(M_PI / 4).epsilon(1e-12));
  CHECK(uav.yaw == doctest::Approx(0.0));

  uav.velocity = {50, 50, 0};
  attitude_from_velocity(uav);
  CHECK(uav.yaw == doctest::Approx(M_PI / 4).epsilon(1e-12));
  CHECK(uav.pitch == doctest::Approx(0.0));

  // attitude recomputed after every dynamics step
  uav.position = {5000, 5000, 500};
  uav.velocity = {60, -30, 5};
  attitude_from_velocity(uav);
  Rng rng(3);
  for (int step = 0; step < 200; ++step) {
    const Vec3 n{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    uav = step_dynamics(uav, n, cfg);
    const double hspeed = std::hypot(uav.velocity[0], uav.velocity[1]);
    CHECK(uav.pitch == std::atan2(uav.velocity[2], hspeed));
    CHECK(uav.yaw == std::atan2(uav.velocity[1], uav.velocity[0]));
    CHECK(uav.pitch >= -M_PI / 2);
    CHECK(uav.pitch <= M_PI / 2);
    CHECK(uav.yaw > -M_PI);
    CHECK(uav.yaw <= M_PI);
  }
}

TEST_CASE("dynamics: free fall accelerates straight down before the clamp") {
  ArenaConfig cfg = small_arena();
  cfg.v_min = 1.0;  // keep the clamp out of the way
  UavPhysical uav;
  uav.position = {1000, 1000, 900};
  uav.velocity = {0, 0, 0};
  const auto next = step_dynamics(uav, {0, 0, 0}, cfg);
  CHECK(next.velocity[0] == 0.0);
  CHECK(next.velocity[1] == 0.0);
  CHECK(next.velocity[2] == doctest::Approx(-9.8).epsilon(1e-12));
}

TEST_CASE("dynamics: speed stays inside the band under random actions") {
  ArenaConfig cfg = small_arena();
  UavPhysical uav;
  uav.position = {5000, 5000, 500};
  uav.velocity = {66.5, 0, 0};
  attitude_from_velocity(uav);
  Rng rng(7);
  for (int step = 0; step < 100000; ++step) {
    const Vec3 n{rng.uniform(-1, 1) * cfg.n_max, rng.uniform(-1, 1) * cfg.n_max,
                 rng.uniform(-1, 1) * cfg.n_max};
    uav = step_dynamics(uav, n, cfg);
    const double speed = norm3(uav.velocity);
    CHECK(speed <= cfg.v_max * (1 + 1e-12));
    CHECK(speed >= cfg.v_min * (1 - 1e-12));
  }
}

TEST_CASE("radar: clear sky returns full range on every ray") {
  const auto dirs = radar_directions(0.3, -0.1, 32);
  CHECK(dirs.size() == 32);
  const Vec3 origin{5000, 5000, 5000};  // far above ground
  for (const auto& d : dirs) {
    CHECK(ray_distance(origin, d, {}, 2000.0) == 2000.0);
  }
}

TEST_CASE("radar: ray aimed at a sphere center reads L - R") {
  Obstacle obs;
  obs.cx = 3000;
  obs.cy = 0;
  obs.radius = 500;
  const Vec3 origin{0, 0, 0.0};  // level with the dome center
  const Vec3 dir{1, 0, 0};
  const double d = ray_distance(origin, dir, std::vector<Obstacle>{obs}, 5000.0);
  CHECK(d == doctest::Approx(3000.0 - 500.0).epsilon(1e-9));
}

TEST_CASE("radar: ground plane caps downward rays") {
  const Vec3 origin{1000, 1000, 100};
  const Vec3 dir{0, 0, -1};
  CHECK(ray_distance(origin, dir, {}, 5000.0) == doctest::Approx(100.0));
  const Vec3 diag{std::sqrt(0.5), 0, -std::sqrt(0.5)};
  CHECK(ray_distance(origin, diag, {}, 5000.0) == doctest::Approx(100.0 * std::sqrt(2.0)));
}

TEST_CASE("radar: analytic distances match the 0.1 m ray-march oracle") {
  Rng rng(11);
  int checked = 0;
  for (int scene = 0; scene < 100; ++scene) {
    std::vector<Obstacle> obstacles;
    const int n = 1 + rng.uniform_below(4);
    for (int i = 0; i < n; ++i) {
      Obstacle obs;
      obs.cx = rng.uniform(0, 8000);
      obs.cy = rng.uniform(0, 8000);
      obs.radius = rng.uniform(300, 900);
      obstacles.push_back(obs);
    }
    const Vec3 origin{rng.uniform(0, 8000), rng.uniform(0, 8000), rng.uniform(50, 900)};
    const auto dirs = radar_directions(rng.uniform(-M_PI, M_PI), rng.uniform(-0.5, 0.5), 32);
    for (int k = 0; k < 4; ++k) {
      const auto& d = dirs[rng.uniform_below(dirs.size())];
      const double analytic = ray_distance(origin, d, obstacles, 2000.0);
      const double marched = ray_march(origin, d, obstacles, 2000.0);
      CHECK(std::abs(analytic - marched) <= 1.0);
      ++checked;
    }
  }
  CHECK(checked == 400);
}

TEST_CASE("reward: boundary values of the shaping terms") {
  UavEnv env(small_arena(), RewardConfig{});
  env.reset(5);

  UavPhysical uav;
  uav.position = {6000, 4500, 1000};  // at ceiling -> height term 0
  uav.velocity = {103, 0, 0};         // at v_max -> velocity term 1
  attitude_from_velocity(uav);

  const std::vector<double> clear_radar(32, env.arena().radar_range);
  const auto terms = env.shaping_terms(uav, uav, clear_radar);
  CHECK(terms.velocity == doctest::Approx(1.0));
  CHECK(terms.height == doctest::Approx(0.0));
  CHECK(terms.danger == doctest::Approx(1.0));   // all rays clear
  CHECK(terms.position == doctest::Approx(0.0)); // no closure when prev == cur
}

TEST_CASE("reward: heading straight at the target zeroes the angle term") {
  UavEnv env(small_arena(), RewardConfig{});
  env.reset(6);
  const Vec3 target = env.target();

  UavPhysical uav;
  uav.position = {target[0] - 3000, target[1], 600};
  // velocity pointing exactly at the target
  const Vec3 to_target{target[0] - uav.position[0], target[1] - uav.position[1],
                       target[2] - uav.position[2]};
  const double len = norm3(to_target);
  uav.velocity = {66.5 * to_target[0] / len, 66.5 * to_target[1] / len,
                  66.5 * to_target[2] / len};
  attitude_from_velocity(uav);

  CHECK(angle_to_target_yaw(uav, target) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(angle_to_target_pitch(uav, target) == doctest::Approx(0.0).epsilon(1e-9));
  const auto terms = env.shaping_terms(uav, uav, std::vector<double>(32, 2000.0));
  CHECK(terms.angle == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("reward: non-terminal reward equals the weighted sum of terms") {
  UavEnv env(small_arena(), RewardConfig{});
  env.reset(7);
  Rng rng(8);
  std::vector<double> obs;
  for (int step = 0; step < 50; ++step) {
    const UavPhysical prev = env.uav();
    const std::vector<double> action{rng.uniform(-1, 1), rng.uniform(-1, 1),
                                     rng.uniform(-1, 1)};
    const auto out = env.step(action);
    if (out.terminal != Terminal::running) break;
    const auto terms = env.shaping_terms(prev, env.uav(), env.last_radar());
    const RewardConfig& rc = env.reward_config();
    const double expect = rc.lambda_position * terms.position + rc.lambda_angle * terms.angle +
                          rc.lambda_height * terms.height + rc.lambda_danger * terms.danger +
                          rc.lambda_velocity * terms.velocity;
    CHECK(out.reward == doctest::Approx(expect).epsilon(1e-12));
    CHECK(out.reward == doctest::Approx(terms.total).epsilon(1e-12));
  }
}

TEST_CASE("reset: deterministic for a fixed seed") {
  UavEnv a(small_arena(), RewardConfig{});
  UavEnv b(small_arena(), RewardConfig{});
  const auto obs_a = a.reset(1234);
  const auto obs_b = b.reset(1234);
  CHECK(obs_a == obs_b);
  const auto obs_c = a.reset(1235);
  CHECK(obs_a != obs_c);
}

TEST_CASE("reset: start distance and obstacle clearance hold over many seeds") {
  UavEnv env(small_arena(), RewardConfig{});
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    env.reset(seed);
    CHECK(dist3(env.uav().position, env.target()) > env.arena().min_start_distance);
    CHECK(env.uav().position[2] == env.arena().extents[2]);  // starts at the ceiling
    const double speed = norm3(env.uav().velocity);
    CHECK(speed == doctest::Approx(env.arena().cruise_speed));
    for (const auto& obs : env.obstacles()) {
      CHECK(dist3(env.uav().position, {obs.cx, obs.cy, 0.0}) > obs.radius);
      CHECK(dist3(env.target(), {obs.cx, obs.cy, 0.0}) >
            obs.radius + env.arena().target_radius);
    }
  }
}

TEST_CASE("step: entering the target hemisphere succeeds with reward 100") {
  UavEnv env(small_arena(), RewardConfig{});
  env.reset(42);
  UavPhysical uav;
  // directly above the target center, well inside the 500 m dome after
  // one step no matter what the action does
  uav.position = {env.target()[0], env.target()[1], 300.0};
  uav.velocity = {66.5, 0, 0};
  env.place_uav(uav);
  const auto out = env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max});
  CHECK(out.terminal == Terminal::success);
  CHECK(out.reward == 100.0);
  CHECK_THROWS_AS((void)env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max}), std::logic_error);
}

TEST_CASE("step: leaving the arena fails with reward -200") {
  UavEnv env(small_arena(), RewardConfig{});
  env.reset(43);
  UavPhysical uav;
  uav.position = {env.arena().extents[0] - 10.0, 4500.0, 500.0};
  uav.velocity = {66.5, 0, 0};
  env.place_uav(uav);
  const auto out = env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max});  // keeps flying +x
  CHECK(out.terminal == Terminal::out_of_range);
  CHECK(out.reward == -200.0);
}

TEST_CASE("step: flying into an obstacle dome is a collision") {
  ArenaConfig arena = small_arena();
  arena.n_obstacles = 1;
  UavEnv env(arena, RewardConfig{});
  env.reset(44);
  const auto& obs = env.obstacles()[0];
  UavPhysical uav;
  uav.position = {obs.cx, obs.cy, obs.radius - 200.0};  // already inside the dome
  uav.velocity = {66.5, 0, 0};
  env.place_uav(uav);
  const auto out = env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max});
  CHECK(out.terminal == Terminal::collision);
  CHECK(out.reward == -200.0);
}

TEST_CASE("step: timeout after max_steps without a failure penalty") {
  ArenaConfig arena = small_arena();
  arena.max_steps = 5;
  arena.n_obstacles = 0;
  UavEnv env(arena, RewardConfig{});
  env.reset(45);
  UavPhysical uav;
  uav.position = {6000, 4500, 500};
  uav.velocity = {0, 66.5, 0};
  env.place_uav(uav);
  StepOutcome out;
  for (int t = 0; t < 5; ++t) out = env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max});
  CHECK(out.terminal == Terminal::timeout);
  CHECK(out.reward != -200.0);  // shaping reward, no failure bonus
}

TEST_CASE("step: obstacle reflection preserves speed") {
  ArenaConfig arena = small_arena();
  arena.n_obstacles = 4;
  arena.obstacle_speed = 250.0;  // fast enough to bounce within the test
  UavEnv env(arena, RewardConfig{});
  env.reset(46);
  std::vector<double> speeds;
  for (const auto& obs : env.obstacles()) speeds.push_back(std::hypot(obs.vx, obs.vy));
  for (int t = 0; t < 60 && env.steps_taken() == t; ++t) {
    const auto out = env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max});
    for (std::size_t i = 0; i < env.obstacles().size(); ++i) {
      const auto& obs = env.obstacles()[i];
      CHECK(std::hypot(obs.vx, obs.vy) == doctest::Approx(speeds[i]).epsilon(1e-12));
      CHECK(obs.cx >= 0.0);
      CHECK(obs.cx <= arena.extents[0]);
      CHECK(obs.cy >= 0.0);
      CHECK(obs.cy <= arena.extents[1]);
    }
    if (out.terminal != Terminal::running) break;
  }
}

TEST_CASE("observations stay normalized across random play") {
  UavEnv env(small_arena(), RewardConfig{});
  Rng rng(47);
  int checked = 0;
  for (std::uint64_t seed = 100; checked < 100000; ++seed) {
    auto obs = env.reset(seed);
    for (int t = 0; t < 300; ++t) {
      CHECK(obs.size() == static_cast<std::size_t>(env.observation_dim()));
      for (double v : obs) {
        CHECK(v >= -1.5);
        CHECK(v <= 1.5);
      }
      checked += static_cast<int>(obs.size());
      const auto out = env.step(
          std::vector<double>{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      obs = out.observation;
      if (out.terminal != Terminal::running) break;
    }
  }
}

TEST_CASE("trajectory rows carry the documented columns") {
  UavEnv env(small_arena(), RewardConfig{});
  env.reset(48);
  UavPhysical uav;
  uav.position = {6000, 4500, 500};
  uav.velocity = {66.5, 0, 0};
  env.place_uav(uav);
  CHECK(env.trajectory_header() == "t,p_x,p_y,p_z,yaw,pitch,speed,reward,outcome");
  const auto out = env.step(std::vector<double>{0, 0, 1.0 / env.arena().n_max});
  const auto row = env.trajectory_row(1, out.reward, out.terminal);
  CHECK(row.find("running") != std::string::npos);
  CHECK(std::count(row.begin(), row.end(), ',') == 8);
}
