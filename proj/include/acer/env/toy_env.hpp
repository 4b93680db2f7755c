#pragma once

#include "acer/env/env.hpp"
#include "acer/rng.hpp"

namespace acer {

struct ToyConfig {
  double extent = 1.0;        // square side
  double dt = 0.05;
  double accel = 1.0;         // action scale, units/s^2
  double v_max = 0.25;
  double goal_radius = 0.1;
  double min_start_goal = 0.35;
  int min_obstacles = 1;
  int max_obstacles = 3;
  double obstacle_radius_min = 0.05;
  double obstacle_radius_max = 0.08;
  int rays = 8;
  double ray_range = 0.3;
  int max_steps = 200;
  double success_bonus = 10.0;
  double collision_penalty = -10.0;
  double proximity_weight = 0.5;
  double proximity_band = 0.15;  // penalty ramps inside this gap to a surface
};

struct ToyObstacle {
  double x = 0.0, y = 0.0, radius = 0.0;
};

/**
 * 2D point-mass reach task in a unit square: accelerate toward a goal
 * disc while avoiding 1-3 static circular obstacles. Dense reward is
 * progress toward the goal minus an obstacle-proximity penalty; hitting
 * an obstacle fails the episode, walls just stop motion. Observation is
 * [dgoal(2), v(2), 8 range-finder distances], all normalized.
 *
 * Serves as the fast desk-scale stand-in for the full 3D arena.
 */
class ToyEnv final : public Env {
 public:
  explicit ToyEnv(ToyConfig cfg = {});

  int observation_dim() const override { return 4 + cfg_.rays; }
  int action_dim() const override { return 2; }
  const char* name() const override { return "toy"; }

  std::vector<double> reset(std::uint64_t seed) override;
  StepOutcome step(std::span<const double> action) override;

  std::string trajectory_header() const override;
  std::string trajectory_row(int t, double reward, Terminal outcome) const override;

  const ToyConfig& config() const { return cfg_; }
  std::span<const ToyObstacle> obstacles() const { return obstacles_; }
  double px() const { return px_; }
  double py() const { return py_; }
  double goal_x() const { return gx_; }
  double goal_y() const { return gy_; }
  int steps_taken() const { return steps_; }

 private:
  std::vector<double> observe() const;
  double range_along(double dx, double dy) const;

  ToyConfig cfg_;
  double px_ = 0.5, py_ = 0.5;
  double vx_ = 0.0, vy_ = 0.0;
  double gx_ = 0.5, gy_ = 0.5;
  std::vector<ToyObstacle> obstacles_;
  int steps_ = 0;
  bool episode_done_ = true;
};

}  // namespace acer
