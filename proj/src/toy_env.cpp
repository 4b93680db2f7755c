#include "acer/env/toy_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace acer {

ToyEnv::ToyEnv(ToyConfig cfg) : cfg_(cfg) {
  if (cfg_.min_obstacles < 0 || cfg_.max_obstacles < cfg_.min_obstacles) {
    throw std::invalid_argument("ToyEnv: bad obstacle count range");
  }
}

std::vector<double> ToyEnv::reset(std::uint64_t seed) {
  Rng rng(Rng::split_mix(seed ^ 0x746f795f72657365ULL));
  const double e = cfg_.extent;
  const double margin = 0.1 * e;

  px_ = rng.uniform(margin, e - margin);
  py_ = rng.uniform(margin, e - margin);
  vx_ = vy_ = 0.0;

  bool placed = false;
  for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
    gx_ = rng.uniform(margin, e - margin);
    gy_ = rng.uniform(margin, e - margin);
    placed = std::hypot(gx_ - px_, gy_ - py_) >= cfg_.min_start_goal;
  }
  if (!placed) throw std::runtime_error("ToyEnv: could not place goal");

  const int count = cfg_.min_obstacles +
                    static_cast<int>(rng.uniform_below(
                        static_cast<std::uint64_t>(cfg_.max_obstacles - cfg_.min_obstacles + 1)));
  obstacles_.clear();
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      ToyObstacle obs;
      obs.radius = rng.uniform(cfg_.obstacle_radius_min, cfg_.obstacle_radius_max);
      obs.x = rng.uniform(0.0, e);
      obs.y = rng.uniform(0.0, e);
      const bool clear_start = std::hypot(obs.x - px_, obs.y - py_) > obs.radius + 0.15 * e;
      const bool clear_goal =
          std::hypot(obs.x - gx_, obs.y - gy_) > obs.radius + cfg_.goal_radius + 0.05 * e;
      if (clear_start && clear_goal) {
        obstacles_.push_back(obs);
        break;
      }
    }
  }

  steps_ = 0;
  episode_done_ = false;
  return observe();
}

double ToyEnv::range_along(double dx, double dy) const {
  double best = cfg_.ray_range;
  for (const auto& obs : obstacles_) {
    const double ox = obs.x - px_, oy = obs.y - py_;
    const double b = ox * dx + oy * dy;
    const double c = ox * ox + oy * oy - obs.radius * obs.radius;
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    const double t = b - std::sqrt(disc);
    if (t >= 0.0 && t < best) best = t;
    else if (t < 0.0 && b + std::sqrt(disc) > 0.0) return 0.0;  // inside
  }
  return best;
}

StepOutcome ToyEnv::step(std::span<const double> action) {
  if (episode_done_) throw std::logic_error("ToyEnv::step: episode already terminal");
  if (action.size() != 2) throw std::invalid_argument("ToyEnv::step: action must be 2-dim");

  const double prev_goal_dist = std::hypot(gx_ - px_, gy_ - py_);

  vx_ += std::clamp(action[0], -1.0, 1.0) * cfg_.accel * cfg_.dt;
  vy_ += std::clamp(action[1], -1.0, 1.0) * cfg_.accel * cfg_.dt;
  const double speed = std::hypot(vx_, vy_);
  if (speed > cfg_.v_max) {
    vx_ *= cfg_.v_max / speed;
    vy_ *= cfg_.v_max / speed;
  }
  px_ += vx_ * cfg_.dt;
  py_ += vy_ * cfg_.dt;
  // walls stop motion but are not lethal
  if (px_ < 0.0) { px_ = 0.0; vx_ = 0.0; }
  if (px_ > cfg_.extent) { px_ = cfg_.extent; vx_ = 0.0; }
  if (py_ < 0.0) { py_ = 0.0; vy_ = 0.0; }
  if (py_ > cfg_.extent) { py_ = cfg_.extent; vy_ = 0.0; }
  ++steps_;

  Terminal terminal = Terminal::running;
  double min_gap = cfg_.ray_range;
  for (const auto& obs : obstacles_) {
    const double gap = std::hypot(obs.x - px_, obs.y - py_) - obs.radius;
    min_gap = std::min(min_gap, gap);
    if (gap <= 0.0) terminal = Terminal::collision;
  }
  const double goal_dist = std::hypot(gx_ - px_, gy_ - py_);
  if (terminal == Terminal::running && goal_dist <= cfg_.goal_radius) {
    terminal = Terminal::success;
  }
  if (terminal == Terminal::running && steps_ >= cfg_.max_steps) {
    terminal = Terminal::timeout;
  }

  double reward;
  if (terminal == Terminal::success) {
    reward = cfg_.success_bonus;
  } else if (terminal == Terminal::collision) {
    reward = cfg_.collision_penalty;
  } else {
    const double progress = (prev_goal_dist - goal_dist) / (cfg_.v_max * cfg_.dt);
    const double proximity =
        cfg_.proximity_weight * std::max(0.0, 1.0 - std::max(min_gap, 0.0) / cfg_.proximity_band);
    reward = progress - proximity;
  }

  episode_done_ = terminal != Terminal::running;
  return StepOutcome{observe(), reward, terminal};
}

std::vector<double> ToyEnv::observe() const {
  std::vector<double> obs;
  obs.reserve(observation_dim());
  obs.push_back((gx_ - px_) / cfg_.extent);
  obs.push_back((gy_ - py_) / cfg_.extent);
  obs.push_back(vx_ / cfg_.v_max);
  obs.push_back(vy_ / cfg_.v_max);
  for (int i = 0; i < cfg_.rays; ++i) {
    const double a = 2.0 * M_PI * i / cfg_.rays;
    obs.push_back(range_along(std::cos(a), std::sin(a)) / cfg_.ray_range);
  }
  return obs;
}

std::string ToyEnv::trajectory_header() const { return "t,x,y,v_x,v_y,reward,outcome"; }

std::string ToyEnv::trajectory_row(int t, double reward, Terminal outcome) const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%s", t, px_, py_, vx_, vy_,
                reward, terminal_name(outcome));
  return buf;
}

}  // namespace acer
