#include "acer/env/uav_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace acer {

namespace {

double norm3(const Vec3& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

double dist3(const Vec3& a, const Vec3& b) {
  return norm3({a[0] - b[0], a[1] - b[1], a[2] - b[2]});
}

double wrap_pi(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

const char* terminal_name(Terminal t) {
  switch (t) {
    case Terminal::running: return "running";
    case Terminal::success: return "success";
    case Terminal::collision: return "collision";
    case Terminal::out_of_range: return "out_of_range";
    case Terminal::timeout: return "timeout";
  }
  return "unknown";
}

void ArenaConfig::validate() const {
  if (extents[0] <= 0 || extents[1] <= 0 || extents[2] <= 0) {
    throw std::invalid_argument("ArenaConfig: extents must be positive");
  }
  const double diag = norm3(extents);
  if (min_start_distance >= diag) {
    throw std::invalid_argument("ArenaConfig: min_start_distance exceeds arena diagonal");
  }
  if (radar_rays % 4 != 0 || radar_rays <= 0) {
    throw std::invalid_argument("ArenaConfig: radar_rays must be a positive multiple of 4");
  }
  if (!(v_min > 0.0 && v_min < v_max)) {
    throw std::invalid_argument("ArenaConfig: need 0 < v_min < v_max");
  }
  if (cruise_speed < v_min || cruise_speed > v_max) {
    throw std::invalid_argument("ArenaConfig: cruise_speed outside speed band");
  }
}

void RewardConfig::validate() const {
  if (lambda_position < 0 || lambda_angle < 0 || lambda_height < 0 || lambda_danger < 0 ||
      lambda_velocity < 0) {
    throw std::invalid_argument("RewardConfig: lambdas must be >= 0");
  }
}

void attitude_from_velocity(UavPhysical& uav) {
  const double hspeed = std::hypot(uav.velocity[0], uav.velocity[1]);
  uav.pitch = std::atan2(uav.velocity[2], hspeed);
  double yaw = std::atan2(uav.velocity[1], uav.velocity[0]);
  if (yaw <= -M_PI) yaw = M_PI;
  uav.yaw = yaw;
}

UavPhysical step_dynamics(const UavPhysical& uav, const Vec3& load_factor,
                          const ArenaConfig& cfg) {
  UavPhysical next = uav;
  const Vec3 accel{load_factor[0] * cfg.gravity, load_factor[1] * cfg.gravity,
                   load_factor[2] * cfg.gravity - cfg.gravity};
  for (int i = 0; i < 3; ++i) next.velocity[i] += accel[i] * cfg.dt;

  const double speed = norm3(next.velocity);
  if (speed > cfg.v_max) {
    const double s = cfg.v_max / speed;
    for (auto& v : next.velocity) v *= s;
  } else if (speed < cfg.v_min) {
    if (speed > 1e-12) {
      const double s = cfg.v_min / speed;
      for (auto& v : next.velocity) v *= s;
    } else {
      // degenerate full stop: keep the previous heading at minimum speed
      const double prev_speed = norm3(uav.velocity);
      for (int i = 0; i < 3; ++i) {
        next.velocity[i] = prev_speed > 1e-12 ? uav.velocity[i] / prev_speed * cfg.v_min : 0.0;
      }
      if (prev_speed <= 1e-12) next.velocity[0] = cfg.v_min;
    }
  }

  for (int i = 0; i < 3; ++i) next.position[i] += next.velocity[i] * cfg.dt;
  attitude_from_velocity(next);
  return next;
}

std::vector<Vec3> radar_directions(double yaw, double pitch, int n_rays) {
  const int n_azimuth = n_rays / 4;
  const double az_lo = -M_PI / 3.0, az_hi = M_PI / 3.0;
  static constexpr double kElevationsDeg[4] = {-30.0, -15.0, 0.0, 10.0};

  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);

  std::vector<Vec3> dirs;
  dirs.reserve(n_rays);
  for (double elev_deg : kElevationsDeg) {
    const double e = elev_deg * M_PI / 180.0;
    for (int k = 0; k < n_azimuth; ++k) {
      const double a = az_lo + (az_hi - az_lo) * k / (n_azimuth - 1);
      const Vec3 body{std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e)};
      // pitch about body-y, then yaw about z
      const Vec3 pitched{body[0] * cp - body[2] * sp, body[1], body[0] * sp + body[2] * cp};
      dirs.push_back(Vec3{pitched[0] * cy - pitched[1] * sy,
                          pitched[0] * sy + pitched[1] * cy, pitched[2]});
    }
  }
  return dirs;
}

double ray_distance(const Vec3& origin, const Vec3& direction,
                    std::span<const Obstacle> obstacles, double range) {
  double best = range;

  if (direction[2] < 0.0 && origin[2] > 0.0) {
    const double t = -origin[2] / direction[2];
    if (t >= 0.0 && t < best) best = t;
  }

  for (const auto& obs : obstacles) {
    const Vec3 oc{origin[0] - obs.cx, origin[1] - obs.cy, origin[2]};
    const double b = oc[0] * direction[0] + oc[1] * direction[1] + oc[2] * direction[2];
    const double c = oc[0] * oc[0] + oc[1] * oc[1] + oc[2] * oc[2] - obs.radius * obs.radius;
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    const double sqrt_disc = std::sqrt(disc);
    const double t_near = -b - sqrt_disc;
    const double t_far = -b + sqrt_disc;
    if (t_far < 0.0) continue;
    if (t_near < 0.0) {
      // ray origin inside the sphere
      if (origin[2] >= 0.0 && c < 0.0) return 0.0;
      continue;
    }
    const double hit_z = origin[2] + t_near * direction[2];
    // below-ground intersections are occluded by the ground plane anyway
    if (hit_z >= 0.0 && t_near < best) best = t_near;
  }
  return best;
}

double angle_to_target_yaw(const UavPhysical& uav, const Vec3& target) {
  const double to_target = std::atan2(target[1] - uav.position[1], target[0] - uav.position[0]);
  return std::abs(wrap_pi(to_target - uav.yaw));
}

double angle_to_target_pitch(const UavPhysical& uav, const Vec3& target) {
  const double hdist = std::hypot(target[0] - uav.position[0], target[1] - uav.position[1]);
  const double to_target = std::atan2(target[2] - uav.position[2], hdist);
  return std::abs(to_target - uav.pitch);
}

UavEnv::UavEnv(ArenaConfig arena, RewardConfig reward)
    : arena_(arena), reward_(reward) {
  arena_.validate();
  reward_.validate();
  radar_.assign(arena_.radar_rays, arena_.radar_range);
}

std::vector<double> UavEnv::reset(std::uint64_t seed) {
  Rng rng(Rng::split_mix(seed ^ 0x7541767265736574ULL));

  uav_ = UavPhysical{};
  uav_.position = {rng.uniform(0.0, arena_.extents[0]), rng.uniform(0.0, arena_.extents[1]),
                   arena_.extents[2]};
  const double heading = rng.uniform(-M_PI, M_PI);
  uav_.velocity = {arena_.cruise_speed * std::cos(heading),
                   arena_.cruise_speed * std::sin(heading), 0.0};
  attitude_from_velocity(uav_);

  bool placed = false;
  for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
    target_ = {rng.uniform(0.0, arena_.extents[0]), rng.uniform(0.0, arena_.extents[1]), 0.0};
    placed = dist3(target_, uav_.position) > arena_.min_start_distance;
  }
  if (!placed) throw std::runtime_error("UavEnv: could not place target at required distance");

  obstacles_.clear();
  for (int i = 0; i < arena_.n_obstacles; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
      Obstacle obs;
      obs.radius = rng.uniform(arena_.obstacle_radius_min, arena_.obstacle_radius_max);
      obs.cx = rng.uniform(0.0, arena_.extents[0]);
      obs.cy = rng.uniform(0.0, arena_.extents[1]);
      const double dir = rng.uniform(-M_PI, M_PI);
      obs.vx = arena_.obstacle_speed * std::cos(dir);
      obs.vy = arena_.obstacle_speed * std::sin(dir);
      const Vec3 center{obs.cx, obs.cy, 0.0};
      const bool clear_of_uav = dist3(center, uav_.position) > obs.radius + 2.0 * arena_.v_max;
      const bool clear_of_target =
          dist3(center, target_) > obs.radius + arena_.target_radius;
      if (clear_of_uav && clear_of_target) {
        obstacles_.push_back(obs);
        ok = true;
      }
    }
    if (!ok) throw std::runtime_error("UavEnv: obstacle placement failed");
  }

  steps_ = 0;
  episode_done_ = false;
  last_reward_ = 0.0;
  last_terminal_ = Terminal::running;
  scan_radar();
  return observe();
}

void UavEnv::place_uav(const UavPhysical& uav) {
  uav_ = uav;
  attitude_from_velocity(uav_);
  scan_radar();
}

void UavEnv::scan_radar() {
  const auto dirs = radar_directions(uav_.yaw, uav_.pitch, arena_.radar_rays);
  radar_.resize(arena_.radar_rays);
  for (int i = 0; i < arena_.radar_rays; ++i) {
    radar_[i] = ray_distance(uav_.position, dirs[i], obstacles_, arena_.radar_range);
  }
}

Terminal UavEnv::classify_state() const {
  const Vec3& p = uav_.position;
  for (const auto& obs : obstacles_) {
    if (p[2] >= 0.0 && dist3(p, {obs.cx, obs.cy, 0.0}) <= obs.radius) {
      return Terminal::collision;
    }
  }
  if (p[2] <= 0.0 || p[0] < 0.0 || p[0] > arena_.extents[0] || p[1] < 0.0 ||
      p[1] > arena_.extents[1] || p[2] > arena_.extents[2]) {
    return Terminal::out_of_range;
  }
  if (dist3(p, target_) <= arena_.target_radius) return Terminal::success;
  if (steps_ >= arena_.max_steps) return Terminal::timeout;
  return Terminal::running;
}

RewardTerms UavEnv::shaping_terms(const UavPhysical& prev, const UavPhysical& cur,
                                  std::span<const double> radar) const {
  RewardTerms t;
  const double d_pre = dist3(prev.position, target_);
  const double d_cur = dist3(cur.position, target_);
  t.position = (d_pre - d_cur) / (arena_.v_max * arena_.dt);
  t.angle = -(angle_to_target_yaw(cur, target_) + angle_to_target_pitch(cur, target_)) /
            (1.5 * M_PI);
  t.height = 1.0 - cur.position[2] / arena_.extents[2];
  double sum = 0.0;
  for (double d : radar) sum += d / arena_.radar_range;
  t.danger = sum / static_cast<double>(radar.size());
  t.velocity = norm3(cur.velocity) / arena_.v_max;
  t.total = reward_.lambda_position * t.position + reward_.lambda_angle * t.angle +
            reward_.lambda_height * t.height + reward_.lambda_danger * t.danger +
            reward_.lambda_velocity * t.velocity;
  return t;
}

StepOutcome UavEnv::step(std::span<const double> action) {
  if (episode_done_) throw std::logic_error("UavEnv::step: episode already terminal");
  if (action.size() != 3) throw std::invalid_argument("UavEnv::step: action must be 3-dim");

  // obstacles drift first, reflecting at the walls
  for (auto& obs : obstacles_) {
    obs.cx += obs.vx * arena_.dt;
    obs.cy += obs.vy * arena_.dt;
    if (obs.cx < 0.0) { obs.cx = -obs.cx; obs.vx = -obs.vx; }
    if (obs.cx > arena_.extents[0]) { obs.cx = 2.0 * arena_.extents[0] - obs.cx; obs.vx = -obs.vx; }
    if (obs.cy < 0.0) { obs.cy = -obs.cy; obs.vy = -obs.vy; }
    if (obs.cy > arena_.extents[1]) { obs.cy = 2.0 * arena_.extents[1] - obs.cy; obs.vy = -obs.vy; }
  }

  Vec3 load{0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    load[i] = std::clamp(action[i], -1.0, 1.0) * arena_.n_max;
  }

  const UavPhysical prev = uav_;
  uav_ = step_dynamics(uav_, load, arena_);
  ++steps_;
  scan_radar();

  const Terminal terminal = classify_state();
  double reward;
  switch (terminal) {
    case Terminal::success:
      reward = reward_.r_success;
      break;
    case Terminal::collision:
    case Terminal::out_of_range:
      reward = reward_.r_failure;
      break;
    default:
      // timeout ends the episode but earns no failure penalty
      reward = shaping_terms(prev, uav_, radar_).total;
      break;
  }

  episode_done_ = terminal != Terminal::running;
  last_reward_ = reward;
  last_terminal_ = terminal;
  return StepOutcome{observe(), reward, terminal};
}

std::vector<double> UavEnv::observe() {
  std::vector<double> obs;
  obs.reserve(observation_dim());
  for (int i = 0; i < 3; ++i) {
    obs.push_back((target_[i] - uav_.position[i]) / arena_.extents[i]);
  }
  obs.push_back(uav_.yaw / M_PI);
  obs.push_back(uav_.pitch / M_PI);
  obs.push_back(norm3(uav_.velocity) / arena_.v_max);
  for (double d : radar_) obs.push_back(d / arena_.radar_range);
  return obs;
}

std::string UavEnv::trajectory_header() const {
  return "t,p_x,p_y,p_z,yaw,pitch,speed,reward,outcome";
}

std::string UavEnv::trajectory_row(int t, double reward, Terminal outcome) const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s", t,
                uav_.position[0], uav_.position[1], uav_.position[2], uav_.yaw, uav_.pitch,
                norm3(uav_.velocity), reward, terminal_name(outcome));
  return buf;
}

}  // namespace acer
