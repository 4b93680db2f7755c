#pragma once

#include <array>
#include <optional>

#include "acer/env/env.hpp"
#include "acer/rng.hpp"

namespace acer {

using Vec3 = std::array<double, 3>;

/// UAV rigid-point state: position, velocity, and the attitude angles
/// derived from the velocity direction.
struct UavPhysical {
  Vec3 position{0, 0, 0};
  Vec3 velocity{0, 0, 0};
  double pitch = 0.0;  // [-pi/2, pi/2]
  double yaw = 0.0;    // (-pi, pi]
};

/// Hemispherical obstacle sitting on the ground plane, drifting with a
/// constant ground-plane velocity that reflects off the arena walls.
struct Obstacle {
  double cx = 0.0, cy = 0.0;
  double radius = 0.0;
  double vx = 0.0, vy = 0.0;
};

struct ArenaConfig {
  Vec3 extents{120e3, 90e3, 10e3};  // meters
  double target_radius = 3e3;
  int n_obstacles = 20;
  double obstacle_speed = 5.0;
  double obstacle_radius_min = 5e3;
  double obstacle_radius_max = 10e3;
  double min_start_distance = 50e3;
  double dt = 1.0;
  int radar_rays = 32;        // 8 azimuths x 4 elevations
  double radar_range = 5e3;
  double gravity = 9.8;
  double v_max = 103.0;
  double v_min = 30.0;  // keeps the velocity-derived attitude defined
  double n_max = 15.0;  // per-axis load factor bound
  double cruise_speed = 66.5;
  int max_steps = 3000;

  void validate() const;
};

struct RewardConfig {
  double r_success = 100.0;
  double r_failure = -200.0;
  double lambda_position = 20.0;
  double lambda_angle = 20.0;
  double lambda_height = 10.0;
  double lambda_danger = 40.0;
  double lambda_velocity = 10.0;

  void validate() const;
};

/// Per-term reward breakdown for the non-terminal shaping reward.
struct RewardTerms {
  double position = 0.0;  // distance closed toward the target / (v_max*dt)
  double angle = 0.0;     // -(yaw-to-target + pitch-to-target) / (3*pi/2)
  double height = 0.0;    // 1 - z/H
  double danger = 0.0;    // mean radar clearance fraction
  double velocity = 0.0;  // speed / v_max
  double total = 0.0;     // lambda-weighted sum
};

/// Velocity-direction attitude: pitch = atan2(vz, |v_xy|), yaw = atan2(vy, vx).
void attitude_from_velocity(UavPhysical& uav);

/**
 * Semi-implicit Euler step of the load-factor dynamics:
 *   a = n * g + (0,0,-g)
 *   v <- clamp_speed(v + a*dt),  p <- p + v*dt
 * then attitude recomputed from the new velocity. The speed clamp
 * rescales the velocity vector into [v_min, v_max].
 */
UavPhysical step_dynamics(const UavPhysical& uav, const Vec3& load_factor,
                          const ArenaConfig& cfg);

/// Distance along one ray to the nearest obstacle hemisphere or the
/// ground plane, capped at the radar range.
double ray_distance(const Vec3& origin, const Vec3& direction,
                    std::span<const Obstacle> obstacles, double range);

/// Body-frame radar ray directions rotated by yaw then pitch.
std::vector<Vec3> radar_directions(double yaw, double pitch, int n_rays);

double angle_to_target_yaw(const UavPhysical& uav, const Vec3& target);
double angle_to_target_pitch(const UavPhysical& uav, const Vec3& target);

/**
 * 3D navigation battlefield: reach the target hemisphere while
 * avoiding drifting hemispherical obstacles, staying inside the arena
 * and off the ground. Observations are the normalized
 * (radar_rays + 6)-dim vector [dp(3), yaw, pitch, speed, d_1..d_Nr].
 */
class UavEnv final : public Env {
 public:
  UavEnv(ArenaConfig arena, RewardConfig reward);

  int observation_dim() const override { return arena_.radar_rays + 6; }
  int action_dim() const override { return 3; }
  const char* name() const override { return "uav"; }

  std::vector<double> reset(std::uint64_t seed) override;
  StepOutcome step(std::span<const double> action) override;

  std::string trajectory_header() const override;
  std::string trajectory_row(int t, double reward, Terminal outcome) const override;

  const ArenaConfig& arena() const { return arena_; }
  const RewardConfig& reward_config() const { return reward_; }
  const UavPhysical& uav() const { return uav_; }
  const Vec3& target() const { return target_; }
  std::span<const Obstacle> obstacles() const { return obstacles_; }
  std::span<const double> last_radar() const { return radar_; }
  int steps_taken() const { return steps_; }

  /// Shaping terms for an already-executed transition (exposed for the
  /// reward-decomposition cross-check).
  RewardTerms shaping_terms(const UavPhysical& prev, const UavPhysical& cur,
                            std::span<const double> radar) const;

  /// Test hook: place the UAV directly.
  void place_uav(const UavPhysical& uav);

 private:
  std::vector<double> observe();
  Terminal classify_state() const;
  void scan_radar();

  ArenaConfig arena_;
  RewardConfig reward_;
  UavPhysical uav_;
  Vec3 target_{0, 0, 0};
  std::vector<Obstacle> obstacles_;
  std::vector<double> radar_;
  int steps_ = 0;
  bool episode_done_ = true;
  double last_reward_ = 0.0;
  Terminal last_terminal_ = Terminal::running;
};

}  // namespace acer
