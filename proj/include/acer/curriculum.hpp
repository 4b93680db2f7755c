#pragma once

#include <cstdint>

namespace acer {

/**
 * Curriculum schedule and priority mapping.
 *
 * Priorities are computed from |TD error| without clipping: the
 * experience whose error magnitude equals the curriculum factor c gets
 * priority 1, and priorities decay exponentially on both sides with
 * slopes k1 (below c) and k2 (above c). k1 > k2 keeps harder-than-c
 * experiences relatively favored.
 */
struct CurriculumConfig {
  double c_init = 10.0;
  double c_incr = 1.0;
  int update_period = 100;  // episodes between increments
  double k1 = 0.01;
  double k2 = 0.005;

  void validate() const;  // c_init > 0, period >= 1, k1 > k2 > 0
};

struct CurriculumState {
  double c = 10.0;
  long episodes_seen = 0;
};

namespace curriculum {

/// Priority in (0, 1]:
///   |delta| <= c -> exp(k1 * (|delta| - c))
///   |delta| >  c -> exp(k2 * (c - |delta|))
/// floored at 1e-18 so extreme errors cannot underflow to zero.
double priority(double delta, double c, double k1, double k2);

inline double priority(double delta, const CurriculumConfig& cfg, const CurriculumState& st) {
  return priority(delta, st.c, cfg.k1, cfg.k2);
}

/// Counts the episode; bumps c by c_incr whenever the new count is a
/// multiple of the update period.
CurriculumState advance_episode(CurriculumState state, const CurriculumConfig& cfg);

inline CurriculumState initial_state(const CurriculumConfig& cfg) {
  return CurriculumState{cfg.c_init, 0};
}

}  // namespace curriculum

}  // namespace acer
