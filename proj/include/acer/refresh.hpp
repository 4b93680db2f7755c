#pragma once

#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "acer/curriculum.hpp"
#include "acer/replay_buffer.hpp"
#include "acer/td3.hpp"

namespace acer {

struct RefreshConfig {
  std::size_t per_tick = 256;  // experiences re-prioritized per timestep
  bool enabled = true;
};

/**
 * Deep copies of the networks a TD-error recomputation needs, all taken
 * from the same learner step. The per-net stamps let consumers verify a
 * snapshot was not assembled from two learner versions.
 */
struct NetworkSnapshot {
  Mlp actor_target;
  Mlp critic1_target;
  Mlp critic2_target;
  Mlp critic1;
  Mlp critic2;
  long version = 0;
  long stamps[5] = {0, 0, 0, 0, 0};

  bool consistent() const {
    for (long s : stamps) {
      if (s != version) return false;
    }
    return true;
  }
};

NetworkSnapshot make_snapshot(const Td3Agent& agent, long version);

/**
 * TD error of one stored transition against a network snapshot:
 *   y = r + gamma * (1 - done) * min_j Qj'(s', mu'(s') + clipped noise)
 *   delta = y - Q1(s, a)        (or y - min(Q1,Q2) when configured)
 *
 * The smoothing noise is seeded from the experience id (xored with
 * `noise_salt`), so recomputing the same experience always yields the
 * same error. That makes refreshed priorities reproducible and lets
 * diagnostics treat this function as the oracle.
 */
double compute_td_error(const NetworkSnapshot& snap, const Experience& exp, double gamma,
                        const Td3Config& cfg, std::uint64_t noise_salt);

/// Priority an experience would get right now under the buffer's mode.
double oracle_priority(const NetworkSnapshot& snap, const Experience& exp, ReplayMode mode,
                       const Td3Config& cfg, const CurriculumConfig& ccfg,
                       const CurriculumState& cstate, std::uint64_t noise_salt);

/// Oracle priorities for every occupied slot, in slot order.
std::vector<double> oracle_priorities(const ReplayBuffer& buffer, const NetworkSnapshot& snap,
                                      const Td3Config& cfg, const CurriculumConfig& ccfg,
                                      const CurriculumState& cstate, std::uint64_t noise_salt);

/**
 * One refresh sweep step: recomputes the TD errors of the next
 * `cfg.per_tick` slots (circular sweep from `cursor`) and rewrites
 * their priorities with the curriculum function. Returns the number of
 * slots updated. No-op when disabled, per_tick is 0, or the buffer is
 * empty.
 */
std::size_t refresh_tick(ReplayBuffer& buffer, const NetworkSnapshot& snap,
                         const CurriculumConfig& ccfg, const CurriculumState& cstate,
                         const RefreshConfig& rcfg, const Td3Config& td3cfg,
                         std::uint64_t noise_salt, std::size_t& cursor);

struct ProbabilityGapReport {
  std::vector<double> per_slot;  // P_oracle(e_i) - P_stored(e_i)
  double mean_abs_gap = 0.0;
};

/**
 * Gap between the sampling distribution implied by the stored
 * priorities and the one implied by freshly recomputed (oracle)
 * priorities. Gaps sum to zero since both distributions normalize.
 */
ProbabilityGapReport probability_gap(std::span<const double> stored_priorities,
                                     std::span<const double> oracle_priorities, double alpha);

ProbabilityGapReport probability_gap(const ReplayBuffer& buffer,
                                     std::span<const double> oracle_priorities);

/**
 * Owns the refresh worker. Two modes:
 *
 *   - synchronous: the training loop calls tick_sync() once per
 *     environment timestep; fully deterministic.
 *   - asynchronous: start() spawns a subthread; signal_tick() wakes it
 *     to process one sweep step. Signals arriving while a sweep is in
 *     flight coalesce into at most one pending tick, so the worker
 *     never processes more than per_tick slots per signal.
 *
 * The learner hands over network copies with publish(); the worker
 * always uses the latest complete snapshot and never sees a half
 * written one.
 */
class Refresher {
 public:
  Refresher(ReplayBuffer& buffer, CurriculumConfig ccfg, RefreshConfig rcfg, Td3Config td3cfg,
            std::uint64_t noise_salt);
  ~Refresher();

  Refresher(const Refresher&) = delete;
  Refresher& operator=(const Refresher&) = delete;

  void publish(NetworkSnapshot snapshot);
  void set_curriculum(CurriculumState state);

  /// Inline sweep step on the caller's thread.
  std::size_t tick_sync();

  void start();
  void signal_tick();
  void stop();

  long updates_applied() const;
  long ticks_run() const;

 private:
  std::size_t run_one_tick();
  void worker_loop();

  ReplayBuffer& buffer_;
  CurriculumConfig ccfg_;
  RefreshConfig rcfg_;
  Td3Config td3cfg_;
  std::uint64_t noise_salt_;
  std::size_t cursor_ = 0;

  mutable std::mutex state_mutex_;
  std::optional<NetworkSnapshot> snapshot_;
  CurriculumState curriculum_{};
  long updates_applied_ = 0;
  long ticks_run_ = 0;

  std::mutex wake_mutex_;
  std::condition_variable wake_cv_;
  bool tick_pending_ = false;
  bool stop_requested_ = false;
  std::thread worker_;
};

}  // namespace acer
