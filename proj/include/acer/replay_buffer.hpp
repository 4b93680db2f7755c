#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "acer/rng.hpp"

namespace acer {

/// One stored transition. `id` is a serial number assigned by the
/// buffer, unique for the buffer's lifetime.
struct Experience {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
  std::uint64_t id = 0;
};

/**
 * Complete binary tree whose leaves carry both a sampling factor p^a
 * and a replacing factor p^-a for one priority p > 0. Internal nodes
 * hold partial sums of both factors (plus the subtree max priority),
 * so prefix search runs in O(log D) for either factor:
 *
 *   - sampling factor: proportional sampling of high-priority leaves
 *   - replacing factor: proportional eviction of low-priority leaves
 *
 * Unoccupied leaves contribute zero to both sums. Parent sums are
 * recomputed from children on every update (no incremental deltas), so
 * floating-point drift does not accumulate across long op sequences.
 */
class DoubleSumTree {
 public:
  enum class Factor { sampling, replacing };

  DoubleSumTree(std::size_t capacity, double alpha);

  std::size_t capacity() const { return capacity_; }
  double alpha() const { return alpha_; }

  /// Set leaf priority (> 0) and refresh both partial-sum paths.
  void set_priority(std::size_t slot, double priority);

  /// Stored priority of a slot; 0 for unoccupied slots.
  double priority(std::size_t slot) const { return priorities_[slot]; }

  double sampling_total() const { return nodes_[1].sampling; }
  double replacing_total() const { return nodes_[1].replacing; }

  /// Max priority over occupied leaves; 0 when empty.
  double max_priority() const { return nodes_[1].max_priority; }

  struct SearchResult {
    std::size_t slot;
    int nodes_visited;
  };

  /// Finds the unique leaf whose cumulative factor interval contains
  /// `target`. Requires 0 <= target < total of the chosen factor.
  /// Descends left when target < left subtree sum, so interval
  /// boundaries belong to the right leaf.
  SearchResult prefix_search(double target, Factor factor) const;

  /// Slot with the smallest priority among occupied leaves (linear scan;
  /// only used by the deterministic eviction mode).
  std::size_t min_priority_slot() const;

 private:
  struct Node {
    double sampling = 0.0;
    double replacing = 0.0;
    double max_priority = 0.0;
  };

  std::size_t leaf_node(std::size_t slot) const { return base_ + slot; }

  std::size_t capacity_;
  std::size_t base_;  // first leaf node index; power of two >= capacity
  double alpha_;
  std::vector<Node> nodes_;        // 1-indexed heap layout
  std::vector<double> priorities_; // per-slot raw priority
};

enum class ReplayMode { uniform, per_clipped, acer };

enum class EvictionPolicy {
  stochastic,       // draw the evicted slot by replacing factor
  deterministic_min // always evict the lowest-priority slot
};

struct SampledItem {
  Experience experience;
  std::size_t slot = 0;
  double is_weight = 1.0;
  bool from_temporary_pool = false;
};

struct SampledBatch {
  std::vector<SampledItem> items;
};

/// Baseline clipped priority: min(|td_error|, 1) + 1e-6.
double per_priority(double td_error);

/**
 * Experience store shared by the learner and the priority refresher.
 *
 * Three modes:
 *   - uniform:     FIFO eviction, uniform sampling, weights 1
 *   - per_clipped: FIFO eviction, proportional sampling, clipped priorities
 *   - acer:        replacing-factor eviction, proportional sampling with
 *                  the newest experiences force-included from the
 *                  temporary pool, unclipped priorities
 *
 * Every public operation takes the buffer-wide lock; critical sections
 * are O(log D) except uniform sampling and CSV export.
 */
class ReplayBuffer {
 public:
  struct Config {
    std::size_t capacity = 0;
    ReplayMode mode = ReplayMode::acer;
    double alpha = 0.6;
    std::size_t temp_pool_capacity = 0;  // used in acer mode only
    EvictionPolicy eviction = EvictionPolicy::stochastic;
    std::uint64_t seed = 0;
  };

  explicit ReplayBuffer(const Config& cfg);

  /// Stores the experience with priority = current max (1.0 when the
  /// buffer is empty) and returns the slot it landed in. On a full
  /// buffer the evicted slot is FIFO (uniform/per) or drawn by
  /// replacing factor (acer). Assigns the experience's serial number.
  std::size_t store(Experience exp);

  /// Samples a batch of n distinct slots. In acer mode the temporary
  /// pool's experiences are copied in first, then the rest are drawn by
  /// stratified proportional sampling. Importance weights are
  /// (D * P(i))^-beta, normalized so the batch max is 1.
  /// Throws if fewer than n experiences are stored.
  SampledBatch sample(std::size_t n, double beta);

  /// Rewrites one slot's priority (> 0) and both factor paths.
  void update_priority(std::size_t slot, double priority);

  /// Next `count` occupied slots in circular order from `cursor`
  /// (with wraparound repeats when count exceeds occupancy).
  /// Advances cursor by count mod occupancy.
  std::vector<std::size_t> sweep_indices(std::size_t& cursor, std::size_t count) const;

  Experience experience_at(std::size_t slot) const;
  double priority_of(std::size_t slot) const;
  std::vector<double> all_priorities() const;  // occupied slots, slot order

  std::size_t size() const;
  std::size_t capacity() const { return cfg_.capacity; }
  ReplayMode mode() const { return cfg_.mode; }
  double alpha() const { return cfg_.alpha; }
  double max_priority() const;
  std::size_t temp_pool_size() const;

  /// Diagnostic snapshot: header "slot,id,priority", one row per
  /// occupied slot in slot order.
  void export_csv(std::ostream& out) const;

  /// Direct tree access for diagnostics and tests (not synchronized;
  /// callers must not race it against writers).
  const DoubleSumTree& tree() const { return tree_; }

 private:
  std::size_t choose_eviction_slot_locked();
  std::size_t stratified_draw_locked(double lo, double hi,
                                     const std::vector<bool>& taken);

  Config cfg_;
  mutable std::mutex mutex_;
  DoubleSumTree tree_;
  std::vector<Experience> slots_;
  std::size_t occupancy_ = 0;
  std::size_t fifo_cursor_ = 0;
  std::uint64_t next_serial_ = 0;
  std::deque<std::uint64_t> temp_pool_;                     // newest serials, FIFO
  std::unordered_map<std::uint64_t, std::size_t> id_slot_;  // live serial -> slot
  Rng rng_;
};

}  // namespace acer
