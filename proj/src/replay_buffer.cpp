#include "acer/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace acer {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

DoubleSumTree::DoubleSumTree(std::size_t capacity, double alpha)
    : capacity_(capacity), base_(next_pow2(capacity)), alpha_(alpha) {
  if (capacity == 0) throw std::invalid_argument("DoubleSumTree: capacity must be > 0");
  nodes_.assign(2 * base_, Node{});
  priorities_.assign(capacity_, 0.0);
}

void DoubleSumTree::set_priority(std::size_t slot, double priority) {
  if (slot >= capacity_) throw std::out_of_range("DoubleSumTree: slot out of range");
  if (!(priority > 0.0)) throw std::domain_error("DoubleSumTree: priority must be > 0");
  priorities_[slot] = priority;
  const double pa = std::pow(priority, alpha_);
  std::size_t node = leaf_node(slot);
  nodes_[node] = Node{pa, 1.0 / pa, priority};
  // recompute parents from children instead of propagating deltas,
  // keeping sums drift-free over arbitrarily long update sequences
  for (node >>= 1; node >= 1; node >>= 1) {
    const Node& l = nodes_[2 * node];
    const Node& r = nodes_[2 * node + 1];
    nodes_[node].sampling = l.sampling + r.sampling;
    nodes_[node].replacing = l.replacing + r.replacing;
    nodes_[node].max_priority = std::max(l.max_priority, r.max_priority);
    if (node == 1) break;
  }
}

DoubleSumTree::SearchResult DoubleSumTree::prefix_search(double target,
                                                         Factor factor) const {
  const bool sampling = (factor == Factor::sampling);
  const double total = sampling ? sampling_total() : replacing_total();
  if (!(target >= 0.0) || !(target < total)) {
    throw std::out_of_range("DoubleSumTree: prefix target outside [0, total)");
  }
  std::size_t node = 1;
  int visited = 1;
  while (node < base_) {
    const std::size_t left = 2 * node;
    const double left_sum = sampling ? nodes_[left].sampling : nodes_[left].replacing;
    if (target < left_sum) {
      node = left;
    } else {
      target -= left_sum;
      node = left + 1;
    }
    ++visited;
  }
  return SearchResult{node - base_, visited};
}

std::size_t DoubleSumTree::min_priority_slot() const {
  std::size_t best = capacity_;
  double best_p = 0.0;
  for (std::size_t s = 0; s < capacity_; ++s) {
    if (priorities_[s] <= 0.0) continue;
    if (best == capacity_ || priorities_[s] < best_p) {
      best = s;
      best_p = priorities_[s];
    }
  }
  if (best == capacity_) throw std::logic_error("DoubleSumTree: no occupied slots");
  return best;
}

double per_priority(double td_error) {
  return std::min(std::abs(td_error), 1.0) + 1e-6;
}

ReplayBuffer::ReplayBuffer(const Config& cfg)
    : cfg_(cfg),
      tree_(cfg.capacity, cfg.alpha),
      slots_(cfg.capacity),
      rng_(Rng::stream(cfg.seed, "replay-buffer")) {
  if (cfg.capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
}

std::size_t ReplayBuffer::choose_eviction_slot_locked() {
  if (cfg_.mode != ReplayMode::acer) {
    const std::size_t slot = fifo_cursor_;
    fifo_cursor_ = (fifo_cursor_ + 1) % cfg_.capacity;
    return slot;
  }
  if (cfg_.eviction == EvictionPolicy::deterministic_min) {
    return tree_.min_priority_slot();
  }
  const double u = rng_.uniform() * tree_.replacing_total();
  return tree_.prefix_search(u, DoubleSumTree::Factor::replacing).slot;
}

std::size_t ReplayBuffer::store(Experience exp) {
  std::lock_guard lock(mutex_);
  exp.id = next_serial_++;

  const double priority = occupancy_ == 0 ? 1.0 : tree_.max_priority();

  std::size_t slot;
  if (occupancy_ < cfg_.capacity) {
    slot = occupancy_++;
    if (cfg_.mode != ReplayMode::acer) fifo_cursor_ = occupancy_ % cfg_.capacity;
  } else {
    slot = choose_eviction_slot_locked();
    const std::uint64_t evicted_id = slots_[slot].id;
    id_slot_.erase(evicted_id);
    if (auto it = std::find(temp_pool_.begin(), temp_pool_.end(), evicted_id);
        it != temp_pool_.end()) {
      temp_pool_.erase(it);
    }
  }

  id_slot_[exp.id] = slot;
  if (cfg_.mode == ReplayMode::acer && cfg_.temp_pool_capacity > 0) {
    temp_pool_.push_back(exp.id);
    if (temp_pool_.size() > cfg_.temp_pool_capacity) temp_pool_.pop_front();
  }
  slots_[slot] = std::move(exp);
  tree_.set_priority(slot, priority);
  return slot;
}

std::size_t ReplayBuffer::stratified_draw_locked(double lo, double hi,
                                                 const std::vector<bool>& taken) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double u = rng_.uniform(lo, hi);
    const std::size_t slot =
        tree_.prefix_search(u, DoubleSumTree::Factor::sampling).slot;
    if (!taken[slot]) return slot;
  }
  // segment keeps landing on taken slots; fall back to the first free
  // occupied slot so sampling always terminates
  for (std::size_t s = 0; s < occupancy_; ++s) {
    if (!taken[s]) return s;
  }
  throw std::logic_error("ReplayBuffer: no free slot during sampling");
}

SampledBatch ReplayBuffer::sample(std::size_t n, double beta) {
  std::lock_guard lock(mutex_);
  if (n == 0) throw std::invalid_argument("ReplayBuffer: batch size must be > 0");
  if (occupancy_ < n) {
    throw std::runtime_error("ReplayBuffer: not enough stored experiences to sample");
  }

  SampledBatch batch;
  batch.items.reserve(n);
  std::vector<bool> taken(cfg_.capacity, false);

  if (cfg_.mode == ReplayMode::uniform) {
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t slot;
      do {
        slot = rng_.uniform_below(occupancy_);
      } while (taken[slot]);
      taken[slot] = true;
      batch.items.push_back(SampledItem{slots_[slot], slot, 1.0, false});
    }
    return batch;
  }

  // temporary pool first (acer only): newest experiences are always in
  // the batch exactly once
  if (cfg_.mode == ReplayMode::acer) {
    for (std::uint64_t id : temp_pool_) {
      const std::size_t slot = id_slot_.at(id);
      if (taken[slot]) continue;
      taken[slot] = true;
      batch.items.push_back(SampledItem{slots_[slot], slot, 1.0, true});
    }
  }

  const std::size_t n_tree = n - batch.items.size();
  const double total = tree_.sampling_total();
  for (std::size_t seg = 0; seg < n_tree; ++seg) {
    const double lo = total * static_cast<double>(seg) / n_tree;
    const double hi = total * static_cast<double>(seg + 1) / n_tree;
    const std::size_t slot = stratified_draw_locked(lo, hi, taken);
    taken[slot] = true;
    batch.items.push_back(SampledItem{slots_[slot], slot, 1.0, false});
  }

  // importance weights from stored priorities (temporary items use the
  // same formula with their stored max-priority values)
  const double d = static_cast<double>(cfg_.capacity);
  double w_max = 0.0;
  for (auto& item : batch.items) {
    const double pa = std::pow(tree_.priority(item.slot), cfg_.alpha);
    const double prob = pa / total;
    item.is_weight = std::pow(d * prob, -beta);
    w_max = std::max(w_max, item.is_weight);
  }
  for (auto& item : batch.items) item.is_weight /= w_max;
  return batch;
}

void ReplayBuffer::update_priority(std::size_t slot, double priority) {
  std::lock_guard lock(mutex_);
  if (slot >= occupancy_) throw std::out_of_range("ReplayBuffer: slot not occupied");
  if (!(priority > 0.0)) throw std::domain_error("ReplayBuffer: priority must be > 0");
  tree_.set_priority(slot, priority);
}

std::vector<std::size_t> ReplayBuffer::sweep_indices(std::size_t& cursor,
                                                     std::size_t count) const {
  std::lock_guard lock(mutex_);
  std::vector<std::size_t> out;
  if (occupancy_ == 0 || count == 0) return out;
  out.reserve(count);
  std::size_t c = cursor % occupancy_;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(c);
    c = (c + 1) % occupancy_;
  }
  cursor = c;
  return out;
}

Experience ReplayBuffer::experience_at(std::size_t slot) const {
  std::lock_guard lock(mutex_);
  if (slot >= occupancy_) throw std::out_of_range("ReplayBuffer: slot not occupied");
  return slots_[slot];
}

double ReplayBuffer::priority_of(std::size_t slot) const {
  std::lock_guard lock(mutex_);
  if (slot >= occupancy_) throw std::out_of_range("ReplayBuffer: slot not occupied");
  return tree_.priority(slot);
}

std::vector<double> ReplayBuffer::all_priorities() const {
  std::lock_guard lock(mutex_);
  std::vector<double> out(occupancy_);
  for (std::size_t s = 0; s < occupancy_; ++s) out[s] = tree_.priority(s);
  return out;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mutex_);
  return occupancy_;
}

double ReplayBuffer::max_priority() const {
  std::lock_guard lock(mutex_);
  return tree_.max_priority();
}

std::size_t ReplayBuffer::temp_pool_size() const {
  std::lock_guard lock(mutex_);
  return temp_pool_.size();
}

void ReplayBuffer::export_csv(std::ostream& out) const {
  std::lock_guard lock(mutex_);
  out << "slot,id,priority\n";
  char buf[64];
  for (std::size_t s = 0; s < occupancy_; ++s) {
    std::snprintf(buf, sizeof(buf), "%.17g", tree_.priority(s));
    out << s << ',' << slots_[s].id << ',' << buf << '\n';
  }
}

}  // namespace acer
