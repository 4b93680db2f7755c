#include "acer/refresh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acer {

NetworkSnapshot make_snapshot(const Td3Agent& agent, long version) {
  NetworkSnapshot snap{agent.actor_target(), agent.critic1_target(), agent.critic2_target(),
                       agent.critic1(),      agent.critic2(),        version};
  for (long& s : snap.stamps) s = version;
  return snap;
}

double compute_td_error(const NetworkSnapshot& snap, const Experience& exp, double gamma,
                        const Td3Config& cfg, std::uint64_t noise_salt) {
  Rng noise(Rng::split_mix(noise_salt ^ (exp.id + 0x9e3779b97f4a7c15ULL)));

  std::vector<double> normalized = snap.actor_target.forward(exp.next_state);
  const int action_dim = static_cast<int>(normalized.size());
  std::vector<double> next_action(action_dim);
  for (int i = 0; i < action_dim; ++i) {
    const double eps = std::clamp(noise.normal(0.0, cfg.smoothing_sigma), -cfg.smoothing_clip,
                                  cfg.smoothing_clip);
    const double x = std::clamp(normalized[i] + eps, -1.0, 1.0);
    const double center = 0.5 * (cfg.action_low[i] + cfg.action_high[i]);
    const double half = 0.5 * (cfg.action_high[i] - cfg.action_low[i]);
    next_action[i] = std::clamp(center + half * x, cfg.action_low[i], cfg.action_high[i]);
  }

  const double y = td3_target(snap.critic1_target, snap.critic2_target, exp.next_state,
                              next_action, exp.reward, exp.done, gamma);

  std::vector<double> sa;
  sa.reserve(exp.state.size() + exp.action.size());
  sa.insert(sa.end(), exp.state.begin(), exp.state.end());
  sa.insert(sa.end(), exp.action.begin(), exp.action.end());
  double q = snap.critic1.forward(sa)[0];
  if (cfg.td_error_min_critics) {
    q = std::min(q, snap.critic2.forward(sa)[0]);
  }
  return y - q;
}

double oracle_priority(const NetworkSnapshot& snap, const Experience& exp, ReplayMode mode,
                       const Td3Config& cfg, const CurriculumConfig& ccfg,
                       const CurriculumState& cstate, std::uint64_t noise_salt) {
  const double delta = compute_td_error(snap, exp, cfg.gamma, cfg, noise_salt);
  return mode == ReplayMode::acer ? curriculum::priority(delta, ccfg, cstate)
                                  : per_priority(delta);
}

std::vector<double> oracle_priorities(const ReplayBuffer& buffer, const NetworkSnapshot& snap,
                                      const Td3Config& cfg, const CurriculumConfig& ccfg,
                                      const CurriculumState& cstate, std::uint64_t noise_salt) {
  const std::size_t n = buffer.size();
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    out[s] = oracle_priority(snap, buffer.experience_at(s), buffer.mode(), cfg, ccfg, cstate,
                             noise_salt);
  }
  return out;
}

std::size_t refresh_tick(ReplayBuffer& buffer, const NetworkSnapshot& snap,
                         const CurriculumConfig& ccfg, const CurriculumState& cstate,
                         const RefreshConfig& rcfg, const Td3Config& td3cfg,
                         std::uint64_t noise_salt, std::size_t& cursor) {
  if (!rcfg.enabled || rcfg.per_tick == 0 || buffer.size() == 0) return 0;
  if (!snap.consistent()) {
    throw std::logic_error("refresh_tick: snapshot mixes learner versions");
  }
  const auto slots = buffer.sweep_indices(cursor, std::min(rcfg.per_tick, buffer.size()));
  for (std::size_t slot : slots) {
    // copy out under the buffer lock, recompute outside it, write back
    const Experience exp = buffer.experience_at(slot);
    const double delta = compute_td_error(snap, exp, td3cfg.gamma, td3cfg, noise_salt);
    buffer.update_priority(slot, curriculum::priority(delta, ccfg, cstate));
  }
  return slots.size();
}

ProbabilityGapReport probability_gap(std::span<const double> stored_priorities,
                                     std::span<const double> oracle_priorities, double alpha) {
  if (stored_priorities.size() != oracle_priorities.size()) {
    throw std::invalid_argument("probability_gap: vector length mismatch");
  }
  const std::size_t n = stored_priorities.size();
  double stored_total = 0.0, oracle_total = 0.0;
  std::vector<double> stored_f(n), oracle_f(n);
  for (std::size_t i = 0; i < n; ++i) {
    stored_f[i] = std::pow(stored_priorities[i], alpha);
    oracle_f[i] = std::pow(oracle_priorities[i], alpha);
    stored_total += stored_f[i];
    oracle_total += oracle_f[i];
  }
  ProbabilityGapReport report;
  report.per_slot.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.per_slot[i] = oracle_f[i] / oracle_total - stored_f[i] / stored_total;
    report.mean_abs_gap += std::abs(report.per_slot[i]);
  }
  if (n > 0) report.mean_abs_gap /= static_cast<double>(n);
  return report;
}

ProbabilityGapReport probability_gap(const ReplayBuffer& buffer,
                                     std::span<const double> oracle_priorities) {
  return probability_gap(buffer.all_priorities(), oracle_priorities, buffer.alpha());
}

Refresher::Refresher(ReplayBuffer& buffer, CurriculumConfig ccfg, RefreshConfig rcfg,
                     Td3Config td3cfg, std::uint64_t noise_salt)
    : buffer_(buffer),
      ccfg_(ccfg),
      rcfg_(rcfg),
      td3cfg_(std::move(td3cfg)),
      noise_salt_(noise_salt) {
  curriculum_ = curriculum::initial_state(ccfg_);
}

Refresher::~Refresher() { stop(); }

void Refresher::publish(NetworkSnapshot snapshot) {
  std::lock_guard lock(state_mutex_);
  snapshot_ = std::move(snapshot);
}

void Refresher::set_curriculum(CurriculumState state) {
  std::lock_guard lock(state_mutex_);
  curriculum_ = state;
}

std::size_t Refresher::run_one_tick() {
  std::optional<NetworkSnapshot> snap;
  CurriculumState cstate;
  {
    std::lock_guard lock(state_mutex_);
    if (!snapshot_) return 0;
    snap = *snapshot_;  // whole-snapshot copy; never a torn read
    cstate = curriculum_;
  }
  const std::size_t updated =
      refresh_tick(buffer_, *snap, ccfg_, cstate, rcfg_, td3cfg_, noise_salt_, cursor_);
  {
    std::lock_guard lock(state_mutex_);
    updates_applied_ += static_cast<long>(updated);
    ++ticks_run_;
  }
  return updated;
}

std::size_t Refresher::tick_sync() { return run_one_tick(); }

void Refresher::start() {
  if (worker_.joinable()) return;
  stop_requested_ = false;
  worker_ = std::thread([this] { worker_loop(); });
}

void Refresher::signal_tick() {
  {
    std::lock_guard lock(wake_mutex_);
    tick_pending_ = true;  // coalesce: at most one backlog tick
  }
  wake_cv_.notify_one();
}

void Refresher::stop() {
  if (!worker_.joinable()) return;
  {
    std::lock_guard lock(wake_mutex_);
    stop_requested_ = true;
  }
  wake_cv_.notify_one();
  worker_.join();
}

void Refresher::worker_loop() {
  for (;;) {
    {
      std::unique_lock lock(wake_mutex_);
      wake_cv_.wait(lock, [this] { return tick_pending_ || stop_requested_; });
      if (stop_requested_) return;
      tick_pending_ = false;
    }
    run_one_tick();
  }
}

long Refresher::updates_applied() const {
  std::lock_guard lock(state_mutex_);
  return updates_applied_;
}

long Refresher::ticks_run() const {
  std::lock_guard lock(state_mutex_);
  return ticks_run_;
}

}  // namespace acer
