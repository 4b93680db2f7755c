#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "acer/curriculum.hpp"
#include "acer/mlp.hpp"
#include "acer/replay_buffer.hpp"
#include "acer/rng.hpp"

namespace acer {

struct Td3Config {
  double gamma = 0.9;
  double tau_actor = 0.1;
  double tau_critic = 0.2;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int actor_delay = 2;
  double exploration_sigma = 0.1;  // in normalized action units
  double smoothing_sigma = 0.1;    // target policy smoothing, normalized units
  double smoothing_clip = 0.25;
  std::vector<double> action_low;
  std::vector<double> action_high;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // TD error for priorities: critic 1 by default, min(Q1,Q2) when set
  bool td_error_min_critics = false;

  void validate(int action_dim) const;
};

/**
 * Twin-delayed deterministic policy gradient learner.
 *
 * Holds the actor, twin critics, and their target copies. The actor
 * emits tanh outputs in [-1,1] which are mapped affinely to the action
 * bounds; exploration and target-smoothing noise both live in the
 * normalized space. Critic targets bootstrap off min(Q1', Q2') with
 * clipped smoothing noise and are cut at terminal transitions.
 *
 * The agent is a value type: copying it clones all six networks.
 */
class Td3Agent {
 public:
  Td3Agent(int obs_dim, int action_dim, std::vector<int> hidden_dims,
           Td3Config cfg, std::uint64_t seed);

  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  const Td3Config& config() const { return cfg_; }

  /// Deterministic policy action, plus Gaussian exploration noise when
  /// `explore` is set. Result is clamped to the action bounds.
  std::vector<double> act(std::span<const double> state, bool explore);

  struct CriticReport {
    double loss1 = 0.0;
    double loss2 = 0.0;
    std::vector<double> td_errors;  // y_i - Q(s_i, a_i), per batch item
  };

  /// One importance-weighted twin-critic regression step. Returns the
  /// per-item TD errors measured before the update.
  CriticReport critic_step(const SampledBatch& batch);

  /// One deterministic-policy-gradient ascent step on
  /// (1/N) sum_i Q1(s_i, mu(s_i)).
  void actor_step(const SampledBatch& batch);

  struct LearnReport {
    double critic_loss1 = 0.0;
    double critic_loss2 = 0.0;
    bool actor_updated = false;
    std::vector<std::size_t> slots;
    std::vector<double> td_errors;
    std::vector<double> new_priorities;  // empty in uniform mode
  };

  /// Full learn step: sample, critic step, delayed actor + target
  /// updates, and priority rewrite of the sampled slots according to
  /// the buffer's mode.
  LearnReport learn(ReplayBuffer& buffer, std::size_t batch_size, double beta,
                    const CurriculumConfig& curriculum_cfg,
                    const CurriculumState& curriculum_state);

  long learn_steps() const { return learn_steps_; }
  long actor_updates() const { return actor_updates_; }

  const Mlp& actor() const { return actor_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& critic1_target() const { return critic1_target_; }
  const Mlp& critic2_target() const { return critic2_target_; }
  Mlp& critic1_mut() { return critic1_; }
  Mlp& critic2_mut() { return critic2_; }
  Mlp& actor_mut() { return actor_; }

  /// Maps a normalized [-1,1] vector to the action bounds.
  std::vector<double> scale_action(std::span<const double> normalized) const;

  /// Target action with clipped smoothing noise, for external TD-error
  /// recomputation. Noise comes from the supplied stream.
  std::vector<double> smoothed_target_action(const Mlp& actor_target,
                                             std::span<const double> next_state,
                                             Rng& noise) const;

  void save(std::ostream& out) const;
  static Td3Agent load(std::istream& in);

 private:
  Td3Agent(Td3Config cfg, int obs_dim, int action_dim);

  int obs_dim_;
  int action_dim_;
  Td3Config cfg_;
  Mlp actor_, actor_target_;
  Mlp critic1_, critic2_, critic1_target_, critic2_target_;
  long learn_steps_ = 0;
  long actor_updates_ = 0;
  Rng explore_rng_;
  Rng smoothing_rng_;
};

/// y_i = r + gamma * (1 - done) * min_j Qj'(s', a~) for one transition,
/// with a~ = smoothed target action already chosen by the caller.
double td3_target(const Mlp& critic1_target, const Mlp& critic2_target,
                  std::span<const double> next_state, std::span<const double> next_action,
                  double reward, bool done, double gamma);

struct CriticGradient {
  double loss = 0.0;
  std::vector<double> param_grad;
  std::vector<double> q_values;
};

/// Loss and parameter gradient of the importance-weighted regression
/// (1/N) sum_i w_i (y_i - Q(s_i, a_i))^2 for one critic.
CriticGradient critic_loss_gradient(const Mlp& critic, const SampledBatch& batch,
                                    std::span<const double> targets);

struct ActorGradient {
  double objective = 0.0;  // (1/N) sum_i Q1(s_i, mu(s_i))
  std::vector<double> param_grad;  // of the objective (ascent direction)
};

/// Deterministic policy gradient through the critic:
/// dJ/dtheta = (1/N) sum_i dQ1/da * da/dtheta at a = mu(s_i).
ActorGradient actor_objective_gradient(const Mlp& actor, const Mlp& critic1,
                                       const SampledBatch& batch, const Td3Config& cfg);

}  // namespace acer
