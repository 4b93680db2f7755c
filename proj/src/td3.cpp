#include "acer/td3.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace acer {

namespace {

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

void Td3Config::validate(int action_dim) const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("Td3Config: gamma out of [0,1]");
  if (!(tau_actor > 0.0 && tau_actor <= 1.0) || !(tau_critic > 0.0 && tau_critic <= 1.0)) {
    throw std::invalid_argument("Td3Config: tau out of (0,1]");
  }
  if (actor_delay < 1) throw std::invalid_argument("Td3Config: actor_delay must be >= 1");
  if (!(smoothing_clip > 0.0)) throw std::invalid_argument("Td3Config: smoothing_clip must be > 0");
  if (static_cast<int>(action_low.size()) != action_dim ||
      static_cast<int>(action_high.size()) != action_dim) {
    throw std::invalid_argument("Td3Config: action bounds must match action_dim");
  }
  for (int i = 0; i < action_dim; ++i) {
    if (!(action_low[i] < action_high[i])) {
      throw std::invalid_argument("Td3Config: action_low must be < action_high");
    }
  }
}

Td3Agent::Td3Agent(Td3Config cfg, int obs_dim, int action_dim)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      cfg_(std::move(cfg)),
      actor_(MlpSpec{obs_dim, {1}, action_dim, Activation::relu, Activation::tanh}),
      actor_target_(actor_),
      critic1_(MlpSpec{obs_dim + action_dim, {1}, 1, Activation::relu, Activation::identity}),
      critic2_(critic1_),
      critic1_target_(critic1_),
      critic2_target_(critic1_),
      explore_rng_(0),
      smoothing_rng_(0) {}

Td3Agent::Td3Agent(int obs_dim, int action_dim, std::vector<int> hidden_dims,
                   Td3Config cfg, std::uint64_t seed)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      cfg_(std::move(cfg)),
      actor_(MlpSpec{obs_dim, hidden_dims, action_dim, Activation::relu, Activation::tanh}),
      actor_target_(actor_),
      critic1_(MlpSpec{obs_dim + action_dim, hidden_dims, 1, Activation::relu,
                       Activation::identity}),
      critic2_(critic1_),
      critic1_target_(critic1_),
      critic2_target_(critic1_),
      explore_rng_(Rng::stream(seed, "td3-explore")),
      smoothing_rng_(Rng::stream(seed, "td3-smoothing")) {
  if (cfg_.action_low.empty()) cfg_.action_low.assign(action_dim, -1.0);
  if (cfg_.action_high.empty()) cfg_.action_high.assign(action_dim, 1.0);
  cfg_.validate(action_dim);

  Rng init = Rng::stream(seed, "td3-init");
  actor_ = Mlp::random_init(actor_.spec(), init);
  critic1_ = Mlp::random_init(critic1_.spec(), init);
  critic2_ = Mlp::random_init(critic2_.spec(), init);
  // targets start as exact copies
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
}

std::vector<double> Td3Agent::scale_action(std::span<const double> normalized) const {
  std::vector<double> out(action_dim_);
  for (int i = 0; i < action_dim_; ++i) {
    const double center = 0.5 * (cfg_.action_low[i] + cfg_.action_high[i]);
    const double half = 0.5 * (cfg_.action_high[i] - cfg_.action_low[i]);
    out[i] = std::clamp(center + half * normalized[i], cfg_.action_low[i], cfg_.action_high[i]);
  }
  return out;
}

std::vector<double> Td3Agent::act(std::span<const double> state, bool explore) {
  if (static_cast<int>(state.size()) != obs_dim_) {
    throw std::invalid_argument("Td3Agent::act: state dimension mismatch");
  }
  std::vector<double> normalized = actor_.forward(state);
  if (explore) {
    for (auto& x : normalized) {
      x = std::clamp(x + explore_rng_.normal(0.0, cfg_.exploration_sigma), -1.0, 1.0);
    }
  }
  return scale_action(normalized);
}

std::vector<double> Td3Agent::smoothed_target_action(const Mlp& actor_target,
                                                     std::span<const double> next_state,
                                                     Rng& noise) const {
  std::vector<double> normalized = actor_target.forward(next_state);
  for (auto& x : normalized) {
    const double eps = std::clamp(noise.normal(0.0, cfg_.smoothing_sigma),
                                  -cfg_.smoothing_clip, cfg_.smoothing_clip);
    x = std::clamp(x + eps, -1.0, 1.0);
  }
  return scale_action(normalized);
}

double td3_target(const Mlp& critic1_target, const Mlp& critic2_target,
                  std::span<const double> next_state, std::span<const double> next_action,
                  double reward, bool done, double gamma) {
  if (done) return reward;
  const auto sa = concat(next_state, next_action);
  const double q1 = critic1_target.forward(sa)[0];
  const double q2 = critic2_target.forward(sa)[0];
  return reward + gamma * std::min(q1, q2);
}

CriticGradient critic_loss_gradient(const Mlp& critic, const SampledBatch& batch,
                                    std::span<const double> targets) {
  const std::size_t n = batch.items.size();
  if (n == 0 || targets.size() != n) {
    throw std::invalid_argument("critic_loss_gradient: batch/target size mismatch");
  }
  CriticGradient out;
  out.param_grad.assign(critic.param_count(), 0.0);
  out.q_values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& item = batch.items[i];
    const auto sa = concat(item.experience.state, item.experience.action);
    // single output; derivative of mean_i w_i (y_i - q)^2
    auto res = critic.backward(sa, std::vector<double>{1.0});
    const double q = res.output[0];
    const double err = q - targets[i];
    out.q_values[i] = q;
    out.loss += item.is_weight * err * err / static_cast<double>(n);
    const double coeff = 2.0 * item.is_weight * err / static_cast<double>(n);
    for (std::size_t k = 0; k < out.param_grad.size(); ++k) {
      out.param_grad[k] += coeff * res.param_grad[k];
    }
  }
  return out;
}

ActorGradient actor_objective_gradient(const Mlp& actor, const Mlp& critic1,
                                       const SampledBatch& batch, const Td3Config& cfg) {
  const std::size_t n = batch.items.size();
  if (n == 0) throw std::invalid_argument("actor_objective_gradient: empty batch");
  const int action_dim = actor.spec().output_dim;
  const int obs_dim = actor.spec().input_dim;

  ActorGradient out;
  out.param_grad.assign(actor.param_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> action(action_dim);
  for (const auto& item : batch.items) {
    const auto& s = item.experience.state;
    const auto normalized = actor.forward(s);
    for (int i = 0; i < action_dim; ++i) {
      const double center = 0.5 * (cfg.action_low[i] + cfg.action_high[i]);
      const double half = 0.5 * (cfg.action_high[i] - cfg.action_low[i]);
      action[i] = center + half * normalized[i];
    }
    const auto sa = concat(s, action);
    const auto critic_res = critic1.backward(sa, std::vector<double>{1.0});
    out.objective += inv_n * critic_res.output[0];
    std::vector<double> dj_dnorm(action_dim);
    for (int i = 0; i < action_dim; ++i) {
      const double half = 0.5 * (cfg.action_high[i] - cfg.action_low[i]);
      dj_dnorm[i] = inv_n * critic_res.input_grad[obs_dim + i] * half;
    }
    const auto chain = actor.backward(s, dj_dnorm);
    for (std::size_t k = 0; k < out.param_grad.size(); ++k) {
      out.param_grad[k] += chain.param_grad[k];
    }
  }
  return out;
}

Td3Agent::CriticReport Td3Agent::critic_step(const SampledBatch& batch) {
  const std::size_t n = batch.items.size();
  if (n == 0) throw std::invalid_argument("Td3Agent::critic_step: empty batch");

  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = batch.items[i].experience;
    const auto next_action = smoothed_target_action(actor_target_, e.next_state, smoothing_rng_);
    targets[i] = td3_target(critic1_target_, critic2_target_, e.next_state, next_action,
                            e.reward, e.done, cfg_.gamma);
  }

  const auto g1 = critic_loss_gradient(critic1_, batch, targets);
  const auto g2 = critic_loss_gradient(critic2_, batch, targets);

  CriticReport report;
  report.loss1 = g1.loss;
  report.loss2 = g2.loss;
  report.td_errors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = g1.q_values[i];
    if (cfg_.td_error_min_critics) q = std::min(q, g2.q_values[i]);
    report.td_errors[i] = targets[i] - q;
  }

  const AdamConfig adam{cfg_.critic_lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_epsilon};
  critic1_.adam_step(g1.param_grad, adam);
  critic2_.adam_step(g2.param_grad, adam);
  return report;
}

void Td3Agent::actor_step(const SampledBatch& batch) {
  auto grad = actor_objective_gradient(actor_, critic1_, batch, cfg_);
  // ascend the objective
  for (auto& g : grad.param_grad) g = -g;
  const AdamConfig adam{cfg_.actor_lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_epsilon};
  actor_.adam_step(grad.param_grad, adam);
  ++actor_updates_;
}

Td3Agent::LearnReport Td3Agent::learn(ReplayBuffer& buffer, std::size_t batch_size,
                                      double beta, const CurriculumConfig& curriculum_cfg,
                                      const CurriculumState& curriculum_state) {
  SampledBatch batch = buffer.sample(batch_size, beta);
  auto critic_report = critic_step(batch);

  ++learn_steps_;
  LearnReport report;
  report.critic_loss1 = critic_report.loss1;
  report.critic_loss2 = critic_report.loss2;
  report.td_errors = std::move(critic_report.td_errors);
  for (const auto& item : batch.items) report.slots.push_back(item.slot);

  if (learn_steps_ % cfg_.actor_delay == 0) {
    actor_step(batch);
    actor_target_.soft_update_from(actor_, cfg_.tau_actor);
    critic1_target_.soft_update_from(critic1_, cfg_.tau_critic);
    critic2_target_.soft_update_from(critic2_, cfg_.tau_critic);
    report.actor_updated = true;
  }

  if (buffer.mode() != ReplayMode::uniform) {
    report.new_priorities.resize(batch.items.size());
    for (std::size_t i = 0; i < batch.items.size(); ++i) {
      const double delta = report.td_errors[i];
      const double p = buffer.mode() == ReplayMode::acer
                           ? curriculum::priority(delta, curriculum_cfg, curriculum_state)
                           : per_priority(delta);
      report.new_priorities[i] = p;
      buffer.update_priority(batch.items[i].slot, p);
    }
  }
  return report;
}

namespace {

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("Td3Agent::load: truncated stream");
  return v;
}

constexpr std::uint32_t kAgentMagic = 0x54443301;  // "TD3" + format 1

}  // namespace

void Td3Agent::save(std::ostream& out) const {
  put(out, kAgentMagic);
  put(out, static_cast<std::int32_t>(obs_dim_));
  put(out, static_cast<std::int32_t>(action_dim_));
  put(out, cfg_.gamma);
  put(out, cfg_.tau_actor);
  put(out, cfg_.tau_critic);
  put(out, cfg_.actor_lr);
  put(out, cfg_.critic_lr);
  put(out, static_cast<std::int32_t>(cfg_.actor_delay));
  put(out, cfg_.exploration_sigma);
  put(out, cfg_.smoothing_sigma);
  put(out, cfg_.smoothing_clip);
  put(out, cfg_.adam_beta1);
  put(out, cfg_.adam_beta2);
  put(out, cfg_.adam_epsilon);
  put(out, static_cast<std::uint8_t>(cfg_.td_error_min_critics));
  for (int i = 0; i < action_dim_; ++i) put(out, cfg_.action_low[i]);
  for (int i = 0; i < action_dim_; ++i) put(out, cfg_.action_high[i]);
  put(out, static_cast<std::int64_t>(learn_steps_));
  put(out, static_cast<std::int64_t>(actor_updates_));
  actor_.save(out);
  actor_target_.save(out);
  critic1_.save(out);
  critic2_.save(out);
  critic1_target_.save(out);
  critic2_target_.save(out);
}

Td3Agent Td3Agent::load(std::istream& in) {
  if (get<std::uint32_t>(in) != kAgentMagic) {
    throw std::runtime_error("Td3Agent::load: bad magic");
  }
  const int obs_dim = get<std::int32_t>(in);
  const int action_dim = get<std::int32_t>(in);
  Td3Config cfg;
  cfg.gamma = get<double>(in);
  cfg.tau_actor = get<double>(in);
  cfg.tau_critic = get<double>(in);
  cfg.actor_lr = get<double>(in);
  cfg.critic_lr = get<double>(in);
  cfg.actor_delay = get<std::int32_t>(in);
  cfg.exploration_sigma = get<double>(in);
  cfg.smoothing_sigma = get<double>(in);
  cfg.smoothing_clip = get<double>(in);
  cfg.adam_beta1 = get<double>(in);
  cfg.adam_beta2 = get<double>(in);
  cfg.adam_epsilon = get<double>(in);
  cfg.td_error_min_critics = get<std::uint8_t>(in) != 0;
  cfg.action_low.resize(action_dim);
  cfg.action_high.resize(action_dim);
  for (auto& v : cfg.action_low) v = get<double>(in);
  for (auto& v : cfg.action_high) v = get<double>(in);
  const auto learn_steps = get<std::int64_t>(in);
  const auto actor_updates = get<std::int64_t>(in);

  Td3Agent agent(std::move(cfg), obs_dim, action_dim);
  agent.actor_ = Mlp::load(in);
  agent.actor_target_ = Mlp::load(in);
  agent.critic1_ = Mlp::load(in);
  agent.critic2_ = Mlp::load(in);
  agent.critic1_target_ = Mlp::load(in);
  agent.critic2_target_ = Mlp::load(in);
  agent.learn_steps_ = learn_steps;
  agent.actor_updates_ = actor_updates;
  if (agent.actor_.spec().input_dim != obs_dim ||
      agent.actor_.spec().output_dim != action_dim) {
    throw std::runtime_error("Td3Agent::load: network shapes inconsistent with header");
  }
  return agent;
}

}  // namespace acer
