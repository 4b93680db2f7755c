#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acer/td3.hpp"

using namespace acer;

namespace {

Td3Config unit_cfg() {
  Td3Config cfg;
  cfg.gamma = 0.9;
  cfg.action_low = {-1.0};
  cfg.action_high = {1.0};
  return cfg;
}

Experience transition(std::vector<double> s, std::vector<double> a, double r,
                      std::vector<double> s2, bool done) {
  Experience e;
  e.state = std::move(s);
  e.action = std::move(a);
  e.reward = r;
  e.next_state = std::move(s2);
  e.done = done;
  return e;
}

SampledBatch batch_of(std::vector<Experience> exps, double weight = 1.0) {
  SampledBatch batch;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    batch.items.push_back(SampledItem{std::move(exps[i]), i, weight, false});
  }
  return batch;
}

SampledBatch random_batch(int n, int obs_dim, int action_dim, Rng& rng, bool weighted) {
  SampledBatch batch;
  for (int i = 0; i < n; ++i) {
    Experience e;
    e.state.resize(obs_dim);
    e.action.resize(action_dim);
    e.next_state.resize(obs_dim);
    for (auto& v : e.state) v = rng.uniform(-1, 1);
    for (auto& v : e.action) v = rng.uniform(-1, 1);
    for (auto& v : e.next_state) v = rng.uniform(-1, 1);
    e.reward = rng.uniform(-2, 2);
    e.done = rng.uniform() < 0.2;
    e.id = static_cast<std::uint64_t>(i);
    batch.items.push_back(
        SampledItem{std::move(e), static_cast<std::size_t>(i),
                    weighted ? rng.uniform(0.2, 1.0) : 1.0, false});
  }
  return batch;
}

// central finite differences of a scalar function of net parameters
template <typename F>
std::vector<double> fd_grad(Mlp net, F&& f, double h = 1e-5) {
  auto params = net.params_mut();
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = f(net);
    params[i] = saved - h;
    const double down = f(net);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_rel_err(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num = std::max(num, std::abs(got[i] - want[i]));
    den = std::max(den, std::abs(want[i]));
  }
  return num / std::max(den, 1e-8);
}

// finite differences across a relu kink are meaningless; same resample
// rule as the nn-core gradient checker
bool near_kink(const Mlp& net, std::span<const double> input) {
  for (double z : net.hidden_preactivations(input)) {
    if (std::abs(z) < 1e-3) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("act: zero-weight actor emits the zero action") {
  Td3Agent agent(3, 1, {8}, unit_cfg(), 1);
  for (auto& p : agent.actor_mut().params_mut()) p = 0.0;
  const auto a = agent.act(std::vector<double>{0.4, -0.2, 0.9}, false);
  CHECK(a[0] == 0.0);
}

TEST_CASE("act: deterministic without exploration") {
  Td3Agent agent(3, 1, {8}, unit_cfg(), 2);
  const std::vector<double> state{0.2, -0.4, 0.8};
  CHECK(agent.act(state, false) == agent.act(state, false));
}

TEST_CASE("act: bounds respected and noise has the configured scale") {
  Td3Config cfg = unit_cfg();
  cfg.exploration_sigma = 0.1;
  cfg.action_low = {-2.0};
  cfg.action_high = {2.0};
  Td3Agent agent(2, 1, {4}, cfg, 3);
  for (auto& p : agent.actor_mut().params_mut()) p = 0.0;  // mean action 0, no clipping

  const std::vector<double> state{0.1, 0.3};
  double sum = 0.0, sum_sq = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto a = agent.act(state, true);
    CHECK(a[0] >= -2.0);
    CHECK(a[0] <= 2.0);
    sum += a[0];
    sum_sq += a[0] * a[0];
  }
  const double mean = sum / draws;
  const double stddev = std::sqrt(sum_sq / draws - mean * mean);
  // noise std in action units = sigma * half-range = 0.1 * 2
  CHECK(stddev == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("act: dimension mismatch throws") {
  Td3Agent agent(3, 1, {8}, unit_cfg(), 1);
  CHECK_THROWS_AS((void)agent.act(std::vector<double>{1.0}, false), std::invalid_argument);
}

TEST_CASE("smoothed target action: noise clipped to the configured bound") {
  Td3Config cfg = unit_cfg();
  cfg.smoothing_sigma = 0.4;  // wide noise so clipping actually engages
  cfg.smoothing_clip = 0.25;
  Td3Agent agent(2, 1, {4}, cfg, 5);
  Td3Agent probe = agent;
  for (auto& p : probe.actor_mut().params_mut()) p = 0.0;

  Rng noise(123);
  bool clip_hit = false;
  for (int i = 0; i < 20000; ++i) {
    const auto a = agent.smoothed_target_action(probe.actor(), std::vector<double>{0.1, 0.2},
                                                noise);
    // target action is 0, so the whole output is the clipped noise
    CHECK(std::abs(a[0]) <= 0.25 + 1e-15);
    if (std::abs(a[0]) > 0.249) clip_hit = true;
  }
  CHECK(clip_hit);
}

TEST_CASE("critic_step: zero nets, unit weights, r=2, gamma=0 give loss 4 per critic") {
  Td3Config cfg = unit_cfg();
  cfg.gamma = 0.0;
  Td3Agent agent(2, 1, {4}, cfg, 7);
  for (auto& p : agent.critic1_mut().params_mut()) p = 0.0;
  for (auto& p : agent.critic2_mut().params_mut()) p = 0.0;

  std::vector<Experience> exps;
  for (int i = 0; i < 8; ++i) {
    exps.push_back(transition({0.1 * i, 0.2}, {0.3}, 2.0, {0.0, 0.0}, false));
  }
  const auto report = agent.critic_step(batch_of(std::move(exps)));
  // gamma = 0 -> y = r = 2; zero critics -> (y - Q)^2 = 4 for both
  CHECK(report.loss1 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(report.loss2 == doctest::Approx(4.0).epsilon(1e-12));
  for (double d : report.td_errors) CHECK(d == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("critic_step: terminal batch bootstraps nothing") {
  Td3Agent agent(2, 1, {8}, unit_cfg(), 11);
  const Mlp critic_before = agent.critic1();
  std::vector<Experience> exps;
  for (int i = 0; i < 4; ++i) {
    exps.push_back(transition({0.5, -0.5}, {0.2}, 3.0 + i, {0.1, 0.1}, true));
  }
  const auto batch = batch_of(std::move(exps));
  const auto report = agent.critic_step(batch);
  // y_i = r_i exactly; delta_i = r_i - Q1(s,a) with the pre-update critic
  for (std::size_t i = 0; i < batch.items.size(); ++i) {
    std::vector<double> sa = batch.items[i].experience.state;
    sa.push_back(batch.items[i].experience.action[0]);
    const double q = critic_before.forward(sa)[0];
    CHECK(report.td_errors[i] ==
          doctest::Approx(3.0 + static_cast<double>(i) - q).epsilon(1e-12));
  }
}

TEST_CASE("critic gradient matches finite differences (weighted loss)") {
  Rng rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Mlp critic = Mlp::random_init(MlpSpec{5, {8, 8}, 1, Activation::relu, Activation::identity},
                                  rng);
    SampledBatch batch;
    do {
      batch = random_batch(6, 3, 2, rng, /*weighted=*/true);
    } while (std::any_of(batch.items.begin(), batch.items.end(), [&](const SampledItem& it) {
      std::vector<double> sa = it.experience.state;
      sa.insert(sa.end(), it.experience.action.begin(), it.experience.action.end());
      return near_kink(critic, sa);
    }));
    std::vector<double> targets(batch.items.size());
    for (auto& t : targets) t = rng.uniform(-2, 2);

    const auto analytic = critic_loss_gradient(critic, batch, targets);
    const auto numeric = fd_grad(critic, [&](const Mlp& net) {
      double loss = 0.0;
      for (std::size_t i = 0; i < batch.items.size(); ++i) {
        const auto& item = batch.items[i];
        std::vector<double> sa = item.experience.state;
        sa.insert(sa.end(), item.experience.action.begin(), item.experience.action.end());
        const double q = net.forward(sa)[0];
        loss += item.is_weight * (q - targets[i]) * (q - targets[i]) /
                static_cast<double>(batch.items.size());
      }
      return loss;
    });
    worst = std::max(worst, max_rel_err(analytic.param_grad, numeric));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("actor gradient matches finite differences (policy objective)") {
  Rng rng(17);
  Td3Config cfg = unit_cfg();
  cfg.action_low = {-1.5, -1.5};
  cfg.action_high = {1.5, 1.5};
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Mlp actor = Mlp::random_init(MlpSpec{3, {8, 8}, 2, Activation::relu, Activation::tanh}, rng);
    Mlp critic = Mlp::random_init(MlpSpec{5, {8, 8}, 1, Activation::relu, Activation::identity},
                                  rng);
    SampledBatch batch;
    do {
      batch = random_batch(6, 3, 2, rng, false);
    } while (std::any_of(batch.items.begin(), batch.items.end(), [&](const SampledItem& it) {
      const auto& s = it.experience.state;
      if (near_kink(actor, s)) return true;
      const auto normalized = actor.forward(s);
      std::vector<double> sa = s;
      for (int i = 0; i < 2; ++i) sa.push_back(1.5 * normalized[i]);
      return near_kink(critic, sa);
    }));

    const auto analytic = actor_objective_gradient(actor, critic, batch, cfg);
    const auto numeric = fd_grad(actor, [&](const Mlp& net) {
      double obj = 0.0;
      for (const auto& item : batch.items) {
        const auto normalized = net.forward(item.experience.state);
        std::vector<double> sa = item.experience.state;
        for (int i = 0; i < 2; ++i) sa.push_back(1.5 * normalized[i]);
        obj += critic.forward(sa)[0] / static_cast<double>(batch.items.size());
      }
      return obj;
    });
    worst = std::max(worst, max_rel_err(analytic.param_grad, numeric));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("actor_step: constant critic leaves the actor almost unchanged") {
  Td3Agent agent(2, 1, {6}, unit_cfg(), 19);
  // constant critic: zero weights -> dQ/da = 0 everywhere
  for (auto& p : agent.critic1_mut().params_mut()) p = 0.0;
  const std::vector<double> before(agent.actor().params().begin(),
                                   agent.actor().params().end());
  Rng rng(1);
  auto batch = random_batch(4, 2, 1, rng, false);
  agent.actor_step(batch);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(agent.actor().params()[i] == doctest::Approx(before[i]).epsilon(1e-12));
  }
}

TEST_CASE("actor_step: converges to the critic's known optimum action") {
  // hand-wired critic Q(s, a) = -|a - 0.3| (exactly representable with
  // two relu units); the optimum action is 0.3
  Td3Config cfg = unit_cfg();
  cfg.actor_lr = 0.01;
  Td3Agent agent(1, 1, {2}, cfg, 23);
  Mlp& critic = agent.critic1_mut();
  auto p = critic.params_mut();
  std::fill(p.begin(), p.end(), 0.0);
  // layer 0: weights [s,a] per hidden unit, then biases
  // h0 = relu(a - 0.3), h1 = relu(-a + 0.3)
  p[0] = 0.0; p[1] = 1.0;   // unit 0 weights
  p[2] = 0.0; p[3] = -1.0;  // unit 1 weights
  p[4] = -0.3; p[5] = 0.3;  // biases
  // output layer: -h0 - h1
  p[6] = -1.0; p[7] = -1.0; p[8] = 0.0;

  Rng rng(29);
  for (int step = 0; step < 3000; ++step) {
    SampledBatch batch;
    for (int i = 0; i < 8; ++i) {
      Experience e;
      e.state = {rng.uniform(-1, 1)};
      e.action = {0.0};
      e.next_state = {0.0};
      batch.items.push_back(SampledItem{std::move(e), 0, 1.0, false});
    }
    agent.actor_step(batch);
  }
  for (double s : {-0.8, -0.2, 0.0, 0.5, 0.9}) {
    const auto a = agent.act(std::vector<double>{s}, false);
    CHECK(a[0] == doctest::Approx(0.3).epsilon(0.04));
  }
}

TEST_CASE("twin-min: target is a lower bound for both critic targets") {
  Td3Config cfg = unit_cfg();
  cfg.smoothing_sigma = 0.0;  // deterministic target action
  Td3Agent agent(2, 1, {8}, cfg, 31);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> s2{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double r = rng.uniform(-2, 2);
    Rng no_noise(0);
    const auto a2 = agent.smoothed_target_action(agent.actor_target(), s2, no_noise);
    const double y = td3_target(agent.critic1_target(), agent.critic2_target(), s2, a2, r,
                                false, cfg.gamma);
    std::vector<double> sa = s2;
    sa.push_back(a2[0]);
    const double y1 = r + cfg.gamma * agent.critic1_target().forward(sa)[0];
    const double y2 = r + cfg.gamma * agent.critic2_target().forward(sa)[0];
    CHECK(y <= y1 + 1e-15);
    CHECK(y <= y2 + 1e-15);
    CHECK(y == doctest::Approx(std::min(y1, y2)).epsilon(1e-12));
  }
}

TEST_CASE("learn: actor delay semantics and target soft updates") {
  ReplayBuffer buffer({256, ReplayMode::uniform, 0.6, 0, EvictionPolicy::stochastic, 1});
  Rng rng(37);
  for (int i = 0; i < 64; ++i) {
    Experience e;
    e.state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    e.action = {rng.uniform(-1, 1)};
    e.reward = rng.uniform(-1, 1);
    e.next_state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    e.done = false;
    buffer.store(std::move(e));
  }
  Td3Config cfg = unit_cfg();
  cfg.actor_delay = 2;
  Td3Agent agent(2, 1, {8}, cfg, 41);
  CurriculumConfig ccfg;
  const CurriculumState cstate = curriculum::initial_state(ccfg);

  const std::vector<double> actor_before(agent.actor().params().begin(),
                                         agent.actor().params().end());
  const auto r1 = agent.learn(buffer, 16, 0.4, ccfg, cstate);
  CHECK_FALSE(r1.actor_updated);
  CHECK(agent.actor_updates() == 0);
  // actor and targets untouched on the non-delayed step
  for (std::size_t i = 0; i < actor_before.size(); ++i) {
    CHECK(agent.actor().params()[i] == actor_before[i]);
  }

  const std::vector<double> at_before(agent.actor_target().params().begin(),
                                      agent.actor_target().params().end());
  const std::vector<double> c1t_before(agent.critic1_target().params().begin(),
                                       agent.critic1_target().params().end());
  const std::vector<double> c1_pre(agent.critic1().params().begin(),
                                   agent.critic1().params().end());
  (void)c1_pre;
  const auto r2 = agent.learn(buffer, 16, 0.4, ccfg, cstate);
  CHECK(r2.actor_updated);
  CHECK(agent.actor_updates() == 1);
  CHECK(agent.learn_steps() == 2);

  // theta' = tau*theta + (1-tau)*theta' with the post-update eval nets
  for (std::size_t i = 0; i < at_before.size(); ++i) {
    const double expect = cfg.tau_actor * agent.actor().params()[i] +
                          (1.0 - cfg.tau_actor) * at_before[i];
    CHECK(agent.actor_target().params()[i] == doctest::Approx(expect).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < c1t_before.size(); ++i) {
    const double expect = cfg.tau_critic * agent.critic1().params()[i] +
                          (1.0 - cfg.tau_critic) * c1t_before[i];
    CHECK(agent.critic1_target().params()[i] == doctest::Approx(expect).epsilon(1e-12));
  }

  // delay property over many learns
  for (int k = 0; k < 7; ++k) (void)agent.learn(buffer, 16, 0.4, ccfg, cstate);
  CHECK(agent.actor_updates() == agent.learn_steps() / cfg.actor_delay);
}

TEST_CASE("learn: priorities written per mode") {
  CurriculumConfig ccfg;
  CurriculumState cstate = curriculum::initial_state(ccfg);
  cstate.c = 7.0;
  Rng rng(43);

  const auto fill = [&](ReplayBuffer& buffer) {
    for (int i = 0; i < 32; ++i) {
      Experience e;
      e.state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      e.action = {rng.uniform(-1, 1)};
      e.reward = rng.uniform(-1, 1);
      e.next_state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      buffer.store(std::move(e));
    }
  };

  SUBCASE("uniform mode leaves stored priorities untouched") {
    ReplayBuffer buffer({64, ReplayMode::uniform, 0.6, 0, EvictionPolicy::stochastic, 2});
    fill(buffer);
    const auto before = buffer.all_priorities();
    Td3Agent agent(2, 1, {8}, unit_cfg(), 47);
    const auto report = agent.learn(buffer, 8, 0.4, ccfg, cstate);
    CHECK(report.new_priorities.empty());
    CHECK(buffer.all_priorities() == before);
  }

  SUBCASE("acer mode writes curriculum priorities from the returned deltas") {
    ReplayBuffer buffer({64, ReplayMode::acer, 0.6, 3, EvictionPolicy::stochastic, 3});
    fill(buffer);
    Td3Agent agent(2, 1, {8}, unit_cfg(), 53);
    const auto report = agent.learn(buffer, 8, 0.4, ccfg, cstate);
    REQUIRE(report.new_priorities.size() == 8);
    for (std::size_t i = 0; i < report.slots.size(); ++i) {
      const double expect = curriculum::priority(report.td_errors[i], cstate.c, ccfg.k1, ccfg.k2);
      CHECK(report.new_priorities[i] == expect);
      CHECK(buffer.priority_of(report.slots[i]) == expect);
    }
  }

  SUBCASE("per mode writes clipped priorities") {
    ReplayBuffer buffer({64, ReplayMode::per_clipped, 0.6, 0, EvictionPolicy::stochastic, 4});
    fill(buffer);
    Td3Agent agent(2, 1, {8}, unit_cfg(), 59);
    const auto report = agent.learn(buffer, 8, 0.4, ccfg, cstate);
    for (std::size_t i = 0; i < report.slots.size(); ++i) {
      CHECK(buffer.priority_of(report.slots[i]) == per_priority(report.td_errors[i]));
    }
  }
}

TEST_CASE("learn: insufficient experiences error") {
  ReplayBuffer buffer({64, ReplayMode::acer, 0.6, 2, EvictionPolicy::stochastic, 5});
  Td3Agent agent(2, 1, {8}, unit_cfg(), 61);
  CurriculumConfig ccfg;
  CHECK_THROWS_AS(
      (void)agent.learn(buffer, 8, 0.4, ccfg, curriculum::initial_state(ccfg)),
      std::runtime_error);
}

TEST_CASE("agent serialization: bit-exact round trip") {
  Td3Agent agent(3, 2, {8, 8}, Td3Config{.action_low = {-1, -1}, .action_high = {1, 1}}, 67);
  std::stringstream ss;
  agent.save(ss);
  Td3Agent loaded = Td3Agent::load(ss);
  CHECK(loaded.obs_dim() == 3);
  CHECK(loaded.action_dim() == 2);
  for (std::size_t i = 0; i < agent.actor().param_count(); ++i) {
    CHECK(loaded.actor().params()[i] == agent.actor().params()[i]);
  }
  for (std::size_t i = 0; i < agent.critic2().param_count(); ++i) {
    CHECK(loaded.critic2().params()[i] == agent.critic2().params()[i]);
  }
  // same state on both sides: identical actions
  const std::vector<double> s{0.3, -0.3, 0.7};
  CHECK(loaded.act(s, false) == agent.act(s, false));
}

TEST_CASE("targets start as exact copies of the eval nets") {
  Td3Agent agent(4, 2, {16}, Td3Config{.action_low = {-1, -1}, .action_high = {1, 1}}, 71);
  CHECK(agent.actor() == agent.actor_target());
  CHECK(agent.critic1() == agent.critic1_target());
  CHECK(agent.critic2() == agent.critic2_target());
  CHECK_FALSE(agent.critic1() == agent.critic2());
}
