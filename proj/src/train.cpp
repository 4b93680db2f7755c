#include "acer/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "acer/checkpoint.hpp"
#include "acer/svg.hpp"
#include "json.hpp"

namespace acer {

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t refresh_noise_salt(std::uint64_t seed) {
  return Rng::split_mix(seed ^ Rng::fnv1a("refresh-noise"));
}

}  // namespace

std::unique_ptr<Env> make_env(const RunConfig& cfg) {
  if (cfg.env == EnvKind::toy) {
    ToyConfig toy;
    toy.max_steps = cfg.max_steps;
    return std::make_unique<ToyEnv>(toy);
  }
  Scenario sc;
  if (!cfg.scenario.empty()) sc = parse_scenario(cfg.scenario);
  sc.arena.max_steps = cfg.max_steps;
  return std::make_unique<UavEnv>(sc.arena, sc.reward);
}

std::unique_ptr<Env> make_env(const Scenario& scenario) {
  if (scenario.env == EnvKind::toy) return std::make_unique<ToyEnv>(scenario.toy);
  return std::make_unique<UavEnv>(scenario.arena, scenario.reward);
}

double linear_beta(const RunConfig& cfg, int episode) {
  const int first = cfg.warmup_episodes + 1;
  if (episode <= first) return cfg.beta_start;
  if (episode >= cfg.episodes || cfg.episodes == first) return cfg.beta_end;
  const double t = static_cast<double>(episode - first) / (cfg.episodes - first);
  return cfg.beta_start + (cfg.beta_end - cfg.beta_start) * t;
}

void write_episode_csv(const std::filesystem::path& path,
                       std::span<const EpisodeRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << "# schema: episodes/1\n";
  out << "episode,steps,return,outcome,hit_rate_500,c,beta\n";
  char buf[48];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.hit_rate_500);
    out << r.episode << ',' << r.steps << ',' << fmt_g17(r.episode_return) << ','
        << terminal_name(r.outcome) << ',' << buf << ',' << fmt_g17(r.curriculum_c) << ','
        << fmt_g17(r.beta) << '\n';
  }
}

TrainResult train(const RunConfig& cfg, const TrainHooks* hooks, bool write_artifacts) {
  cfg.validate();
  auto env = make_env(cfg);

  Td3Agent agent(env->observation_dim(), env->action_dim(), cfg.hidden, cfg.td3, cfg.seed);
  ReplayBuffer buffer(ReplayBuffer::Config{cfg.buffer, cfg.mode, cfg.alpha, cfg.temp_pool,
                                           cfg.eviction, cfg.seed});
  CurriculumState cstate = curriculum::initial_state(cfg.curriculum);
  const std::uint64_t noise_salt = refresh_noise_salt(cfg.seed);

  const bool refreshing = cfg.mode == ReplayMode::acer && cfg.refresh > 0;
  RefreshConfig rcfg{cfg.refresh, refreshing};
  Refresher refresher(buffer, cfg.curriculum, rcfg, agent.config(), noise_salt);
  refresher.publish(make_snapshot(agent, 0));
  refresher.set_curriculum(cstate);
  if (refreshing && !cfg.synchronous) refresher.start();

  Rng env_seeds = Rng::stream(cfg.seed, "env-episodes");
  Rng warmup_rng = Rng::stream(cfg.seed, "warmup-actions");

  TrainResult result;
  result.records.reserve(cfg.episodes);
  std::vector<bool> successes;
  successes.reserve(cfg.episodes);
  long global_step = 0;

  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool warmup = ep <= cfg.warmup_episodes;
    const double beta = linear_beta(cfg, ep);
    const double c_in_effect = cstate.c;

    std::vector<double> obs = env->reset(env_seeds.next_u64());
    double ep_return = 0.0;
    int steps = 0;
    Terminal outcome = Terminal::running;

    for (int t = 1; t <= cfg.max_steps; ++t) {
      std::vector<double> action;
      if (warmup) {
        action.resize(env->action_dim());
        for (auto& a : action) a = warmup_rng.uniform(-1.0, 1.0);
      } else {
        action = agent.act(obs, /*explore=*/true);
      }
      StepOutcome out = env->step(action);

      Experience exp;
      exp.state = std::move(obs);
      exp.action = std::move(action);
      exp.reward = out.reward;
      exp.next_state = out.observation;
      exp.done = out.terminal != Terminal::running;
      buffer.store(std::move(exp));

      if (!warmup && t % cfg.replay_period == 0 && buffer.size() >= cfg.batch) {
        agent.learn(buffer, cfg.batch, beta, cfg.curriculum, cstate);
        ++result.learn_calls;
        refresher.publish(make_snapshot(agent, agent.learn_steps()));
      }

      if (refreshing) {
        if (cfg.synchronous) refresher.tick_sync();
        else refresher.signal_tick();
      }

      ++global_step;
      if (hooks && hooks->on_step) {
        TrainContext ctx{global_step, ep, agent, buffer, cstate, cfg};
        hooks->on_step(ctx);
      }

      obs = std::move(out.observation);
      ep_return += out.reward;
      steps = t;
      if (out.terminal != Terminal::running) {
        outcome = out.terminal;
        break;
      }
    }
    if (outcome == Terminal::running) outcome = Terminal::timeout;

    successes.push_back(outcome == Terminal::success);
    const double hit_rate = trailing_hit_rate(successes, successes.size() - 1);

    cstate = curriculum::advance_episode(cstate, cfg.curriculum);
    refresher.set_curriculum(cstate);

    const auto t1 = std::chrono::steady_clock::now();
    EpisodeRecord rec;
    rec.episode = ep;
    rec.steps = steps;
    rec.episode_return = ep_return;
    rec.outcome = outcome;
    rec.hit_rate_500 = hit_rate;
    rec.curriculum_c = c_in_effect;
    rec.beta = beta;
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.records.push_back(std::move(rec));
  }

  refresher.stop();
  result.refresh_updates = refresher.updates_applied();
  result.summary = summarize(result.records);
  result.out_dir = cfg.out_dir;

  if (write_artifacts) {
    std::filesystem::create_directories(cfg.out_dir);
    write_episode_csv(cfg.out_dir / "episodes.csv", result.records);

    {
      std::ofstream timing(cfg.out_dir / "timing.csv");
      timing << "episode,wall_ms\n";
      for (const auto& r : result.records) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.3f", r.wall_ms);
        timing << r.episode << ',' << buf << '\n';
      }
    }

    nlohmann::json summary{
        {"schema", "summary/1"},
        {"mode", replay_mode_name(cfg.mode)},
        {"env", env_kind_name(cfg.env)},
        {"episodes", cfg.episodes},
        {"seed", cfg.seed},
        {"training_peak", result.summary.training_peak},
        {"convergence_episode", nullptr},
        {"stability", result.summary.stability},
        {"convergence_result", result.summary.convergence_result},
        {"tail_window", result.summary.tail_window},
        {"learn_calls", result.learn_calls},
        {"refresh_updates", result.refresh_updates},
    };
    if (result.summary.convergence_episode) {
      summary["convergence_episode"] = *result.summary.convergence_episode;
    }
    std::ofstream(cfg.out_dir / "summary.json") << summary.dump(2) << '\n';

    SvgSeries hits;
    hits.label = "hit rate (trailing 500)";
    for (const auto& r : result.records) {
      hits.x.push_back(r.episode);
      hits.y.push_back(r.hit_rate_500);
    }
    write_line_chart(cfg.out_dir / "hit_rate.svg",
                     std::string("Hit rate - ") + replay_mode_name(cfg.mode), "episode",
                     "hit rate", {hits});

    save_checkpoint(cfg.out_dir / "checkpoint_final.bin", agent, env->name());
  }
  return result;
}

EvalResult evaluate_agent(Td3Agent& agent, Env& env, int episodes, std::uint64_t seed,
                          const std::filesystem::path& out_dir, int trajectories,
                          bool write_artifacts) {
  if (agent.obs_dim() != env.observation_dim() || agent.action_dim() != env.action_dim()) {
    throw std::runtime_error("evaluate: checkpoint does not match environment dimensions");
  }
  if (write_artifacts) std::filesystem::create_directories(out_dir);

  Rng env_seeds = Rng::stream(seed, "eval-episodes");
  EvalResult result;
  result.episodes = episodes;
  for (int ep = 1; ep <= episodes; ++ep) {
    std::vector<double> obs = env.reset(env_seeds.next_u64());
    Terminal outcome = Terminal::running;
    std::ostringstream rows;
    for (int t = 1; outcome == Terminal::running; ++t) {
      const auto action = agent.act(obs, /*explore=*/false);
      StepOutcome out = env.step(action);
      outcome = out.terminal;
      if (ep <= trajectories) rows << env.trajectory_row(t, out.reward, out.terminal) << '\n';
      obs = std::move(out.observation);
    }
    if (outcome == Terminal::success) ++result.successes;
    if (write_artifacts && ep <= trajectories) {
      std::ofstream traj(out_dir / ("trajectory_ep" + std::to_string(ep) + ".csv"));
      traj << env.trajectory_header() << '\n' << rows.str();
    }
  }
  result.hit_rate = episodes > 0 ? static_cast<double>(result.successes) / episodes : 0.0;

  if (write_artifacts) {
    nlohmann::json summary{{"schema", "eval/1"},
                           {"episodes", result.episodes},
                           {"successes", result.successes},
                           {"hit_rate", result.hit_rate}};
    std::ofstream(out_dir / "eval_summary.json") << summary.dump(2) << '\n';
  }
  return result;
}

EvalResult evaluate(const std::filesystem::path& checkpoint_file, const Scenario& scenario,
                    int episodes, std::uint64_t seed, const std::filesystem::path& out_dir) {
  Checkpoint ckpt = load_checkpoint(checkpoint_file);
  auto env = make_env(scenario);
  if (ckpt.env_name != env->name()) {
    throw std::runtime_error("evaluate: checkpoint was trained on '" + ckpt.env_name +
                             "' but scenario is '" + env->name() + "'");
  }
  return evaluate_agent(ckpt.agent, *env, episodes, seed, out_dir);
}

DiagnoseResult diagnose_priorities(RunConfig cfg, std::vector<long> snapshot_steps,
                                   bool write_artifacts) {
  if (cfg.mode == ReplayMode::uniform) {
    throw std::runtime_error("diagnose: requires a prioritized mode (per or acer)");
  }
  cfg.synchronous = true;  // snapshots must see a quiescent buffer

  DiagnoseResult result;
  const std::set<long> wanted(snapshot_steps.begin(), snapshot_steps.end());
  const std::uint64_t salt = refresh_noise_salt(cfg.seed);

  TrainHooks hooks;
  hooks.on_step = [&](TrainContext& ctx) {
    if (!wanted.count(ctx.global_step) || ctx.buffer.size() == 0) return;
    PrioritySnapshot snap;
    snap.step = ctx.global_step;
    snap.stored = ctx.buffer.all_priorities();
    const auto net_snap = make_snapshot(ctx.agent, ctx.agent.learn_steps());
    snap.oracle = oracle_priorities(ctx.buffer, net_snap, ctx.agent.config(), cfg.curriculum,
                                    ctx.curriculum, salt);
    double gap = 0.0;
    for (std::size_t i = 0; i < snap.stored.size(); ++i) {
      gap += std::abs(snap.stored[i] - snap.oracle[i]);
    }
    snap.mean_abs_priority_gap = gap / static_cast<double>(snap.stored.size());
    snap.mean_abs_probability_gap = probability_gap(ctx.buffer, snap.oracle).mean_abs_gap;
    result.snapshots.push_back(std::move(snap));
  };

  result.training = train(cfg, &hooks, write_artifacts);

  if (write_artifacts) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir / "priorities.csv");
    out << "training_step,slot,stored_priority,oracle_priority\n";
    for (const auto& snap : result.snapshots) {
      for (std::size_t s = 0; s < snap.stored.size(); ++s) {
        out << snap.step << ',' << s << ',' << fmt_g17(snap.stored[s]) << ','
            << fmt_g17(snap.oracle[s]) << '\n';
      }
    }
    for (const auto& snap : result.snapshots) {
      auto stored = snap.stored;
      auto oracle = snap.oracle;
      std::sort(stored.rbegin(), stored.rend());
      std::sort(oracle.rbegin(), oracle.rend());
      SvgSeries s1{"stored", {}, {}, "#d62728"};
      SvgSeries s2{"oracle", {}, {}, "#1f77b4"};
      for (std::size_t i = 0; i < stored.size(); ++i) {
        s1.x.push_back(static_cast<double>(i));
        s1.y.push_back(stored[i]);
        s2.x.push_back(static_cast<double>(i));
        s2.y.push_back(oracle[i]);
      }
      write_line_chart(cfg.out_dir / ("priority_dist_step" + std::to_string(snap.step) + ".svg"),
                       "Sorted priority distribution @ step " + std::to_string(snap.step),
                       "rank", "priority", {s1, s2});
    }
  }
  return result;
}

SweepResult sweep(const RunConfig& base, const std::string& axis,
                  const std::vector<double>& values, int seeds, bool write_artifacts) {
  const std::set<std::string> axes{"temp_pool", "refresh", "c_init", "c_incr", "k1", "k2"};
  if (!axes.count(axis)) {
    throw std::runtime_error("sweep: invalid axis '" + axis +
                             "' (expected temp_pool|refresh|c_init|c_incr|k1|k2)");
  }
  if (values.empty()) throw std::runtime_error("sweep: no values given");
  if (seeds < 1) throw std::runtime_error("sweep: seeds must be >= 1");

  SweepResult result;
  result.axis = axis;
  for (double value : values) {
    SweepRow row;
    row.value = value;
    row.seeds = seeds;
    double ct_sum = 0.0;
    for (int si = 0; si < seeds; ++si) {
      RunConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(si);
      if (axis == "temp_pool") cfg.temp_pool = static_cast<std::size_t>(value);
      else if (axis == "refresh") cfg.refresh = static_cast<std::size_t>(value);
      else if (axis == "c_init") cfg.curriculum.c_init = value;
      else if (axis == "c_incr") cfg.curriculum.c_incr = value;
      else if (axis == "k1") cfg.curriculum.k1 = value;
      else if (axis == "k2") cfg.curriculum.k2 = value;
      char sub[64];
      std::snprintf(sub, sizeof(sub), "%s_%g_seed%d", axis.c_str(), value, si);
      cfg.out_dir = base.out_dir / sub;
      const TrainResult run = train(cfg, nullptr, write_artifacts);
      row.mean_tp += run.summary.training_peak;
      row.mean_sc += run.summary.stability;
      row.mean_cr += run.summary.convergence_result;
      if (run.summary.convergence_episode) {
        ct_sum += *run.summary.convergence_episode;
        ++row.converged;
      }
    }
    row.mean_tp /= seeds;
    row.mean_sc /= seeds;
    row.mean_cr /= seeds;
    if (row.converged > 0) row.mean_ct = ct_sum / row.converged;
    result.rows.push_back(row);
  }

  if (write_artifacts) {
    std::filesystem::create_directories(base.out_dir);
    std::ofstream out(base.out_dir / "sweep.csv");
    out << "axis,value,TP,CT,SC,CR,seeds,converged\n";
    char buf[64];
    for (const auto& row : result.rows) {
      out << axis << ',' << row.value << ',';
      std::snprintf(buf, sizeof(buf), "%.6f", row.mean_tp);
      out << buf << ',';
      if (row.mean_ct) {
        std::snprintf(buf, sizeof(buf), "%.1f", *row.mean_ct);
        out << buf;
      } else {
        out << "-";
      }
      std::snprintf(buf, sizeof(buf), ",%.6f", row.mean_sc);
      out << buf;
      std::snprintf(buf, sizeof(buf), ",%.6f", row.mean_cr);
      out << buf << ',' << row.seeds << ',' << row.converged << '\n';
    }
  }
  return result;
}

}  // namespace acer
