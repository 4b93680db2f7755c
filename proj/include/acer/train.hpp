#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "acer/config.hpp"
#include "acer/metrics.hpp"
#include "acer/refresh.hpp"

namespace acer {

/// Environment factory for a training run (toy defaults or uav arena
/// from the run's scenario file; episode cap taken from the run config).
std::unique_ptr<Env> make_env(const RunConfig& cfg);

/// Environment from a standalone scenario (used by eval).
std::unique_ptr<Env> make_env(const Scenario& scenario);

/// Live view of the training loop for step hooks (diagnostics).
struct TrainContext {
  long global_step;
  int episode;
  Td3Agent& agent;
  ReplayBuffer& buffer;
  const CurriculumState& curriculum;
  const RunConfig& cfg;
};

struct TrainHooks {
  std::function<void(TrainContext&)> on_step;
};

struct TrainResult {
  std::vector<EpisodeRecord> records;
  RunSummary summary;
  long learn_calls = 0;
  long refresh_updates = 0;
  std::filesystem::path out_dir;
};

/// Importance-sampling exponent for an episode: beta_start at the first
/// post-warmup episode, annealed linearly to beta_end at the last one.
double linear_beta(const RunConfig& cfg, int episode);

/**
 * Full training run: warmup episodes act randomly without learning,
 * then the agent learns every replay_period timesteps; the refresher
 * (acer mode) reprioritizes `refresh` experiences per timestep; the
 * curriculum factor advances on its episode schedule.
 *
 * With write_artifacts set, emits episodes.csv, timing.csv,
 * summary.json, hit_rate.svg and checkpoint_final.bin under
 * cfg.out_dir.
 */
TrainResult train(const RunConfig& cfg, const TrainHooks* hooks = nullptr,
                  bool write_artifacts = true);

void write_episode_csv(const std::filesystem::path& path,
                       std::span<const EpisodeRecord> records);

struct EvalResult {
  double hit_rate = 0.0;
  int episodes = 0;
  int successes = 0;
};

/// Deterministic-policy rollouts; writes per-episode trajectory CSVs
/// for the first `trajectories` episodes plus eval_summary.json.
EvalResult evaluate_agent(Td3Agent& agent, Env& env, int episodes, std::uint64_t seed,
                          const std::filesystem::path& out_dir, int trajectories = 10,
                          bool write_artifacts = true);

EvalResult evaluate(const std::filesystem::path& checkpoint_file, const Scenario& scenario,
                    int episodes, std::uint64_t seed, const std::filesystem::path& out_dir);

struct PrioritySnapshot {
  long step = 0;
  std::vector<double> stored;
  std::vector<double> oracle;
  double mean_abs_priority_gap = 0.0;   // mean |stored - oracle|
  double mean_abs_probability_gap = 0.0;  // mean |P_oracle - P_stored|
};

struct DiagnoseResult {
  std::vector<PrioritySnapshot> snapshots;
  TrainResult training;
};

/**
 * Trains with the given config (forced to synchronous refresh) and, at
 * each listed global timestep, freezes learning and recomputes every
 * stored experience's priority with the current networks. Emits
 * priorities.csv with (training_step, slot, stored_priority,
 * oracle_priority) rows and a sorted-distribution overlay SVG per
 * snapshot step.
 */
DiagnoseResult diagnose_priorities(RunConfig cfg, std::vector<long> snapshot_steps,
                                   bool write_artifacts = true);

struct SweepRow {
  double value = 0.0;
  double mean_tp = 0.0;
  std::optional<double> mean_ct;  // over converged seeds; absent if none
  double mean_sc = 0.0;
  double mean_cr = 0.0;
  int seeds = 0;
  int converged = 0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;
};

/// Grid sweep over one hyperparameter axis
/// (temp_pool | refresh | c_init | c_incr | k1 | k2), averaging
/// TP/CT/SC/CR over `seeds` runs per value. Writes sweep.csv.
SweepResult sweep(const RunConfig& base, const std::string& axis,
                  const std::vector<double>& values, int seeds, bool write_artifacts = true);

}  // namespace acer
