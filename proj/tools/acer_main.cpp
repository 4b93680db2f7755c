// Command-line front end: train / eval / diagnose / sweep.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acer/checkpoint.hpp"
#include "acer/config.hpp"
#include "acer/train.hpp"

namespace {

void apply_overrides(acer::RunConfig& cfg, const std::string& mode, long seed,
                     const std::string& out) {
  if (!mode.empty()) cfg.mode = acer::replay_mode_from(mode);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) cfg.out_dir = out;
  cfg.validate();
}

void print_summary(const acer::TrainResult& result) {
  const auto& s = result.summary;
  std::printf("episodes:            %zu\n", result.records.size());
  std::printf("training peak (TP):  %.4f\n", s.training_peak);
  if (s.convergence_episode) {
    std::printf("convergence (CT):    episode %d\n", *s.convergence_episode);
  } else {
    std::printf("convergence (CT):    never reached 70%%\n");
  }
  std::printf("stability (SC):      %.6f (last %d episodes)\n", s.stability, s.tail_window);
  std::printf("result (CR):         %.4f (last %d episodes)\n", s.convergence_result,
              s.tail_window);
  std::printf("learn calls:         %ld\n", result.learn_calls);
  std::printf("refresh updates:     %ld\n", result.refresh_updates);
  std::printf("artifacts:           %s\n", result.out_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ACER-TD3 training and diagnostics"};
  app.require_subcommand(1);

  std::string config_file, mode_override, out_override, checkpoint_file, scenario_file;
  std::string sweep_axis;
  long seed_override = -1;
  int episodes = 1000;
  int sweep_seeds = 3;
  std::vector<long> diag_steps;
  std::vector<double> sweep_values;

  auto* train_cmd = app.add_subcommand("train", "Run one training");
  train_cmd->add_option("--config", config_file, "run config file")->required();
  train_cmd->add_option("--seed", seed_override, "override seed");
  train_cmd->add_option("--mode", mode_override, "override mode (uniform|per|acer)");
  train_cmd->add_option("--out", out_override, "override output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint_file, "checkpoint file")->required();
  eval_cmd->add_option("--scenario", scenario_file, "scenario file")->required();
  eval_cmd->add_option("--episodes", episodes, "episodes to run");
  eval_cmd->add_option("--seed", seed_override, "evaluation seed");
  eval_cmd->add_option("--out", out_override, "output directory");

  auto* diag_cmd = app.add_subcommand("diagnose", "Stored vs true priority snapshots");
  diag_cmd->add_option("--config", config_file, "run config file")->required();
  diag_cmd->add_option("--steps", diag_steps, "global timesteps to snapshot")->required();
  diag_cmd->add_option("--seed", seed_override, "override seed");
  diag_cmd->add_option("--out", out_override, "override output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "Hyperparameter sweep");
  sweep_cmd->add_option("--config", config_file, "base run config file")->required();
  sweep_cmd
      ->add_option("--axis", sweep_axis, "temp_pool|refresh|c_init|c_incr|k1|k2")
      ->required();
  sweep_cmd->add_option("--values", sweep_values, "axis values")->required();
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per value");
  sweep_cmd->add_option("--out", out_override, "override output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      acer::RunConfig cfg = acer::parse_run_config(config_file);
      apply_overrides(cfg, mode_override, seed_override, out_override);
      print_summary(acer::train(cfg));
    } else if (eval_cmd->parsed()) {
      const auto scenario = acer::parse_scenario(scenario_file);
      const std::uint64_t seed = seed_override >= 0 ? seed_override : 7;
      const std::string out = out_override.empty() ? "eval_out" : out_override;
      const auto result = acer::evaluate(checkpoint_file, scenario, episodes, seed, out);
      std::printf("episodes:  %d\nsuccesses: %d\nhit rate:  %.4f\n", result.episodes,
                  result.successes, result.hit_rate);
    } else if (diag_cmd->parsed()) {
      acer::RunConfig cfg = acer::parse_run_config(config_file);
      apply_overrides(cfg, "", seed_override, out_override);
      const auto result = acer::diagnose_priorities(cfg, diag_steps);
      for (const auto& snap : result.snapshots) {
        std::printf("step %ld: mean |stored-oracle| priority gap %.6f, probability gap %.3e\n",
                    snap.step, snap.mean_abs_priority_gap, snap.mean_abs_probability_gap);
      }
    } else if (sweep_cmd->parsed()) {
      acer::RunConfig cfg = acer::parse_run_config(config_file);
      apply_overrides(cfg, "", seed_override, out_override);
      const auto result = acer::sweep(cfg, sweep_axis, sweep_values, sweep_seeds);
      std::printf("%-10s %-10s %-8s %-10s %-8s %-8s\n", sweep_axis.c_str(), "TP", "CT", "SC",
                  "CR", "conv");
      for (const auto& row : result.rows) {
        char ct[32];
        if (row.mean_ct) std::snprintf(ct, sizeof(ct), "%.1f", *row.mean_ct);
        else std::snprintf(ct, sizeof(ct), "-");
        std::printf("%-10g %-10.4f %-8s %-10.6f %-8.4f %d/%d\n", row.value, row.mean_tp, ct,
                    row.mean_sc, row.mean_cr, row.converged, row.seeds);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
