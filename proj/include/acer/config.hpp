#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acer/curriculum.hpp"
#include "acer/env/toy_env.hpp"
#include "acer/env/uav_env.hpp"
#include "acer/replay_buffer.hpp"
#include "acer/td3.hpp"

namespace acer {

enum class EnvKind { toy, uav };

/// Everything one training run needs. Parsed from a key=value config
/// file; unknown keys are rejected.
struct RunConfig {
  ReplayMode mode = ReplayMode::acer;
  EnvKind env = EnvKind::toy;
  int episodes = 300;
  int max_steps = 200;
  int warmup_episodes = 10;
  int replay_period = 2;    // learn every K timesteps
  std::size_t batch = 64;
  std::size_t temp_pool = 4;
  std::size_t buffer = 20000;
  double alpha = 0.6;
  double beta_start = 0.4;
  double beta_end = 1.0;
  std::size_t refresh = 64;  // priorities refreshed per timestep
  bool synchronous = true;   // inline refresher (reproducible) vs subthread
  EvictionPolicy eviction = EvictionPolicy::stochastic;
  CurriculumConfig curriculum;
  Td3Config td3;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "run_out";
  std::filesystem::path scenario;  // optional uav scenario file

  void validate() const;
};

/// Parse `key = value` lines ('#' comments). Every RunConfig field has
/// a key; unknown keys raise errors naming the offending key.
RunConfig parse_run_config(const std::filesystem::path& file);
RunConfig parse_run_config_text(const std::string& text);

struct Scenario {
  EnvKind env = EnvKind::uav;
  ArenaConfig arena;
  RewardConfig reward;
  ToyConfig toy;
};

/// Scenario files configure the environment for train/eval: arena
/// geometry, obstacle field, reward constants.
Scenario parse_scenario(const std::filesystem::path& file);
Scenario parse_scenario_text(const std::string& text);

const char* replay_mode_name(ReplayMode mode);
ReplayMode replay_mode_from(const std::string& name);
const char* env_kind_name(EnvKind kind);

}  // namespace acer
