#pragma once

#include <optional>
#include <span>
#include <vector>

#include "acer/env/env.hpp"

namespace acer {

struct EpisodeRecord {
  int episode = 0;  // 1-based
  int steps = 0;
  double episode_return = 0.0;
  Terminal outcome = Terminal::running;
  double hit_rate_500 = 0.0;  // trailing window, shorter early in training
  double curriculum_c = 0.0;
  double beta = 0.0;
  double wall_ms = 0.0;  // kept out of episodes.csv (not reproducible)
};

struct RunSummary {
  double training_peak = 0.0;                  // max trailing hit rate seen
  std::optional<int> convergence_episode;      // first episode with rate >= 0.70
  double stability = 0.0;                      // population std over the tail window
  double convergence_result = 0.0;             // mean over the tail window
  int tail_window = 0;                         // min(1500, episodes)
};

/// Fraction of successes in the trailing `window` episodes ending at
/// `index` (0-based) inclusive; uses all available episodes when fewer.
double trailing_hit_rate(const std::vector<bool>& successes, std::size_t index,
                         std::size_t window = 500);

/// TP / CT / SC / CR over a finished run. SC and CR use the last 1,500
/// episodes, or every episode when the run is shorter.
RunSummary summarize(std::span<const EpisodeRecord> records);

}  // namespace acer
