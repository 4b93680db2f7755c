#include "acer/metrics.hpp"

#include <cmath>

namespace acer {

double trailing_hit_rate(const std::vector<bool>& successes, std::size_t index,
                         std::size_t window) {
  const std::size_t count = std::min(index + 1, window);
  std::size_t hits = 0;
  for (std::size_t i = index + 1 - count; i <= index; ++i) {
    if (successes[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(count);
}

RunSummary summarize(std::span<const EpisodeRecord> records) {
  RunSummary summary;
  if (records.empty()) return summary;

  for (const auto& r : records) {
    if (r.hit_rate_500 > summary.training_peak) summary.training_peak = r.hit_rate_500;
    if (!summary.convergence_episode && r.hit_rate_500 >= 0.70) {
      summary.convergence_episode = r.episode;
    }
  }

  const std::size_t window = std::min<std::size_t>(1500, records.size());
  summary.tail_window = static_cast<int>(window);
  const std::size_t start = records.size() - window;
  double mean = 0.0;
  for (std::size_t i = start; i < records.size(); ++i) mean += records[i].hit_rate_500;
  mean /= static_cast<double>(window);
  double var = 0.0;
  for (std::size_t i = start; i < records.size(); ++i) {
    const double d = records[i].hit_rate_500 - mean;
    var += d * d;
  }
  var /= static_cast<double>(window);  // population variance
  summary.convergence_result = mean;
  summary.stability = std::sqrt(var);
  return summary;
}

}  // namespace acer
