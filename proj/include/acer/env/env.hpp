#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace acer {

enum class Terminal : std::uint8_t { running, success, collision, out_of_range, timeout };

const char* terminal_name(Terminal t);

struct StepOutcome {
  std::vector<double> observation;
  double reward = 0.0;
  Terminal terminal = Terminal::running;
};

/// Episodic MDP interface shared by the UAV arena and the toy task.
/// Environments are single-actor: one caller resets and steps them.
class Env {
 public:
  virtual ~Env() = default;

  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual const char* name() const = 0;

  /// Starts a new episode; fully determined by the seed.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;

  /// Advances one timestep. Actions are normalized to [-1,1] per
  /// component. Throws if called after a terminal step.
  virtual StepOutcome step(std::span<const double> action) = 0;

  /// CSV header / row for trajectory export.
  virtual std::string trajectory_header() const = 0;
  virtual std::string trajectory_row(int t, double reward, Terminal outcome) const = 0;
};

}  // namespace acer
