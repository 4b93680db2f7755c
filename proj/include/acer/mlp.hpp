#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "acer/rng.hpp"

namespace acer {

enum class Activation : std::uint8_t { relu, tanh, identity };

/**
 * Shape of a dense feed-forward network. All layers are fully
 * connected; hidden layers share one activation, the output layer has
 * its own (identity or tanh).
 */
struct MlpSpec {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int output_dim = 0;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::identity;

  /// Layer sizes including input and output, e.g. {12, 64, 64, 2}.
  std::vector<int> layer_sizes() const;

  /// Total number of parameters: sum over layers of fan_in*fan_out + fan_out.
  std::size_t param_count() const;

  /// Throws std::invalid_argument on non-positive dims, empty hidden
  /// list, or an unsupported activation pairing.
  void validate() const;

  bool operator==(const MlpSpec&) const = default;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/**
 * Dense MLP with a flat parameter vector and built-in Adam state.
 *
 * Parameter layout is layer-major: for each layer, the weight matrix
 * (row-major, weights[out][in]) followed by the biases. Networks are
 * plain values, copying one yields a fully independent network.
 *
 * All math is double precision.
 */
class Mlp {
 public:
  explicit Mlp(MlpSpec spec);  // all parameters zero

  /// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer.
  static Mlp random_init(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const { return spec_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params_mut() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Forward pass. Pure: does not mutate the network.
  std::vector<double> forward(std::span<const double> input) const;

  struct BackwardResult {
    std::vector<double> output;      // forward result, saves a second pass
    std::vector<double> param_grad;  // dLoss/dparams, same layout as params
    std::vector<double> input_grad;  // dLoss/dinput
  };

  /// Reverse-mode gradients for a single input given dLoss/doutput.
  BackwardResult backward(std::span<const double> input,
                          std::span<const double> output_grad) const;

  /// One Adam update with bias correction; increments the step counter.
  void adam_step(std::span<const double> grad, const AdamConfig& cfg);

  /// target <- tau * source + (1 - tau) * target, parameter-wise.
  /// Specs must match.
  void soft_update_from(const Mlp& source, double tau);

  /// Pre-activation values of every hidden layer for the given input.
  /// Used by the gradient checker to stay away from relu kinks.
  std::vector<double> hidden_preactivations(std::span<const double> input) const;

  long adam_step_count() const { return adam_steps_; }
  std::span<const double> adam_m() const { return adam_m_; }
  std::span<const double> adam_v() const { return adam_v_; }

  /// Versioned binary serialization. Parameter round-trip is bit-exact.
  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

  bool operator==(const Mlp&) const = default;

 private:
  static double activate(Activation a, double x);
  static double activate_grad(Activation a, double x, double fx);

  MlpSpec spec_;
  std::vector<double> params_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  long adam_steps_ = 0;
};

}  // namespace acer
