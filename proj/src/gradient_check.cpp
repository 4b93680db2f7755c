#include "acer/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acer {

namespace {

double loss_at(const Mlp& net, std::span<const double> input, const ScalarLoss& loss) {
  const auto out = net.forward(input);
  std::vector<double> unused(out.size(), 0.0);
  return loss(out, unused);
}

bool near_relu_kink(const Mlp& net, std::span<const double> input) {
  if (net.spec().hidden_activation != Activation::relu) return false;
  const auto pre = net.hidden_preactivations(input);
  return std::any_of(pre.begin(), pre.end(),
                     [](double z) { return std::abs(z) < 1e-3; });
}

}  // namespace

std::vector<double> finite_difference_param_grad(const Mlp& net,
                                                 std::span<const double> input,
                                                 const ScalarLoss& loss, double h) {
  Mlp probe = net;
  auto params = probe.params_mut();
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss_at(probe, input, loss);
    params[i] = saved - h;
    const double down = loss_at(probe, input, loss);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double gradient_check(const Mlp& net, const ScalarLoss& loss, int trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("gradient_check: trials must be >= 1");
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> input(net.spec().input_dim);
    int attempts = 0;
    do {
      for (auto& x : input) x = rng.uniform(-1.0, 1.0);
    } while (near_relu_kink(net, input) && ++attempts < 100);

    std::vector<double> out_grad(net.spec().output_dim, 0.0);
    const auto out = net.forward(input);
    loss(out, out_grad);
    const auto analytic = net.backward(input, out_grad).param_grad;
    const auto numeric = finite_difference_param_grad(net, input, loss);

    double num_inf = 0.0, diff_inf = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      num_inf = std::max(num_inf, std::abs(numeric[i]));
      diff_inf = std::max(diff_inf, std::abs(analytic[i] - numeric[i]));
    }
    worst = std::max(worst, diff_inf / std::max(num_inf, 1e-8));
  }
  return worst;
}

}  // namespace acer
