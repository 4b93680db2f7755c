#pragma once

#include <functional>
#include <span>
#include <vector>

#include "acer/mlp.hpp"
#include "acer/rng.hpp"

namespace acer {

/**
 * Scalar loss over network outputs: returns the loss value and fills
 * dLoss/doutput. Must be deterministic in its inputs.
 */
using ScalarLoss =
    std::function<double(std::span<const double> output, std::span<double> output_grad)>;

/**
 * Compares analytic parameter gradients against central finite
 * differences (h = 1e-5) on random inputs.
 *
 * Returns the max over trials of
 *   ||analytic - numeric||_inf / max(||numeric||_inf, 1e-8).
 *
 * For relu networks, inputs whose hidden pre-activations land within
 * 1e-3 of a kink are resampled.
 */
double gradient_check(const Mlp& net, const ScalarLoss& loss, int trials, Rng& rng);

/// Central finite-difference gradient of loss(net(input)) wrt params.
std::vector<double> finite_difference_param_grad(const Mlp& net,
                                                 std::span<const double> input,
                                                 const ScalarLoss& loss,
                                                 double h = 1e-5);

}  // namespace acer
