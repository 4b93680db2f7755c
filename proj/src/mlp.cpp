#include "acer/mlp.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace acer {

std::vector<int> MlpSpec::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(hidden_dims.size() + 2);
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden_dims.begin(), hidden_dims.end());
  sizes.push_back(output_dim);
  return sizes;
}

std::size_t MlpSpec::param_count() const {
  const auto sizes = layer_sizes();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    n += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
  }
  return n;
}

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("MlpSpec: dims must be >= 1");
  }
  if (hidden_dims.empty()) {
    throw std::invalid_argument("MlpSpec: at least one hidden layer required");
  }
  for (int h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("MlpSpec: dims must be >= 1");
  }
  if (hidden_activation == Activation::identity) {
    throw std::invalid_argument("MlpSpec: hidden activation must be relu or tanh");
  }
  if (output_activation == Activation::relu) {
    throw std::invalid_argument("MlpSpec: output activation must be identity or tanh");
  }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  params_.assign(spec_.param_count(), 0.0);
  adam_m_.assign(params_.size(), 0.0);
  adam_v_.assign(params_.size(), 0.0);
}

Mlp Mlp::random_init(MlpSpec spec, Rng& rng) {
  Mlp net(std::move(spec));
  const auto sizes = net.spec_.layer_sizes();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::size_t count = static_cast<std::size_t>(fan_in) * fan_out + fan_out;
    for (std::size_t i = 0; i < count; ++i) {
      net.params_[off + i] = rng.uniform(-bound, bound);
    }
    off += count;
  }
  return net;
}

double Mlp::activate(Activation a, double x) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::identity: return x;
  }
  return x;
}

// Derivative given pre-activation x and activation value fx.
double Mlp::activate_grad(Activation a, double x, double fx) {
  switch (a) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - fx * fx;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != spec_.input_dim) {
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  }
  const auto sizes = spec_.layer_sizes();
  std::vector<double> act(input.begin(), input.end());
  std::vector<double> next;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const bool last = (l + 2 == sizes.size());
    const Activation a = last ? spec_.output_activation : spec_.hidden_activation;
    const double* w = params_.data() + off;
    const double* b = w + static_cast<std::size_t>(fan_in) * fan_out;
    next.assign(fan_out, 0.0);
    for (int o = 0; o < fan_out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * fan_in;
      for (int i = 0; i < fan_in; ++i) z += row[i] * act[i];
      next[o] = activate(a, z);
    }
    act.swap(next);
    off += static_cast<std::size_t>(fan_in) * fan_out + fan_out;
  }
  return act;
}

std::vector<double> Mlp::hidden_preactivations(std::span<const double> input) const {
  const auto sizes = spec_.layer_sizes();
  std::vector<double> act(input.begin(), input.end());
  std::vector<double> next;
  std::vector<double> preacts;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 2 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double* w = params_.data() + off;
    const double* b = w + static_cast<std::size_t>(fan_in) * fan_out;
    next.assign(fan_out, 0.0);
    for (int o = 0; o < fan_out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * fan_in;
      for (int i = 0; i < fan_in; ++i) z += row[i] * act[i];
      preacts.push_back(z);
      next[o] = activate(spec_.hidden_activation, z);
    }
    act.swap(next);
    off += static_cast<std::size_t>(fan_in) * fan_out + fan_out;
  }
  return preacts;
}

Mlp::BackwardResult Mlp::backward(std::span<const double> input,
                                  std::span<const double> output_grad) const {
  if (static_cast<int>(input.size()) != spec_.input_dim) {
    throw std::invalid_argument("Mlp::backward: input dimension mismatch");
  }
  if (static_cast<int>(output_grad.size()) != spec_.output_dim) {
    throw std::invalid_argument("Mlp::backward: output_grad dimension mismatch");
  }
  const auto sizes = spec_.layer_sizes();
  const std::size_t n_layers = sizes.size() - 1;

  // forward pass, keeping pre-activations and activations per layer
  std::vector<std::vector<double>> acts(n_layers + 1);
  std::vector<std::vector<double>> pre(n_layers);
  std::vector<std::size_t> offsets(n_layers);
  acts[0].assign(input.begin(), input.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const bool last = (l + 1 == n_layers);
    const Activation a = last ? spec_.output_activation : spec_.hidden_activation;
    const double* w = params_.data() + off;
    const double* b = w + static_cast<std::size_t>(fan_in) * fan_out;
    pre[l].assign(fan_out, 0.0);
    acts[l + 1].assign(fan_out, 0.0);
    for (int o = 0; o < fan_out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * fan_in;
      for (int i = 0; i < fan_in; ++i) z += row[i] * acts[l][i];
      pre[l][o] = z;
      acts[l + 1][o] = activate(a, z);
    }
    off += static_cast<std::size_t>(fan_in) * fan_out + fan_out;
  }

  BackwardResult res;
  res.output = acts[n_layers];
  res.param_grad.assign(params_.size(), 0.0);

  // backward pass
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t l = n_layers; l-- > 0;) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const bool last = (l + 1 == n_layers);
    const Activation a = last ? spec_.output_activation : spec_.hidden_activation;
    const double* w = params_.data() + offsets[l];
    double* gw = res.param_grad.data() + offsets[l];
    double* gb = gw + static_cast<std::size_t>(fan_in) * fan_out;
    // delta through the activation
    for (int o = 0; o < fan_out; ++o) {
      delta[o] *= activate_grad(a, pre[l][o], acts[l + 1][o]);
    }
    std::vector<double> prev_delta(fan_in, 0.0);
    for (int o = 0; o < fan_out; ++o) {
      const double d = delta[o];
      gb[o] = d;
      const double* row = w + static_cast<std::size_t>(o) * fan_in;
      double* grow = gw + static_cast<std::size_t>(o) * fan_in;
      for (int i = 0; i < fan_in; ++i) {
        grow[i] = d * acts[l][i];
        prev_delta[i] += d * row[i];
      }
    }
    delta.swap(prev_delta);
  }
  res.input_grad = std::move(delta);
  return res;
}

void Mlp::adam_step(std::span<const double> grad, const AdamConfig& cfg) {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("Mlp::adam_step: gradient length mismatch");
  }
  ++adam_steps_;
  const double t = static_cast<double>(adam_steps_);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_m_[i] = cfg.beta1 * adam_m_[i] + (1.0 - cfg.beta1) * grad[i];
    adam_v_[i] = cfg.beta2 * adam_v_[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = adam_m_[i] / bc1;
    const double v_hat = adam_v_[i] / bc2;
    params_[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void Mlp::soft_update_from(const Mlp& source, double tau) {
  if (spec_ != source.spec_) {
    throw std::invalid_argument("Mlp::soft_update_from: spec mismatch");
  }
  if (tau < 0.0 || tau > 1.0) {
    throw std::invalid_argument("Mlp::soft_update_from: tau out of [0,1]");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    params_[i] = tau * source.params_[i] + (1.0 - tau) * params_[i];
  }
}

namespace {

constexpr std::uint32_t kMlpMagic = 0x4d4c5031;  // "MLP1"

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("Mlp::load: truncated stream");
  return v;
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
  write_raw(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::istream& in) {
  const auto n = read_raw<std::uint64_t>(in);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("Mlp::load: truncated stream");
  return v;
}

}  // namespace

void Mlp::save(std::ostream& out) const {
  write_raw(out, kMlpMagic);
  write_raw(out, static_cast<std::int32_t>(spec_.input_dim));
  write_raw(out, static_cast<std::uint32_t>(spec_.hidden_dims.size()));
  for (int h : spec_.hidden_dims) write_raw(out, static_cast<std::int32_t>(h));
  write_raw(out, static_cast<std::int32_t>(spec_.output_dim));
  write_raw(out, static_cast<std::uint8_t>(spec_.hidden_activation));
  write_raw(out, static_cast<std::uint8_t>(spec_.output_activation));
  write_raw(out, static_cast<std::int64_t>(adam_steps_));
  write_vec(out, params_);
  write_vec(out, adam_m_);
  write_vec(out, adam_v_);
}

Mlp Mlp::load(std::istream& in) {
  if (read_raw<std::uint32_t>(in) != kMlpMagic) {
    throw std::runtime_error("Mlp::load: bad magic");
  }
  MlpSpec spec;
  spec.input_dim = read_raw<std::int32_t>(in);
  const auto n_hidden = read_raw<std::uint32_t>(in);
  spec.hidden_dims.resize(n_hidden);
  for (auto& h : spec.hidden_dims) h = read_raw<std::int32_t>(in);
  spec.output_dim = read_raw<std::int32_t>(in);
  spec.hidden_activation = static_cast<Activation>(read_raw<std::uint8_t>(in));
  spec.output_activation = static_cast<Activation>(read_raw<std::uint8_t>(in));
  const auto steps = read_raw<std::int64_t>(in);
  Mlp net(spec);
  net.params_ = read_vec(in);
  net.adam_m_ = read_vec(in);
  net.adam_v_ = read_vec(in);
  net.adam_steps_ = steps;
  if (net.params_.size() != spec.param_count() ||
      net.adam_m_.size() != net.params_.size() ||
      net.adam_v_.size() != net.params_.size()) {
    throw std::runtime_error("Mlp::load: parameter count mismatch");
  }
  return net;
}

}  // namespace acer
