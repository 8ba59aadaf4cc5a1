#include "cqrlab/nn.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "cqrlab/error.hpp"

namespace cqrlab::nn {
namespace {

void check_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw InvalidArgument("network needs at least an input and an output size");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw InvalidArgument("layer sizes must be positive, got " + std::to_string(s));
  }
}

template <typename Derived>
bool same_bits(const Eigen::DenseBase<Derived>& a, const Eigen::DenseBase<Derived>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.derived().data(), b.derived().data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

void check_congruent(const Mlp& net, const GradBundle& g) {
  if (g.weights.size() != net.weights.size() || g.biases.size() != net.biases.size()) {
    throw DimensionError("gradient layer count", net.weights.size(), g.weights.size());
  }
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    if (g.weights[l].rows() != net.weights[l].rows() ||
        g.weights[l].cols() != net.weights[l].cols()) {
      throw DimensionError("gradient weight shape, layer " + std::to_string(l),
                           static_cast<std::size_t>(net.weights[l].size()),
                           static_cast<std::size_t>(g.weights[l].size()));
    }
    if (g.biases[l].size() != net.biases[l].size()) {
      throw DimensionError("gradient bias shape, layer " + std::to_string(l),
                           static_cast<std::size_t>(net.biases[l].size()),
                           static_cast<std::size_t>(g.biases[l].size()));
    }
  }
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

GradBundle& GradBundle::operator+=(const GradBundle& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

GradBundle& GradBundle::operator*=(double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= s;
    biases[l] *= s;
  }
  return *this;
}

Mlp make_zero_mlp(const std::vector<int>& layer_sizes) {
  check_sizes(layer_sizes);
  Mlp net;
  net.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    net.weights.push_back(Matrix::Zero(layer_sizes[l + 1], layer_sizes[l]));
    net.biases.push_back(Vector::Zero(layer_sizes[l + 1]));
  }
  return net;
}

Mlp make_he_uniform_mlp(const std::vector<int>& layer_sizes, Rng& rng) {
  Mlp net = make_zero_mlp(layer_sizes);
  for (auto& w : net.weights) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
  }
  return net;
}

GradBundle zeros_like(const Mlp& net) {
  GradBundle g;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(Vector::Zero(net.biases[l].size()));
  }
  return g;
}

AdamState make_adam(const Mlp& net, AdamHyper hyper) {
  if (!(hyper.lr > 0 && hyper.beta1 > 0 && hyper.beta2 > 0 && hyper.eps > 0 && hyper.beta1 < 1 &&
        hyper.beta2 < 1)) {
    throw InvalidArgument("Adam hyperparameters must be positive with betas below 1");
  }
  return AdamState{zeros_like(net), zeros_like(net), 0, hyper};
}

void validate(const Mlp& net) {
  check_sizes(net.layer_sizes);
  const std::size_t layers = net.layer_sizes.size() - 1;
  if (net.weights.size() != layers || net.biases.size() != layers) {
    throw DimensionError("layer count", layers, net.weights.size());
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = net.weights[l];
    if (w.rows() != net.layer_sizes[l + 1] || w.cols() != net.layer_sizes[l]) {
      throw DimensionError("weight shape, layer " + std::to_string(l),
                           static_cast<std::size_t>(net.layer_sizes[l + 1]) * net.layer_sizes[l],
                           static_cast<std::size_t>(w.size()));
    }
    if (net.biases[l].size() != net.layer_sizes[l + 1]) {
      throw DimensionError("bias length, layer " + std::to_string(l),
                           static_cast<std::size_t>(net.layer_sizes[l + 1]),
                           static_cast<std::size_t>(net.biases[l].size()));
    }
    if (!w.allFinite() || !net.biases[l].allFinite()) {
      throw NumericError("non-finite parameter", static_cast<int>(l));
    }
  }
}

bool identical(const Mlp& a, const Mlp& b) {
  if (a.layer_sizes != b.layer_sizes || a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!same_bits(a.weights[l], b.weights[l]) || !same_bits(a.biases[l], b.biases[l])) return false;
  }
  return true;
}

bool identical(const GradBundle& a, const GradBundle& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!same_bits(a.weights[l], b.weights[l]) || !same_bits(a.biases[l], b.biases[l])) return false;
  }
  return true;
}

Matrix forward_batch(const Mlp& net, const Matrix& inputs, BatchTrace* trace) {
  if (inputs.rows() != net.input_dim()) {
    throw DimensionError("network input", static_cast<std::size_t>(net.input_dim()),
                         static_cast<std::size_t>(inputs.rows()));
  }
  if (trace != nullptr) {
    trace->activations.clear();
    trace->activations.reserve(net.weights.size() + 1);
    trace->activations.push_back(inputs);
  }
  Matrix a = inputs;
  const int last = net.num_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Matrix z = net.weights[l] * a;
    z.colwise() += net.biases[l];
    if (l < last) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (trace != nullptr) trace->activations.push_back(a);
  }
  return a;
}

Vector forward(const Mlp& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw DimensionError("network input", static_cast<std::size_t>(net.input_dim()), input.size());
  }
  Vector a = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  const int last = net.num_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Vector z = net.weights[l] * a + net.biases[l];
    if (l < last) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

GradBundle backward_batch(const Mlp& net, const BatchTrace& trace, const Matrix& upstream) {
  const int layers = net.num_layers();
  if (static_cast<int>(trace.activations.size()) != layers + 1) {
    throw DimensionError("batch trace", static_cast<std::size_t>(layers + 1), trace.activations.size());
  }
  if (upstream.rows() != net.output_dim() || upstream.cols() != trace.activations.front().cols()) {
    throw DimensionError("upstream gradient", static_cast<std::size_t>(net.output_dim()),
                         static_cast<std::size_t>(upstream.rows()));
  }
  GradBundle g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  Matrix delta = upstream;
  for (int l = layers - 1; l >= 0; --l) {
    const Matrix& a_in = trace.activations[l];
    g.weights[l].noalias() = delta * a_in.transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = net.weights[l].transpose() * delta;
      delta = back.cwiseProduct((a_in.array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

GradBundle backward(const Mlp& net, std::span<const double> input, std::span<const double> upstream) {
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw DimensionError("network input", static_cast<std::size_t>(net.input_dim()), input.size());
  }
  if (static_cast<int>(upstream.size()) != net.output_dim()) {
    throw DimensionError("upstream gradient", static_cast<std::size_t>(net.output_dim()),
                         upstream.size());
  }
  Matrix x = Eigen::Map<const Matrix>(input.data(), static_cast<Eigen::Index>(input.size()), 1);
  BatchTrace trace;
  forward_batch(net, x, &trace);
  Matrix up = Eigen::Map<const Matrix>(upstream.data(), static_cast<Eigen::Index>(upstream.size()), 1);
  return backward_batch(net, trace, up);
}

void adam_step(Mlp& net, const GradBundle& grads, AdamState& state) {
  check_congruent(net, grads);
  check_congruent(net, state.first_moment);
  check_congruent(net, state.second_moment);
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
      throw NumericError("non-finite gradient", static_cast<int>(l));
    }
  }

  const AdamHyper& h = state.hyper;
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = h.beta1 * m + (1.0 - h.beta1) * g;
    v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseProduct(g);
    param.array() -= h.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + h.eps);
  };
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    update(net.weights[l], grads.weights[l], state.first_moment.weights[l], state.second_moment.weights[l]);
    update(net.biases[l], grads.biases[l], state.first_moment.biases[l], state.second_moment.biases[l]);
  }
}

}  // namespace cqrlab::nn
