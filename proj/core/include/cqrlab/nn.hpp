#pragma once

// Dense feed-forward networks with exact backpropagation and Adam.
//
// Networks are ReLU on every hidden layer and linear on the output. Batched
// entry points take one sample per column.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "cqrlab/rng.hpp"

namespace cqrlab::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weights and biases of a feed-forward network. weights[l] has shape
/// (layer_sizes[l+1] x layer_sizes[l]); biases[l] has length layer_sizes[l+1].
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

/// Per-parameter gradients, shape-congruent with the network they came from.
struct GradBundle {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  GradBundle& operator+=(const GradBundle& other);
  GradBundle& operator*=(double s);
};

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  GradBundle first_moment;
  GradBundle second_moment;
  std::int64_t step_count = 0;
  AdamHyper hyper;
};

/// Network with all-zero parameters. Throws InvalidArgument on a size list
/// shorter than two or containing a non-positive entry.
Mlp make_zero_mlp(const std::vector<int>& layer_sizes);

/// He-uniform weights (bound sqrt(6 / fan_in)), zero biases.
Mlp make_he_uniform_mlp(const std::vector<int>& layer_sizes, Rng& rng);

GradBundle zeros_like(const Mlp& net);
AdamState make_adam(const Mlp& net, AdamHyper hyper = {});

/// Checks shapes against layer_sizes and that every parameter is finite.
void validate(const Mlp& net);

/// True iff both networks have the same shapes and bit-identical parameters.
bool identical(const Mlp& a, const Mlp& b);
bool identical(const GradBundle& a, const GradBundle& b);

Vector forward(const Mlp& net, std::span<const double> input);

/// Exact gradient of dot(upstream, forward(net, input)) with respect to every
/// parameter. Activations are recomputed.
GradBundle backward(const Mlp& net, std::span<const double> input, std::span<const double> upstream);

/// Activations recorded by forward_batch; activations[0] is the input and
/// activations[l] the post-activation output of layer l-1.
struct BatchTrace {
  std::vector<Matrix> activations;
};

/// inputs: (input_dim x batch). Returns (output_dim x batch).
Matrix forward_batch(const Mlp& net, const Matrix& inputs, BatchTrace* trace = nullptr);

/// Sum over the batch of the per-sample backward() gradients.
GradBundle backward_batch(const Mlp& net, const BatchTrace& trace, const Matrix& upstream);

/// One bias-corrected Adam update, in place. Gradients are checked for
/// finiteness before anything is modified; a NaN/inf throws NumericError
/// naming the layer and leaves both net and state untouched.
void adam_step(Mlp& net, const GradBundle& grads, AdamState& state);

}  // namespace cqrlab::nn
