#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace amtl {

using DenseVector = std::vector<double>;

inline constexpr double kNormEps = 1e-12;

enum class Activation { Relu, Tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

struct Layer {
  Matrix w;  // out_dim x in_dim
  DenseVector b;

  std::size_t in_dim() const { return w.cols; }
  std::size_t out_dim() const { return w.rows; }

  bool operator==(const Layer&) const = default;
};

// Feed-forward MLP. Hidden layers apply `activation`; the last layer is
// linear and its output is L2-normalized by embed().
struct EmbeddingNet {
  std::vector<Layer> layers;
  Activation activation = Activation::Relu;

  std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  std::size_t embed_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
  std::size_t num_params() const;

  bool operator==(const EmbeddingNet&) const = default;
};

// Throws InvalidInput when layer shapes disagree or a parameter is non-finite.
void validate(const EmbeddingNet& net);

// Glorot-uniform weights in [-s, s], s = sqrt(6 / (in + out)); zero biases.
// `dims` lists in_dim, hidden sizes, embed_dim.
EmbeddingNet init_net(std::span<const std::size_t> dims, Activation act, std::uint64_t seed);

struct GradientBundle {
  std::vector<Matrix> dw;
  std::vector<DenseVector> db;

  static GradientBundle zeros_like(const EmbeddingNet& net);
  void add_scaled(const GradientBundle& other, double scale);
  bool congruent_with(const EmbeddingNet& net) const;
};

DenseVector forward(const EmbeddingNet& net, std::span<const double> x);
DenseVector l2_normalize(std::span<const double> v, double eps = kNormEps);
DenseVector embed(const EmbeddingNet& net, std::span<const double> x);
double embedding_distance(std::span<const double> e1, std::span<const double> e2);

// Intermediate values of one forward pass, kept for backprop.
struct ForwardTrace {
  std::vector<DenseVector> inputs;  // input to each layer (inputs[0] == x)
  std::vector<DenseVector> pre;     // pre-activation of each layer
  DenseVector raw;                  // output of the last layer
  DenseVector embedding;            // l2_normalize(raw)
  double raw_norm = 0.0;
};

ForwardTrace trace_forward(const EmbeddingNet& net, std::span<const double> x);

struct BackwardResult {
  GradientBundle grads;
  DenseVector dx;
};

// `upstream` is dLoss/d(embedding). Accumulates parameter gradients scaled by
// `scale` into `acc` and returns the input gradient.
DenseVector backward_into(const EmbeddingNet& net, const ForwardTrace& trace,
                          std::span<const double> upstream, GradientBundle& acc,
                          double scale = 1.0);

BackwardResult backward(const EmbeddingNet& net, std::span<const double> x,
                        std::span<const double> upstream);

// Parameters in a fixed order: per layer, w row-major then b.
std::vector<double> flatten(const EmbeddingNet& net);
std::vector<double> flatten(const GradientBundle& grads);
void unflatten(std::span<const double> params, EmbeddingNet& net);

}  // namespace amtl
