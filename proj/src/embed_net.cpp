#include "amtl/embed_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "amtl/errors.hpp"

namespace amtl {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite value");
  }
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
    case Activation::Tanh:
      return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the pre-activation. relu'(0) is taken as 0.
double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

DenseVector affine(const Layer& layer, std::span<const double> x) {
  DenseVector out(layer.b);
  for (std::size_t r = 0; r < layer.w.rows; ++r) {
    const double* row = &layer.w.data[r * layer.w.cols];
    double acc = 0.0;
    for (std::size_t c = 0; c < layer.w.cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
  return out;
}

void check_input(const EmbeddingNet& net, std::span<const double> x) {
  if (net.layers.empty()) throw InvalidInput("network has no layers");
  if (x.size() != net.in_dim()) {
    throw InvalidInput("input dimension " + std::to_string(x.size()) + " != network in_dim " +
                       std::to_string(net.in_dim()));
  }
  require_finite(x, "input");
}

}  // namespace

std::string_view to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw InvalidInput("unknown activation '" + std::string(s) + "'");
}

std::size_t EmbeddingNet::num_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.data.size() + l.b.size();
  return n;
}

void validate(const EmbeddingNet& net) {
  if (net.layers.empty()) throw InvalidInput("network has no layers");
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& l = net.layers[k];
    if (l.w.rows == 0 || l.w.cols == 0 || l.w.data.size() != l.w.rows * l.w.cols) {
      throw InvalidInput("layer " + std::to_string(k) + ": malformed weight matrix");
    }
    if (l.b.size() != l.w.rows) {
      throw InvalidInput("layer " + std::to_string(k) + ": bias size != out_dim");
    }
    if (k + 1 < net.layers.size() && net.layers[k + 1].in_dim() != l.out_dim()) {
      throw InvalidInput("layer " + std::to_string(k + 1) + ": in_dim does not match previous out_dim");
    }
    require_finite(l.w.data, "weights");
    require_finite(l.b, "bias");
  }
}

EmbeddingNet init_net(std::span<const std::size_t> dims, Activation act, std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidInput("init_net needs at least in_dim and embed_dim");
  if (std::find(dims.begin(), dims.end(), std::size_t{0}) != dims.end()) {
    throw InvalidInput("init_net: zero layer width");
  }
  std::mt19937_64 rng(seed);
  EmbeddingNet net;
  net.activation = act;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t in = dims[k];
    const std::size_t out = dims[k + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-s, s);
    Layer layer{Matrix(out, in), DenseVector(out, 0.0)};
    for (double& w : layer.w.data) w = dist(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

GradientBundle GradientBundle::zeros_like(const EmbeddingNet& net) {
  GradientBundle g;
  for (const auto& l : net.layers) {
    g.dw.emplace_back(l.w.rows, l.w.cols);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void GradientBundle::add_scaled(const GradientBundle& other, double scale) {
  if (other.dw.size() != dw.size()) throw InvalidInput("gradient bundles differ in depth");
  for (std::size_t k = 0; k < dw.size(); ++k) {
    if (other.dw[k].data.size() != dw[k].data.size() || other.db[k].size() != db[k].size()) {
      throw InvalidInput("gradient bundles differ in shape");
    }
    for (std::size_t i = 0; i < dw[k].data.size(); ++i) dw[k].data[i] += scale * other.dw[k].data[i];
    for (std::size_t i = 0; i < db[k].size(); ++i) db[k][i] += scale * other.db[k][i];
  }
}

bool GradientBundle::congruent_with(const EmbeddingNet& net) const {
  if (dw.size() != net.layers.size() || db.size() != net.layers.size()) return false;
  for (std::size_t k = 0; k < dw.size(); ++k) {
    const auto& l = net.layers[k];
    if (dw[k].rows != l.w.rows || dw[k].cols != l.w.cols || db[k].size() != l.b.size()) return false;
  }
  return true;
}

ForwardTrace trace_forward(const EmbeddingNet& net, std::span<const double> x) {
  check_input(net, x);
  ForwardTrace t;
  t.inputs.reserve(net.layers.size());
  t.pre.reserve(net.layers.size());
  DenseVector h(x.begin(), x.end());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    DenseVector z = affine(net.layers[k], h);
    t.inputs.push_back(std::move(h));
    const bool hidden = k + 1 < net.layers.size();
    if (hidden) {
      h.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) h[i] = activate(net.activation, z[i]);
    } else {
      t.raw = z;
    }
    t.pre.push_back(std::move(z));
  }
  double sq = 0.0;
  for (double v : t.raw) sq += v * v;
  t.raw_norm = std::sqrt(sq);
  t.embedding = l2_normalize(t.raw);
  return t;
}

DenseVector forward(const EmbeddingNet& net, std::span<const double> x) {
  return trace_forward(net, x).raw;
}

DenseVector l2_normalize(std::span<const double> v, double eps) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double denom = std::max(std::sqrt(sq), eps);
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / denom;
  return out;
}

DenseVector embed(const EmbeddingNet& net, std::span<const double> x) {
  return trace_forward(net, x).embedding;
}

double embedding_distance(std::span<const double> e1, std::span<const double> e2) {
  if (e1.size() != e2.size()) throw InvalidInput("embedding_distance: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    const double d = e1[i] - e2[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

DenseVector backward_into(const EmbeddingNet& net, const ForwardTrace& trace,
                          std::span<const double> upstream, GradientBundle& acc, double scale) {
  if (upstream.size() != net.embed_dim()) throw InvalidInput("backward: upstream dimension mismatch");
  if (!acc.congruent_with(net)) throw InvalidInput("backward: gradient bundle shape mismatch");

  // d(v / max(|v|, eps)) / dv = (I - e e^T) / |v| above eps, I / eps below.
  DenseVector g(upstream.begin(), upstream.end());
  if (trace.raw_norm >= kNormEps) {
    double proj = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) proj += trace.embedding[i] * g[i];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - proj * trace.embedding[i]) / trace.raw_norm;
  } else {
    for (double& v : g) v /= kNormEps;
  }

  for (std::size_t k = net.layers.size(); k-- > 0;) {
    const Layer& layer = net.layers[k];
    const DenseVector& in = trace.inputs[k];
    if (k + 1 < net.layers.size()) {
      const DenseVector& z = trace.pre[k];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= activate_grad(net.activation, z[i]);
    }
    Matrix& dw = acc.dw[k];
    DenseVector& db = acc.db[k];
    for (std::size_t r = 0; r < layer.w.rows; ++r) {
      const double gr = scale * g[r];
      db[r] += gr;
      double* row = &dw.data[r * dw.cols];
      for (std::size_t c = 0; c < layer.w.cols; ++c) row[c] += gr * in[c];
    }
    DenseVector prev(layer.w.cols, 0.0);
    for (std::size_t r = 0; r < layer.w.rows; ++r) {
      const double* row = &layer.w.data[r * layer.w.cols];
      for (std::size_t c = 0; c < layer.w.cols; ++c) prev[c] += row[c] * g[r];
    }
    g = std::move(prev);
  }
  return g;
}

BackwardResult backward(const EmbeddingNet& net, std::span<const double> x,
                        std::span<const double> upstream) {
  const ForwardTrace t = trace_forward(net, x);
  require_finite(upstream, "upstream");
  BackwardResult r{GradientBundle::zeros_like(net), {}};
  r.dx = backward_into(net, t, upstream, r.grads);
  return r;
}

std::vector<double> flatten(const EmbeddingNet& net) {
  std::vector<double> p;
  p.reserve(net.num_params());
  for (const auto& l : net.layers) {
    p.insert(p.end(), l.w.data.begin(), l.w.data.end());
    p.insert(p.end(), l.b.begin(), l.b.end());
  }
  return p;
}

std::vector<double> flatten(const GradientBundle& grads) {
  std::vector<double> p;
  for (std::size_t k = 0; k < grads.dw.size(); ++k) {
    p.insert(p.end(), grads.dw[k].data.begin(), grads.dw[k].data.end());
    p.insert(p.end(), grads.db[k].begin(), grads.db[k].end());
  }
  return p;
}

void unflatten(std::span<const double> params, EmbeddingNet& net) {
  if (params.size() != net.num_params()) throw InvalidInput("unflatten: parameter count mismatch");
  std::size_t off = 0;
  for (auto& l : net.layers) {
    std::copy_n(params.begin() + off, l.w.data.size(), l.w.data.begin());
    off += l.w.data.size();
    std::copy_n(params.begin() + off, l.b.size(), l.b.begin());
    off += l.b.size();
  }
}

}  // namespace amtl
