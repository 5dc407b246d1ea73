#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code path it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "amtl/embed_net.hpp"

namespace amtl::oracle {

// Straight-line forward pass: explicit loops over a copy of the parameters.
inline std::vector<double> naive_forward(const EmbeddingNet& net, const std::vector<double>& x) {
  std::vector<double> h = x;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& l = net.layers[k];
    std::vector<double> z(l.w.rows);
    for (std::size_t r = 0; r < l.w.rows; ++r) {
      long double s = l.b[r];
      for (std::size_t c = 0; c < l.w.cols; ++c) s += static_cast<long double>(l.w.data[r * l.w.cols + c]) * h[c];
      z[r] = static_cast<double>(s);
    }
    if (k + 1 < net.layers.size()) {
      for (double& v : z) v = net.activation == Activation::Relu ? std::max(v, 0.0) : std::tanh(v);
    }
    h = z;
  }
  return h;
}

inline std::vector<double> naive_normalize(const std::vector<double>& v, double eps = 1e-12) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  std::vector<double> out(v);
  if (n < eps) n = eps;
  for (double& x : out) x /= n;
  return out;
}

inline double naive_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Central differences of f over every coordinate of `point`.
inline std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                               std::vector<double> point, double step = 1e-5) {
  std::vector<double> g(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = f(point);
    point[i] = saved - step;
    const double down = f(point);
    point[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, 1e-8)
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-8});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
  }
  return worst;
}

// Average rank from its definition: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> brute_force_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int smaller = 0;
    int equal = 0;
    for (double w : v) {
      if (w < v[i]) ++smaller;
      if (w == v[i]) ++equal;
    }
    r[i] = 1.0 + smaller + 0.5 * (equal - 1);
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double brute_force_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(brute_force_ranks(x), brute_force_ranks(y));
}

// Classic 1 - 6 sum d^2 / (k (k^2 - 1)); valid only without ties.
inline double classic_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = brute_force_ranks(x);
  const auto ry = brute_force_ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double k = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (k * (k * k - 1.0));
}

// Two-pass population variance per coordinate, averaged.
inline double brute_force_variance(const std::vector<std::vector<double>>& rows) {
  const std::size_t dim = rows.front().size();
  double total = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[c]);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    total += var / static_cast<double>(col.size());
  }
  return total / static_cast<double>(dim);
}

struct ScalarAdam {
  double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double p, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return p - lr * mh / (std::sqrt(vh) + eps);
  }
};

// Ordinary least squares with intercept via normal equations and Gaussian
// elimination with partial pivoting. Returns fitted values.
inline std::vector<double> least_squares_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  const std::size_t n = X.size();
  const std::size_t p = X.front().size() + 1;
  std::vector<std::vector<double>> A(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row{1.0};
    row.insert(row.end(), X[i].begin(), X[i].end());
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) A[a][b] += row[a] * row[b];
      A[a][p] += row[a] * y[i];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    }
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c || A[c][c] == 0.0) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= p; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t c = 0; c < p; ++c) beta[c] = A[c][c] == 0.0 ? 0.0 : A[c][p] / A[c][c];
  std::vector<double> fitted(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = beta[0];
    for (std::size_t j = 1; j < p; ++j) s += beta[j] * X[i][j - 1];
    fitted[i] = s;
  }
  return fitted;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace amtl::oracle
