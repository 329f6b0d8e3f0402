#pragma once

// Small dense-layer toolkit shared by the encoder, projector and discriminator.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <random>

namespace motifrgc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// y = x W + b with W of shape in x out.
struct Dense {
  Matrix weight;
  RowVector bias;

  int in_dim() const { return static_cast<int>(weight.rows()); }
  int out_dim() const { return static_cast<int>(weight.cols()); }

  Matrix operator()(const Matrix& x) const {
    Matrix y = x * weight;
    y.rowwise() += bias;
    return y;
  }

  static Dense glorot(int in, int out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Dense d;
    d.weight = Matrix::NullaryExpr(in, out, [&]() { return u(rng); });
    d.bias = RowVector::Zero(out);
    return d;
  }

  static Dense zeros_like(const Dense& other) {
    return Dense{Matrix::Zero(other.weight.rows(), other.weight.cols()), RowVector::Zero(other.bias.size())};
  }
};

/// ELU with unit slope on both sides of zero, so the activation is C^1.
inline Matrix elu(const Matrix& x) {
  return x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

/// Multiplies an upstream gradient by ELU'(pre).
inline Matrix elu_backward(const Matrix& pre, const Matrix& grad) {
  return grad.cwiseProduct(pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); }));
}

inline double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

/// Accumulates dW = x^T g, db = colsum(g); returns dx = g W^T.
inline Matrix dense_backward(const Dense& layer, const Matrix& x, const Matrix& g, Dense& grad) {
  grad.weight.noalias() += x.transpose() * g;
  grad.bias += g.colwise().sum();
  return g * layer.weight.transpose();
}

/// Symmetric-normalized propagation matrix D^{-1/2} (A + I) D^{-1/2}.
template <typename Adjacency>
SparseMatrix normalized_adjacency(const Adjacency& adj) {
  const int n = adj.num_nodes();
  Vector inv_sqrt(n);
  for (int v = 0; v < n; ++v) inv_sqrt(v) = 1.0 / std::sqrt(adj.degree(v) + 1.0);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(adj.neighbors.size() + static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    entries.emplace_back(v, v, inv_sqrt(v) * inv_sqrt(v));
    for (const int* it = adj.begin(v); it != adj.end(v); ++it) entries.emplace_back(v, *it, inv_sqrt(v) * inv_sqrt(*it));
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

}  // namespace motifrgc
