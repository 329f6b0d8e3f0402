#pragma once

// D-GCN encoder: learnable per-node points in each constant-curvature factor
// plus the input-feature magnitude, random-feature kernel maps into Euclidean
// space, and a two-layer GCN per view followed by a shared projector.

#include <cstdint>
#include <string>
#include <vector>

#include "motifrgc/geometry.hpp"
#include "motifrgc/graph.hpp"
#include "motifrgc/kernel.hpp"
#include "motifrgc/nn.hpp"

namespace motifrgc {

class DegenerateInitError : public Error { using Error::Error; };

/// kappa_m = sign_m * exp(log_magnitude_m); the sign never changes.
struct CurvatureParams {
  std::vector<int> signs;
  Vector log_magnitude;

  static constexpr double kMinMagnitude = 1e-4;
  static constexpr double kMaxMagnitude = 1e4;

  static CurvatureParams from_values(const std::vector<double>& kappas);
  int size() const { return static_cast<int>(signs.size()); }
  double kappa(int m) const;
  Vector values() const;
};

/// Normalization of the kernel features before the convolutions. The gF
/// amplitude is heavy-tailed for d_m = 32 (single entries reach 1e3..1e4), and
/// the Fourier rows of sparse high-dimensional inputs are nearly identical
/// across nodes since <omega, x> is tiny; either swamps the GCN.
///   row: scale each row to unit L2 norm
///   column: center each column and scale it to unit variance over the nodes
enum class KernelNorm { kNone, kRow, kColumn, kRowColumn };

KernelNorm parse_kernel_norm(const std::string& name);
std::string to_string(KernelNorm norm);

struct EncoderConfig {
  std::vector<FactorSpec> factors{{1.0, 32}, {-1.0, 32}, {-1.0, 32}};
  int kernel_dim = 256;
  int hidden_dim = 32;
  int view_dim = 32;
  int projector_hidden = 32;
  double frequency_std = 1.0;
  KernelNorm kernel_norm = KernelNorm::kRowColumn;
  std::uint64_t seed = 0;
};

/// Two graph-convolution layers of one view.
struct ConvStack {
  Dense first;
  Dense second;
};

struct EncoderState {
  ProductManifoldSpec spec;
  EncoderConfig config;
  CurvatureParams curvature;
  std::vector<Matrix> factor_points;  // N x d_m each
  Vector magnitudes;                  // |X_i|, fixed
  std::vector<KernelBasis<double>> factor_bases;
  KernelBasis<double> euclid_basis;
  Matrix euclid_kernel;          // phi_F(X), cached
  std::vector<ConvStack> conv;   // index 0: Euclidean view, m: factor m
  ConvStack projector;           // shared g_Theta: hidden layer + output layer

  int num_nodes() const { return static_cast<int>(magnitudes.size()); }
  int num_factors() const { return static_cast<int>(factor_points.size()); }
  int num_views() const { return num_factors() + 1; }
  double kappa(int m) const { return curvature.kappa(m); }
};

/// Per-view N x D outputs; views[0] is the Euclidean view z^0, views[m] the
/// view of factor m.
struct ViewSet {
  std::vector<Matrix> views;

  Matrix concat() const;
};

/// Raw kernel-layer features: kernels[0] = phi_F(X), kernels[m] = phi_gF(x^m).
struct KernelFeatures {
  std::vector<Matrix> kernels;
  std::vector<Matrix> raw;  // before normalization; empty when kNone

  /// [phi_gF(x^1) | ... | phi_gF(x^M) | phi_F(X)] row-wise.
  Matrix concat() const;
};

struct EncoderGrads {
  std::vector<Matrix> factor_points;
  Vector kappa;  // dL/dkappa_m
  std::vector<ConvStack> conv;
  ConvStack projector;

  static EncoderGrads zeros_like(const EncoderState& state);
  void set_zero();
};

struct ViewCache {
  Matrix kernel;       // conv input, after normalization
  Matrix kernel_unit;  // row-normalized kernel, kept when columns are standardized after it
  Vector row_norm;
  RowVector col_scale;
  Matrix pre1, hidden1, propagated1, pre2, proj_pre, proj_hidden;
};

struct ForwardCache {
  std::vector<ViewCache> views;
};

/// Principal-component scores (N x k) of the centered rows of X by seeded
/// randomized subspace iteration.
Matrix principal_components(const Matrix& x, int k, std::uint64_t seed);

/// Builds the initial state: factor points are the scaled principal
/// components X / (2 sqrt|k_m| max_i |X_i|), zero-padded when F < d_m.
EncoderState init_features(const GraphStore& g, const EncoderConfig& config);

KernelFeatures kernel_views(const EncoderState& state);

ViewSet forward(const SparseMatrix& propagation, const EncoderState& state, ForwardCache* cache = nullptr);
inline ViewSet forward(const GraphStore& g, const EncoderState& state) {
  return forward(normalized_adjacency(g.adjacency), state);
}

/// Reverse pass from per-view gradients (views[0] Euclidean). Accumulates
/// into `grads`, including factor points and curvatures through phi_gF.
void backward(const SparseMatrix& propagation, const EncoderState& state, const ForwardCache& cache,
              const std::vector<Matrix>& view_grads, EncoderGrads& grads);

/// Product-layer point of node i.
ProductPoint<double> product_point(const EncoderState& state, int node);

/// Throws NumericalFault naming the first non-finite row of `m`.
void check_finite(const Matrix& m, const char* where, int view);

}  // namespace motifrgc
