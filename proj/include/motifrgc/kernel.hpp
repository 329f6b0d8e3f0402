#pragma once

// Random-feature maps from gyrovector balls (generalized Fourier map) and from
// Euclidean space (classical Fourier map) to fixed-width Euclidean vectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

#include "motifrgc/errors.hpp"
#include "motifrgc/geometry.hpp"

namespace motifrgc {

inline constexpr double kAmplitudeExponentClamp = 50.0;

/// Frozen random basis. Row i of `phases` is the phase vector omega_i.
template <typename Scalar>
struct KernelBasis {
  Mat<Scalar> phases;       // m x n
  Vec<Scalar> biases;       // m, in [0, 2 pi]
  Vec<Scalar> frequencies;  // m, Gaussian
  std::optional<Scalar> curvature;
  std::uint64_t seed = 0;

  int output_dim() const { return static_cast<int>(phases.rows()); }
  int source_dim() const { return static_cast<int>(phases.cols()); }
};

/// Radius of the ball phase vectors are drawn from: 1/sqrt|k| for a curved
/// basis, 1 for the Euclidean one.
template <typename Scalar>
Scalar sampling_radius(const std::optional<Scalar>& kappa) {
  using std::abs;
  using std::sqrt;
  if (!kappa) return Scalar(1);
  return Scalar(1) / sqrt(abs(*kappa));
}

/// Draws m (omega, b, lambda) triples. omega is uniform in the n-ball of
/// sampling_radius (Gaussian direction, radius U^{1/n} R), b ~ U[0, 2 pi],
/// lambda ~ N(0, frequency_std^2). Deterministic in `seed`.
template <typename Scalar = double>
KernelBasis<Scalar> sample_basis(int n, int m, std::optional<Scalar> kappa, std::uint64_t seed,
                                 Scalar frequency_std = Scalar(1)) {
  if (n < 1 || m < 1) throw ContractError("sample_basis: n and m must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Scalar radius = sampling_radius(kappa);

  KernelBasis<Scalar> basis;
  basis.phases.resize(m, n);
  basis.biases.resize(m);
  basis.frequencies.resize(m);
  basis.curvature = kappa;
  basis.seed = seed;
  for (int i = 0; i < m; ++i) {
    Vec<Scalar> dir(n);
    Scalar norm(0);
    do {
      for (int j = 0; j < n; ++j) dir(j) = Scalar(gauss(rng));
      norm = dir.norm();
    } while (norm == Scalar(0));
    const Scalar r = radius * Scalar(std::pow(unit(rng), 1.0 / n));
    basis.phases.row(i) = (r / norm) * dir.transpose();
    basis.biases(i) = Scalar(2.0 * std::numbers::pi * unit(rng));
    basis.frequencies(i) = frequency_std * Scalar(gauss(rng));
  }
  return basis;
}

/// Signed distance <omega, x>_k = log[(1 + k|x|^2) / |x - omega|^2].
template <typename DerivedW, typename DerivedX>
typename DerivedX::Scalar signed_dist(const Eigen::MatrixBase<DerivedW>& omega, const Eigen::MatrixBase<DerivedX>& x,
                                      typename DerivedX::Scalar kappa) {
  using Scalar = typename DerivedX::Scalar;
  using std::log;
  const Scalar q = (x - omega).squaredNorm();
  if (q < Scalar(guard::kDenominatorFloor)) throw CoincidentPointError("signed_dist: x coincides with omega");
  return log((Scalar(1) + kappa * x.squaredNorm()) / q);
}

/// Single eigenfunction A cos(lambda <omega, x>_k + b) with
/// A = exp(((n-1)/2) <omega, x>_k); the exponent is clamped to +-50.
template <typename DerivedX, typename DerivedW>
typename DerivedX::Scalar gf_eigenfunction(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& omega,
                                           typename DerivedX::Scalar b, typename DerivedX::Scalar lambda,
                                           typename DerivedX::Scalar kappa, int n) {
  using Scalar = typename DerivedX::Scalar;
  using std::clamp;
  using std::cos;
  using std::exp;
  const Scalar sd = signed_dist(omega, x, kappa);
  const Scalar expo = clamp(Scalar(n - 1) / Scalar(2) * sd, Scalar(-kAmplitudeExponentClamp),
                            Scalar(kAmplitudeExponentClamp));
  return exp(expo) * cos(lambda * sd + b);
}

/// Generalized Fourier map of one point: (1/sqrt m) [gF_i(x)]_i.
template <typename Derived>
Vec<typename Derived::Scalar> gf_map(const Eigen::MatrixBase<Derived>& x,
                                     const KernelBasis<typename Derived::Scalar>& basis,
                                     std::optional<typename Derived::Scalar> kappa_override = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  const Scalar kappa = kappa_override ? *kappa_override : basis.curvature.value_or(Scalar(0));
  const int m = basis.output_dim();
  const int n = basis.source_dim();
  Vec<Scalar> out(m);
  const Scalar scale = Scalar(1) / sqrt(Scalar(m));
  for (int i = 0; i < m; ++i) {
    out(i) = scale * gf_eigenfunction(x, basis.phases.row(i).transpose(), basis.biases(i), basis.frequencies(i),
                                      kappa, n);
  }
  return out;
}

/// Classical random Fourier map: sqrt(2/m) cos(<omega, x> + b).
template <typename Derived>
Vec<typename Derived::Scalar> fourier_map(const Eigen::MatrixBase<Derived>& x,
                                          const KernelBasis<typename Derived::Scalar>& basis) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  const Scalar scale = sqrt(Scalar(2) / Scalar(basis.output_dim()));
  Vec<Scalar> arg = basis.phases * x + basis.biases;
  return scale * arg.array().cos().matrix();
}

/// Row-wise gF map of an N x n point matrix, N x m output.
Mat<double> gf_map_rows(const Mat<double>& points, const KernelBasis<double>& basis, double kappa);

/// Backward pass of gf_map_rows: given dL/dOut (N x m) accumulate dL/dPoints
/// into `grad_points` and return dL/dkappa.
double gf_map_rows_backward(const Mat<double>& points, const KernelBasis<double>& basis, double kappa,
                            const Mat<double>& grad_out, Mat<double>& grad_points);

/// Row-wise Fourier map of an N x F feature matrix, N x m output.
Mat<double> fourier_map_rows(const Mat<double>& features, const KernelBasis<double>& basis);

}  // namespace motifrgc
