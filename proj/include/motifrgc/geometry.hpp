#pragma once

// Constant-curvature gyrovector primitives on the kappa-stereographic ball
// {x : -kappa * |x|^2 < 1}, plus the product-manifold distance.
//
// Everything here is templated on the scalar type and takes Eigen expressions,
// so the same code serves the float fuzzers, the double training path and any
// autodiff scalar that models Eigen's NumTraits.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "motifrgc/errors.hpp"

namespace motifrgc {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace guard {
inline constexpr double kBallMargin = 1e-5;
inline constexpr double kDenominatorFloor = 1e-15;
inline constexpr double kArtanhClamp = 1.0 - 1e-15;
inline constexpr double kMidpointFloor = 1e-10;
}  // namespace guard

struct FactorSpec {
  double curvature = -1.0;
  int dim = 2;
};

/// Upper-hypersphere factor. Only the magnitude coordinate enters distances,
/// so the angular part is never materialized.
struct DiversifiedSpec {
  int dim = 1;
};

struct ProductManifoldSpec {
  std::vector<FactorSpec> factors;
  DiversifiedSpec diversified;

  int num_factors() const { return static_cast<int>(factors.size()); }
  int total_dim() const {
    int total = 1;
    for (const auto& f : factors) total += f.dim;
    return total;
  }
};

template <typename Scalar>
struct ProductPoint {
  std::vector<Vec<Scalar>> components;
  Scalar magnitude{0};
};

namespace detail {

// Series cut-off for |kappa * t^2| below which the curvature trigonometry is
// evaluated by its Taylor expansion around the flat limit.
inline constexpr double kSeriesCutoff = 1e-6;

}  // namespace detail

/// tan_k(t) = tan_kappa(sqrt|k| t) / sqrt|k|, i.e. tan for k > 0, tanh for
/// k < 0, identity in the flat limit.
template <typename Scalar>
Scalar tan_k(Scalar t, Scalar kappa) {
  using std::abs;
  using std::sqrt;
  using std::tan;
  using std::tanh;
  const Scalar u = kappa * t * t;
  if (abs(u) < detail::kSeriesCutoff) {
    // t (1 + u/3 + 2u^2/15)
    return t * (Scalar(1) + u / Scalar(3) + Scalar(2) * u * u / Scalar(15));
  }
  const Scalar root = sqrt(abs(kappa));
  if (kappa > 0) return tan(root * t) / root;
  return tanh(root * t) / root;
}

/// atan_k(t) = atan_kappa(sqrt|k| t) / sqrt|k|: arctan for k > 0, artanh for
/// k < 0. The artanh argument is clamped just below one; arguments that are
/// genuinely past the boundary signal a point outside the ball.
template <typename Scalar>
Scalar atan_k(Scalar t, Scalar kappa) {
  using std::abs;
  using std::atan;
  using std::atanh;
  using std::sqrt;
  const Scalar u = kappa * t * t;
  if (abs(u) < detail::kSeriesCutoff) {
    // t (1 - u/3 + u^2/5)
    return t * (Scalar(1) - u / Scalar(3) + u * u / Scalar(5));
  }
  const Scalar root = sqrt(abs(kappa));
  if (kappa > 0) return atan(root * t) / root;
  Scalar arg = root * t;
  if (arg > Scalar(1) + Scalar(1e-9)) throw BoundaryError("artanh argument beyond the ball boundary");
  if (arg > Scalar(guard::kArtanhClamp)) arg = Scalar(guard::kArtanhClamp);
  return atanh(arg) / root;
}

/// Derivative of atan_k with respect to kappa at fixed t.
template <typename Scalar>
Scalar atan_k_dkappa(Scalar t, Scalar kappa) {
  using std::abs;
  const Scalar u = kappa * t * t;
  if (abs(u) < Scalar(1e-2)) {
    // -t^3 * sum_{k>=1} (-u)^{k-1} k / (2k+1)
    Scalar acc(0);
    Scalar p(1);
    for (int k = 1; k <= 8; ++k) {
      acc += p * Scalar(k) / Scalar(2 * k + 1);
      p *= -u;
    }
    return -t * t * t * acc;
  }
  return (t / (Scalar(1) + u) - atan_k(t, kappa)) / (Scalar(2) * kappa);
}

/// Conformal factor 2 / (1 + k |v|^2).
template <typename Derived>
typename Derived::Scalar conformal_factor(const Eigen::MatrixBase<Derived>& v,
                                          typename Derived::Scalar kappa) {
  using Scalar = typename Derived::Scalar;
  return Scalar(2) / (Scalar(1) + kappa * v.squaredNorm());
}

/// Moebius (gyrovector) addition x (+)_k y.
template <typename DerivedX, typename DerivedY>
Vec<typename DerivedX::Scalar> mobius_add(const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedY>& y,
                                          typename DerivedX::Scalar kappa) {
  using Scalar = typename DerivedX::Scalar;
  using std::abs;
  const Scalar xy = x.dot(y);
  const Scalar xx = x.squaredNorm();
  const Scalar yy = y.squaredNorm();
  const Scalar den = Scalar(1) - Scalar(2) * kappa * xy + kappa * kappa * xx * yy;
  if (abs(den) < Scalar(guard::kDenominatorFloor)) {
    throw SingularAdditionError("mobius_add: denominator vanishes (antipodal pair)");
  }
  return ((Scalar(1) - Scalar(2) * kappa * xy - kappa * yy) * x + (Scalar(1) + kappa * xx) * y) / den;
}

/// Squared norm of (-x) (+)_k y via |x - y|^2 / (1 + 2k<x,y> + k^2 |x|^2 |y|^2).
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar gyro_difference_sq(const Eigen::MatrixBase<DerivedX>& x,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             typename DerivedX::Scalar kappa) {
  using Scalar = typename DerivedX::Scalar;
  using std::abs;
  const Scalar den =
      Scalar(1) + Scalar(2) * kappa * x.dot(y) + kappa * kappa * x.squaredNorm() * y.squaredNorm();
  if (abs(den) < Scalar(guard::kDenominatorFloor)) {
    throw SingularAdditionError("gyro difference: denominator vanishes (antipodal pair)");
  }
  return (x - y).squaredNorm() / den;
}

/// Geodesic distance in the factor: (2/sqrt|k|) atan_k(sqrt|k| |(-x) (+)_k y|).
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar factor_dist(const Eigen::MatrixBase<DerivedX>& x,
                                      const Eigen::MatrixBase<DerivedY>& y,
                                      typename DerivedX::Scalar kappa) {
  using Scalar = typename DerivedX::Scalar;
  using std::sqrt;
  const Scalar n = sqrt(gyro_difference_sq(x, y, kappa));
  return Scalar(2) * atan_k(n, kappa);
}

/// Squared factor distance together with its gradient in x, y and kappa.
template <typename Scalar>
struct FactorDistGrad {
  Scalar dist_sq{0};
  Vec<Scalar> d_x;
  Vec<Scalar> d_y;
  Scalar d_kappa{0};
};

template <typename DerivedX, typename DerivedY>
FactorDistGrad<typename DerivedX::Scalar> factor_dist_sq_grad(const Eigen::MatrixBase<DerivedX>& x,
                                                              const Eigen::MatrixBase<DerivedY>& y,
                                                              typename DerivedX::Scalar kappa) {
  using Scalar = typename DerivedX::Scalar;
  using std::abs;
  using std::sqrt;
  const Scalar xy = x.dot(y);
  const Scalar xx = x.squaredNorm();
  const Scalar yy = y.squaredNorm();
  const Scalar den = Scalar(1) + Scalar(2) * kappa * xy + kappa * kappa * xx * yy;
  if (abs(den) < Scalar(guard::kDenominatorFloor)) {
    throw SingularAdditionError("gyro difference: denominator vanishes (antipodal pair)");
  }
  const Vec<Scalar> diff = x - y;
  const Scalar q = diff.squaredNorm();
  const Scalar n2 = q / den;
  const Scalar n = sqrt(n2);
  const Scalar half = atan_k(n, kappa);  // d / 2

  FactorDistGrad<Scalar> out;
  out.dist_sq = Scalar(4) * half * half;

  // T/n -> 1 as n -> 0.
  const Scalar ratio = n > Scalar(1e-150) ? half / n : Scalar(1);
  Scalar dd_dn2 = Scalar(4) * ratio / (Scalar(1) + kappa * n2);
  if (kappa < 0 && sqrt(-kappa) * n > Scalar(guard::kArtanhClamp)) dd_dn2 = Scalar(0);

  const Vec<Scalar> dden_dx = Scalar(2) * kappa * y + Scalar(2) * kappa * kappa * yy * x;
  const Vec<Scalar> dden_dy = Scalar(2) * kappa * x + Scalar(2) * kappa * kappa * xx * y;
  out.d_x = dd_dn2 * (Scalar(2) * diff - n2 * dden_dx) / den;
  out.d_y = dd_dn2 * (Scalar(-2) * diff - n2 * dden_dy) / den;
  const Scalar dn2_dk = -n2 * (Scalar(2) * xy + Scalar(2) * kappa * xx * yy) / den;
  out.d_kappa = dd_dn2 * dn2_dk + Scalar(8) * half * atan_k_dkappa(n, kappa);
  return out;
}

/// Gyro-scalar halving (1/2) (x)_k w, in closed form w / (1 + sqrt(1 + k |w|^2)).
template <typename Derived>
Vec<typename Derived::Scalar> gyro_half(const Eigen::MatrixBase<Derived>& w, typename Derived::Scalar kappa) {
  using Scalar = typename Derived::Scalar;
  using std::max;
  using std::sqrt;
  const Scalar inner = max(Scalar(1) + kappa * w.squaredNorm(), Scalar(0));
  return w / (Scalar(1) + sqrt(inner));
}

/// Weighted gyro-midpoint of the rows selected by `rows` from `points`.
///
/// w = sum_i lambda_i v_i / sum_j (lambda_j - 1); unless `literal` is set the
/// result is halved with (1/2) (x)_k so that the midpoint of a single point is
/// the point itself.
template <typename Derived>
Vec<typename Derived::Scalar> gyro_midpoint(const Eigen::MatrixBase<Derived>& points,
                                            const std::vector<int>& rows,
                                            typename Derived::Scalar kappa, bool literal = false) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  if (rows.empty()) throw DegenerateMidpointError("gyro_midpoint: empty point set");
  Vec<Scalar> w = Vec<Scalar>::Zero(points.cols());
  Scalar denom(0);
  for (int r : rows) {
    const Scalar lambda = conformal_factor(points.row(r), kappa);
    w += lambda * points.row(r).transpose();
    denom += lambda - Scalar(1);
  }
  if (abs(denom) < Scalar(guard::kMidpointFloor)) {
    throw DegenerateMidpointError("gyro_midpoint: sum of (lambda - 1) vanishes");
  }
  w /= denom;
  return literal ? w : gyro_half(w, kappa);
}

/// Convenience overload over every row of `points`.
template <typename Derived>
Vec<typename Derived::Scalar> gyro_midpoint(const Eigen::MatrixBase<Derived>& points,
                                            typename Derived::Scalar kappa, bool literal = false) {
  std::vector<int> rows(static_cast<std::size_t>(points.rows()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) rows[static_cast<std::size_t>(i)] = i;
  return gyro_midpoint(points, rows, kappa, literal);
}

/// Pulls the upstream gradient `g_mu` of a midpoint back onto the selected
/// rows (accumulated into `g_points`) and onto kappa (returned).
template <typename Derived, typename DerivedG>
typename Derived::Scalar gyro_midpoint_backward(const Eigen::MatrixBase<Derived>& points,
                                                const std::vector<int>& rows,
                                                typename Derived::Scalar kappa, bool literal,
                                                const Eigen::MatrixBase<DerivedG>& g_mu,
                                                Mat<typename Derived::Scalar>& g_points) {
  using Scalar = typename Derived::Scalar;
  using std::max;
  using std::sqrt;
  const auto k = static_cast<Eigen::Index>(rows.size());
  Vec<Scalar> lambda(k);
  Vec<Scalar> w = Vec<Scalar>::Zero(points.cols());
  Scalar denom(0);
  for (Eigen::Index i = 0; i < k; ++i) {
    lambda(i) = conformal_factor(points.row(rows[static_cast<std::size_t>(i)]), kappa);
    w += lambda(i) * points.row(rows[static_cast<std::size_t>(i)]).transpose();
    denom += lambda(i) - Scalar(1);
  }
  w /= denom;

  Scalar g_kappa(0);
  Vec<Scalar> g_w;
  if (literal) {
    g_w = g_mu;
  } else {
    const Scalar rho2 = w.squaredNorm();
    const Scalar root = sqrt(max(Scalar(1) + kappa * rho2, Scalar(1e-300)));
    const Scalar b = Scalar(1) + root;
    const Scalar wg = w.dot(g_mu);
    g_w = g_mu / b - (wg / (b * b)) * kappa / root * w;
    g_kappa += -(wg / (b * b)) * rho2 / (Scalar(2) * root);
  }

  const Scalar wgw = w.dot(g_w);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int r = rows[static_cast<std::size_t>(i)];
    const auto v = points.row(r);
    const Scalar g_lambda = (v.dot(g_w) - wgw) / denom;
    const Scalar l = lambda(i);
    g_points.row(r) += (l / denom) * g_w.transpose() - g_lambda * kappa * l * l * v;
    g_kappa += -g_lambda * l * l * v.squaredNorm() / Scalar(2);
  }
  return g_kappa;
}

/// Product distance: sqrt(sum_m d_k_m(x^m, y^m)^2 + (r_x - r_y)^2).
template <typename Scalar>
Scalar product_dist(const ProductPoint<Scalar>& x, const ProductPoint<Scalar>& y,
                    const ProductManifoldSpec& spec) {
  using std::sqrt;
  if (x.components.size() != spec.factors.size() || y.components.size() != spec.factors.size()) {
    throw ContractError("product_dist: point does not conform to the manifold spec");
  }
  Scalar total(0);
  for (std::size_t m = 0; m < spec.factors.size(); ++m) {
    const Scalar d = factor_dist(x.components[m], y.components[m], Scalar(spec.factors[m].curvature));
    total += d * d;
  }
  const Scalar dr = x.magnitude - y.magnitude;
  return sqrt(total + dr * dr);
}

/// Rescales x onto radius (1 - margin)/sqrt|k| when it reaches the boundary of
/// a negatively curved ball; identity otherwise.
template <typename Derived>
Vec<typename Derived::Scalar> project_to_ball(const Eigen::MatrixBase<Derived>& x,
                                              typename Derived::Scalar kappa,
                                              typename Derived::Scalar margin = guard::kBallMargin) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  Vec<Scalar> out = x;
  if (kappa >= 0) return out;
  const Scalar max_norm = (Scalar(1) - margin) / sqrt(-kappa);
  const Scalar norm = out.norm();
  if (norm >= max_norm) out *= max_norm / norm;
  return out;
}

/// Exponential map at x applied to tangent v; used only as the optimizer's
/// retraction. The result is re-projected with the default ball margin.
template <typename DerivedX, typename DerivedV>
Vec<typename DerivedX::Scalar> exp_map(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedV>& v,
                                       typename DerivedX::Scalar kappa) {
  using Scalar = typename DerivedX::Scalar;
  using std::sqrt;
  if (!v.allFinite()) throw InvalidTangentError("exp_map: non-finite tangent vector");
  const Scalar vnorm = v.norm();
  if (vnorm == Scalar(0)) return x;
  Scalar t = conformal_factor(x, kappa) * vnorm / Scalar(2);
  if (kappa > 0) {
    // keep tan below its pole
    const Scalar limit = Scalar(1.5) / sqrt(kappa);
    if (t > limit) t = limit;
  }
  const Vec<Scalar> step = (tan_k(t, kappa) / vnorm) * v;
  return project_to_ball(mobius_add(x, step, kappa), kappa);
}

}  // namespace motifrgc
