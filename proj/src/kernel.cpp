#include "motifrgc/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace motifrgc {

namespace {

// Below this, squared distances from the expansion |x|^2 + |w|^2 - 2<x, w> are
// recomputed directly to avoid cancellation.
constexpr double kExpansionFloor = 1e-6;

struct Terms {
  Eigen::ArrayXXd q;      // |x_i - omega_j|^2
  Eigen::ArrayXXd sd;     // signed distance
  Eigen::ArrayXXd amp;    // clamped amplitude
  Eigen::ArrayXXd phase;  // lambda sd + b
  Eigen::ArrayXd xx;
  Eigen::ArrayXd num;
};

Terms eval_terms(const Mat<double>& points, const KernelBasis<double>& basis, double kappa) {
  const int n = basis.source_dim();
  if (points.cols() != n) throw ContractError("gF map: point dimension does not match the basis");
  Terms t;
  t.xx = points.rowwise().squaredNorm().array();
  t.num = 1.0 + kappa * t.xx;
  if ((t.num <= 0.0).any()) throw BoundaryError("gF map: point outside the gyrovector ball");
  const Eigen::ArrayXd ww = basis.phases.rowwise().squaredNorm().array();
  t.q = (-2.0 * (points * basis.phases.transpose())).array();
  t.q.colwise() += t.xx;
  t.q.rowwise() += ww.transpose();
  for (Eigen::Index j = 0; j < t.q.cols(); ++j) {
    for (Eigen::Index i = 0; i < t.q.rows(); ++i) {
      if (t.q(i, j) < kExpansionFloor) {
        t.q(i, j) = (points.row(i) - basis.phases.row(j)).squaredNorm();
        if (t.q(i, j) < guard::kDenominatorFloor) {
          throw CoincidentPointError("gF map: point coincides with a phase vector");
        }
      }
    }
  }
  t.sd = -t.q.log();
  t.sd.colwise() += t.num.log();
  const double half_n1 = 0.5 * (n - 1);
  t.amp = (half_n1 * t.sd).max(-kAmplitudeExponentClamp).min(kAmplitudeExponentClamp).exp();
  t.phase = t.sd.rowwise() * basis.frequencies.transpose().array();
  t.phase.rowwise() += basis.biases.transpose().array();
  return t;
}

}  // namespace

Mat<double> gf_map_rows(const Mat<double>& points, const KernelBasis<double>& basis, double kappa) {
  const Terms t = eval_terms(points, basis, kappa);
  const double scale = 1.0 / std::sqrt(static_cast<double>(basis.output_dim()));
  return (scale * t.amp * t.phase.cos()).matrix();
}

double gf_map_rows_backward(const Mat<double>& points, const KernelBasis<double>& basis, double kappa,
                            const Mat<double>& grad_out, Mat<double>& grad_points) {
  const Terms t = eval_terms(points, basis, kappa);
  const double scale = 1.0 / std::sqrt(static_cast<double>(basis.output_dim()));
  const double half_n1 = 0.5 * (basis.source_dim() - 1);
  // d out / d sd = scale A (c cos(phase) - lambda sin(phase)), c = 0 where the amplitude is clamped
  const Eigen::ArrayXXd expo = half_n1 * t.sd;
  const Eigen::ArrayXXd amp_slope =
      (expo.abs() > kAmplitudeExponentClamp).select(Eigen::ArrayXXd::Zero(expo.rows(), expo.cols()), half_n1);
  Eigen::ArrayXXd gsd = amp_slope * t.phase.cos();
  gsd -= t.phase.sin().rowwise() * basis.frequencies.transpose().array();
  gsd *= scale * t.amp * grad_out.array();

  // d sd / dx = 2 k x / num - 2 (x - omega) / q
  const Eigen::ArrayXd sum_gsd = gsd.rowwise().sum();
  const Eigen::ArrayXXd gsd_q = gsd / t.q;
  const Eigen::ArrayXd sum_gsd_q = gsd_q.rowwise().sum();
  const Eigen::ArrayXd self = 2.0 * kappa * sum_gsd / t.num - 2.0 * sum_gsd_q;
  grad_points.noalias() += self.matrix().asDiagonal() * points;
  grad_points.noalias() += 2.0 * gsd_q.matrix() * basis.phases;
  return (sum_gsd * t.xx / t.num).sum();
}

Mat<double> fourier_map_rows(const Mat<double>& features, const KernelBasis<double>& basis) {
  if (features.cols() != basis.source_dim()) throw ContractError("fourier_map_rows: feature width does not match the basis");
  const double scale = std::sqrt(2.0 / basis.output_dim());
  Mat<double> arg = features * basis.phases.transpose();
  arg.rowwise() += basis.biases.transpose();
  return scale * arg.array().cos().matrix();
}

}  // namespace motifrgc
