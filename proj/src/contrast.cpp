#include "motifrgc/contrast.hpp"

#include <algorithm>
#include <cmath>

#include "motifrgc/errors.hpp"

namespace motifrgc {

double normalize_similarity(double cosine) { return std::clamp(0.5 * (cosine + 1.0), 0.0, 1.0); }

double hardness_from_normalized(bool positive, double normalized, double alpha) {
  const double gap = std::abs((positive ? 1.0 : 0.0) - normalized);
  if (alpha == 2.0) return gap * gap;
  return std::pow(gap, alpha);
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw UndefinedSimilarityError("cosine similarity of a zero vector");
  return a.dot(b) / (na * nb);
}

double hardness(const Vector& zi, const Vector& zj, bool positive, const HardnessConfig& cfg) {
  if (cfg.alpha < 0.0) throw ContractError("hardness exponent must be nonnegative");
  return hardness_from_normalized(positive, normalize_similarity(cosine_similarity(zi, zj)), cfg.alpha);
}

namespace {

constexpr Eigen::Index kBlockRows = 512;

Matrix normalized_rows(const Matrix& m, Vector& norms) {
  norms = m.rowwise().norm();
  if ((norms.array() == 0.0).any()) throw UndefinedSimilarityError("cosine similarity of a zero view row");
  return norms.cwiseInverse().asDiagonal() * m;
}

// d/du of u/|u| applied to upstream g
Matrix normalize_backward(const Matrix& unit, const Vector& norms, const Matrix& g) {
  const Vector proj = unit.cwiseProduct(g).rowwise().sum();
  return norms.cwiseInverse().asDiagonal() * (g - proj.asDiagonal() * unit);
}

}  // namespace

ContrastResult rc_loss(const Matrix& a, const Matrix& b, const MotifSet& motifs, const HardnessConfig& cfg,
                       bool with_grad) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractError("rc_loss: view shapes differ");
  if (cfg.alpha < 0.0) throw ContractError("hardness exponent must be nonnegative");
  const Eigen::Index n = a.rows();
  const double inv_temp = cfg.temperature ? 1.0 / *cfg.temperature : 1.0;
  Vector norm_a;
  Vector norm_b;
  const Matrix ua = normalized_rows(a, norm_a);
  const Matrix ub = normalized_rows(b, norm_b);

  ContrastResult out;
  Matrix grad_ua;
  Matrix grad_ub;
  if (with_grad) {
    grad_ua = Matrix::Zero(n, a.cols());
    grad_ub = Matrix::Zero(n, b.cols());
  }
  Matrix sim, weight, expo;
  for (Eigen::Index start = 0; start < n; start += kBlockRows) {
    const Eigen::Index rows = std::min(kBlockRows, n - start);
    sim.noalias() = ua.middleRows(start, rows) * ub.transpose();
    // negative branch everywhere, then the positive branch on V3(i) and the diagonal
    weight = (0.5 * (sim.array() + 1.0)).max(0.0).min(1.0);
    if (cfg.alpha == 2.0) {
      weight = weight.cwiseAbs2();
    } else {
      weight = weight.array().pow(cfg.alpha);
    }
    auto positive = [&](Eigen::Index r, Eigen::Index j) {
      weight(r, j) = hardness_from_normalized(true, normalize_similarity(sim(r, j)), cfg.alpha);
    };
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      positive(r, i);
      if (!motifs.positive_sets.empty()) {
        for (int j : motifs.positive_sets[static_cast<std::size_t>(i)]) positive(r, j);
      }
    }
    expo = weight.cwiseProduct(sim) * inv_temp;  // logits
    const Vector row_max = expo.rowwise().maxCoeff();
    expo = (expo.colwise() - row_max).array().exp();
    const Vector row_sum = expo.rowwise().sum();
    for (Eigen::Index r = 0; r < rows; ++r) {
      out.loss += -sim(r, start + r) * inv_temp + row_max(r) + std::log(row_sum(r));
    }
    if (with_grad) {
      // softmax times h, minus the anchor indicator
      expo = row_sum.cwiseInverse().asDiagonal() * expo;
      expo = expo.cwiseProduct(weight) * inv_temp;
      for (Eigen::Index r = 0; r < rows; ++r) expo(r, start + r) -= inv_temp;
      grad_ua.middleRows(start, rows).noalias() += expo * ub;
      grad_ub.noalias() += expo.transpose() * ua.middleRows(start, rows);
    }
  }
  if (with_grad) {
    out.grad_a = normalize_backward(ua, norm_a, grad_ua);
    out.grad_b = normalize_backward(ub, norm_b, grad_ub);
  }
  return out;
}

namespace {

// Above this size the two directions are computed block-wise and separately.
constexpr Eigen::Index kPairedMaxNodes = 6000;

// RC(a -> b) + RC(b -> a) from one similarity matrix: the hardness weights are
// shared because S_ba = S_ab^T and the positive sets are symmetric. Logits are
// bounded by 1 / temperature, which serves as a common softmax shift.
ContrastResult rc_pair(const Matrix& a, const Matrix& b, const MotifSet& motifs, const HardnessConfig& cfg,
                       bool with_grad) {
  const Eigen::Index n = a.rows();
  const double inv_temp = cfg.temperature ? 1.0 / *cfg.temperature : 1.0;
  Vector norm_a;
  Vector norm_b;
  const Matrix ua = normalized_rows(a, norm_a);
  const Matrix ub = normalized_rows(b, norm_b);
  const Matrix sim = ua * ub.transpose();
  Matrix weight = (0.5 * (sim.array() + 1.0)).max(0.0).min(1.0);
  if (cfg.alpha == 2.0) {
    weight = weight.cwiseAbs2();
  } else {
    weight = weight.array().pow(cfg.alpha);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    weight(i, i) = hardness_from_normalized(true, normalize_similarity(sim(i, i)), cfg.alpha);
    if (motifs.positive_sets.empty()) continue;
    for (int j : motifs.positive_sets[static_cast<std::size_t>(i)]) {
      weight(i, j) = hardness_from_normalized(true, normalize_similarity(sim(i, j)), cfg.alpha);
    }
  }
  Matrix expo = ((weight.cwiseProduct(sim) * inv_temp).array() - inv_temp).exp();
  const Vector row_sum = expo.rowwise().sum();
  const RowVector col_sum = expo.colwise().sum();
  ContrastResult out;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.loss += -2.0 * sim(i, i) * inv_temp + 2.0 * inv_temp + std::log(row_sum(i)) + std::log(col_sum(i));
  }
  if (!with_grad) return out;
  expo = (row_sum.cwiseInverse().asDiagonal() * expo + expo * col_sum.cwiseInverse().asDiagonal())
             .cwiseProduct(weight) *
         inv_temp;
  expo.diagonal().array() -= 2.0 * inv_temp;
  out.grad_a = normalize_backward(ua, norm_a, expo * ub);
  out.grad_b = normalize_backward(ub, norm_b, expo.transpose() * ua);
  return out;
}

}  // namespace

TotalContrast total_contrast(const std::vector<Matrix>& views, const MotifSet& motifs, const HardnessConfig& cfg,
                             bool with_grad) {
  if (views.size() < 2) throw ContractError("total_contrast needs the Euclidean view and at least one factor view");
  if (cfg.alpha < 0.0) throw ContractError("hardness exponent must be nonnegative");
  const double inv_temp = cfg.temperature ? 1.0 / *cfg.temperature : 1.0;
  const bool paired = views[0].rows() <= kPairedMaxNodes && inv_temp <= 300.0;
  TotalContrast out;
  if (with_grad) {
    for (const auto& v : views) out.view_grads.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
  for (std::size_t m = 1; m < views.size(); ++m) {
    if (views[m].rows() != views[0].rows() || views[m].cols() != views[0].cols()) {
      throw ContractError("total_contrast: view shapes differ");
    }
    if (paired) {
      const ContrastResult both = rc_pair(views[m], views[0], motifs, cfg, with_grad);
      out.loss += both.loss;
      if (with_grad) {
        out.view_grads[m] += both.grad_a;
        out.view_grads[0] += both.grad_b;
      }
      continue;
    }
    const ContrastResult forward = rc_loss(views[m], views[0], motifs, cfg, with_grad);
    const ContrastResult reverse = rc_loss(views[0], views[m], motifs, cfg, with_grad);
    out.loss += forward.loss + reverse.loss;
    if (with_grad) {
      out.view_grads[m] += forward.grad_a + reverse.grad_b;
      out.view_grads[0] += forward.grad_b + reverse.grad_a;
    }
  }
  return out;
}

}  // namespace motifrgc
