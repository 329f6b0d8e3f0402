#pragma once

#include <optional>
#include <vector>

#include "motifrgc/graph.hpp"
#include "motifrgc/nn.hpp"

namespace motifrgc {

/// h = |1[j in V3(i)] - Normal(s)|^alpha with cosine s and Normal(s) = (s+1)/2.
struct HardnessConfig {
  double alpha = 2.0;
  /// Optional softmax temperature; similarities are divided by it.
  std::optional<double> temperature;
};

double normalize_similarity(double cosine);
double hardness_from_normalized(bool positive, double normalized, double alpha);
double cosine_similarity(const Vector& a, const Vector& b);

/// Hardness of the pair (z_i, z_j); `positive` is whether j is a motif
/// neighbour of i (i itself counts as positive).
double hardness(const Vector& zi, const Vector& zj, bool positive, const HardnessConfig& cfg);

struct ContrastResult {
  double loss = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

/// Directed Riemannian contrast RC(a -> b): for each anchor row i of `a`,
/// -log[exp(s(a_i, b_i)) / sum_j exp(h_ij s(a_i, b_j))]. The denominator
/// includes j = i; h is held constant when differentiating. Gradients are
/// computed when `with_grad` is set.
ContrastResult rc_loss(const Matrix& a, const Matrix& b, const MotifSet& motifs, const HardnessConfig& cfg,
                       bool with_grad = false);

struct TotalContrast {
  double loss = 0.0;
  std::vector<Matrix> view_grads;  // same indexing as ViewSet::views
};

/// sum_m RC(z^m -> z^0) + RC(z^0 -> z^m).
TotalContrast total_contrast(const std::vector<Matrix>& views, const MotifSet& motifs, const HardnessConfig& cfg,
                             bool with_grad = false);

}  // namespace motifrgc
