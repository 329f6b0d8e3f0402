#pragma once

// Fermi-Dirac link scoring, ranking metrics, the linear node probe and
// triangle-generation scoring.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "motifrgc/adversary.hpp"
#include "motifrgc/encoder.hpp"
#include "motifrgc/graph.hpp"

namespace motifrgc {

inline constexpr double kFermiDiracExponentClamp = 50.0;

/// 1 / (exp((d_sq - r) / t) + 1), exponent clamped to +-50.
double fermi_dirac(double d_sq, double r, double t);

struct FermiDirac {
  double r = 2.0;
  double t = 1.0;

  double operator()(double d_sq) const { return fermi_dirac(d_sq, r, t); }
};

/// Fits (r, t) by gradient descent on the logistic likelihood of positive vs
/// negative squared distances, starting from `init`.
FermiDirac fit_fermi_dirac(const Vector& pos_d_sq, const Vector& neg_d_sq, FermiDirac init = {},
                           int iterations = 300, double lr = 0.05);

enum class LpMode { kManifold, kEuclidean };
LpMode parse_lp_mode(const std::string& name);
std::string to_string(LpMode mode);

/// Squared distances of node pairs: product-manifold distance over the
/// product-layer points (manifold) or Euclidean distance between the
/// concatenated views (euclidean, `views` required).
Vector pair_dist_sq(const EncoderState& state, const std::vector<Edge>& pairs, LpMode mode,
                    const Matrix* views = nullptr);

Vector lp_scores(const EncoderState& state, const std::vector<Edge>& pairs, LpMode mode, const FermiDirac& decoder,
                 const Matrix* views = nullptr);

/// Rank AUC, ties counted one half.
double auc(const Vector& pos, const Vector& neg);
/// Average precision with step interpolation over distinct score thresholds.
double ap(const Vector& pos, const Vector& neg);
double acc(const std::vector<int>& pred, const std::vector<int>& labels);

struct ProbeConfig {
  std::vector<double> weight_decays{0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  int iterations = 300;
  double lr = 0.05;
};

struct ProbeResult {
  double test_acc = 0.0;
  double valid_acc = 0.0;
  double weight_decay = 0.0;
};

/// Linear softmax probe on standardized features, trained on split.train with
/// the weight decay that maximizes validation accuracy; reports test accuracy.
ProbeResult node_classify(const Matrix& features, const std::optional<std::vector<int>>& labels,
                          const NodeSplit& split, const ProbeConfig& cfg = {});

/// AUC of seed-marginalized generator log-likelihoods of real vs negative triples.
double triangle_generation_auc(const EncoderState& state, const GeneratorConfig& cfg,
                               const std::vector<Triple>& positives, const std::vector<Triple>& negatives);

struct MetricsReport {
  std::optional<double> lp_auc, lp_ap, nc_acc, tri_auc;
  std::optional<std::uint64_t> seed;
};

/// One record per seed plus mean / std of every metric present.
std::string report_json(const std::vector<MetricsReport>& per_seed);

}  // namespace motifrgc
