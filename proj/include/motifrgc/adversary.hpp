#pragma once

// Motif generator (distance-softmax node selection on the product manifold,
// trained by policy gradient) and the MLP motif discriminator.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "motifrgc/encoder.hpp"
#include "motifrgc/graph.hpp"
#include "motifrgc/nn.hpp"

namespace motifrgc {

struct GeneratorConfig {
  /// +1 prefers candidates far from the centroid, -1 near ones.
  int sign = 1;
  bool literal_midpoint = false;
  /// 0 = softmax over all of V \ S'; otherwise a uniform subsample of this size.
  int candidate_limit = 0;
};

/// Squared factor distances from every row of `points` to `mu`.
Vector factor_dist_sq_rows(const Matrix& points, const Vector& mu, double kappa);

/// Pulls g (per-row upstream on the squared distances) back onto the rows
/// (accumulated into g_points) and mu (accumulated into g_mu); returns dL/dkappa.
double factor_dist_sq_rows_backward(const Matrix& points, const Vector& mu, double kappa, const Vector& g,
                                    Matrix& g_points, Vector& g_mu);

/// Centroid of S': per-factor gyro-midpoints plus the mean magnitude.
ProductPoint<double> selection_centroid(const EncoderState& state, const std::vector<int>& selected,
                                        bool literal_midpoint = false);

/// softmax(sign * d) computed after shifting by the maximum.
Vector selection_from_distances(const Vector& dist, int sign);

struct Selection {
  std::vector<int> candidates;
  Vector dist;  // product distance of each candidate to the centroid
  Vector prob;
};

/// P(v | S') over V \ S' (or over `candidates` when given).
Selection selection_distribution(const EncoderState& state, const std::vector<int>& selected,
                                 const GeneratorConfig& cfg, const std::vector<int>* candidates = nullptr);

struct FakeMotif {
  Triple nodes{};  // nodes[0] is the seed node
  std::array<double, 2> step_log_prob{};
  double log_prob = 0.0;
  /// Candidate sets of the two selection steps; empty means all of V \ S'.
  std::array<std::vector<int>, 2> candidates;
};

struct FakeMotifBatch {
  std::vector<FakeMotif> motifs;
  Vector rewards;  // log(1 - D(S)), filled in by score_fake_motifs
};

FakeMotifBatch sample_fake_motifs(const EncoderState& state, const GeneratorConfig& cfg, int count,
                                  std::uint64_t seed, int k = 3);

/// log G of an ordered triple: sum of the two selection-step log-probabilities.
double ordered_log_prob(const EncoderState& state, const GeneratorConfig& cfg, const Triple& nodes);

/// Log-likelihood of an unordered triple: log-sum-exp over all six orderings of
/// log(1/N) + ordered_log_prob.
double triple_log_likelihood(const EncoderState& state, const GeneratorConfig& cfg, const Triple& nodes);

struct Discriminator {
  Dense hidden1;
  Dense hidden2;
  Dense output;

  static Discriminator init(int input_dim, int width, std::mt19937_64& rng);
  static Discriminator zeros_like(const Discriminator& other);
  int input_dim() const { return hidden1.in_dim(); }
};

/// Row-wise mean of the three nodes' feature rows.
Matrix pool_triples(const std::vector<Triple>& triples, const Matrix& features);

double discriminate(const Triple& triple, const Matrix& features, const Discriminator& disc);
Vector discriminate(const std::vector<Triple>& triples, const Matrix& features, const Discriminator& disc);

inline constexpr double kProbClampLow = 1e-7;
inline constexpr double kProbClampHigh = 1.0 - 1e-7;

/// -(mean log D(real) + mean log(1 - D(fake))); gradients accumulated into
/// `grad` when given.
double discriminator_loss(const std::vector<Triple>& real, const std::vector<Triple>& fake, const Matrix& features,
                          const Discriminator& disc, Discriminator* grad = nullptr);

/// Sets rewards r_S = log(1 - D(S)) with the clamped probability.
void score_fake_motifs(FakeMotifBatch& batch, const Matrix& features, const Discriminator& disc);

std::vector<Triple> triples_of(const FakeMotifBatch& batch);

/// mean_S (r_S - b) log G(S) with b the batch-mean reward (0 when
/// `use_baseline` is false). Rewards are constants.
double generator_surrogate_loss(const FakeMotifBatch& batch, bool use_baseline = true);

/// Recomputes the surrogate at the current state for the frozen samples and
/// accumulates its gradient into grads.factor_points and grads.kappa.
double generator_surrogate_backward(const EncoderState& state, const GeneratorConfig& cfg,
                                    const FakeMotifBatch& batch, EncoderGrads& grads, bool use_baseline = true);

}  // namespace motifrgc
