#pragma once

// Optimizers and the alternating min (encoder, generator) / max
// (discriminator) training loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "motifrgc/adversary.hpp"
#include "motifrgc/contrast.hpp"
#include "motifrgc/encoder.hpp"
#include "motifrgc/evaluation.hpp"

namespace motifrgc {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments of one parameter block plus its step count.
struct AdamMoments {
  Matrix first;
  Matrix second;
  int steps = 0;

  static AdamMoments like(const Matrix& param) {
    return {Matrix::Zero(param.rows(), param.cols()), Matrix::Zero(param.rows(), param.cols()), 0};
  }
};

/// Bias-corrected Adam step on a Euclidean parameter.
void adam_step(Matrix& param, const Matrix& grad, AdamMoments& moments, double lr, const AdamConfig& cfg = {});

/// Adam on a matrix of ball points: the Euclidean gradient of each row is
/// rescaled by 1 / lambda_x^2, moments are kept coordinate-wise, and the step
/// is taken with the exponential map at the row, then re-projected.
void riemannian_adam_step(Matrix& points, const Matrix& grad, AdamMoments& moments, double kappa, double lr,
                          const AdamConfig& cfg = {});

/// Adam on the log-magnitudes c_m given dL/dkappa_m (chain rule
/// dL/dc_m = kappa_m dL/dkappa_m); |kappa_m| stays inside the clamp range.
void curvature_step(CurvatureParams& params, const Vector& grad_kappa, AdamMoments& moments, double lr,
                    const AdamConfig& cfg = {});

/// Re-projects every factor point into the ball of its current curvature.
void reproject_points(EncoderState& state);

struct TrainConfig {
  EncoderConfig encoder;
  HardnessConfig hardness;
  GeneratorConfig generator;
  int min_steps = 5;
  int max_steps = 5;
  int max_iterations = 200;
  int eval_every = 1;
  int patience = 100;
  double lr_euclidean = 1e-2;
  double lr_riemannian = 1e-2;
  double lr_curvature = 1e-2;
  int fake_batch_size = 64;
  int discriminator_width = 64;
  bool reward_baseline = true;
  LpMode lp_mode = LpMode::kManifold;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ModelState {
  EncoderState encoder;
  Discriminator discriminator;
  FermiDirac decoder;
};

struct TrainLogRecord {
  int iteration = 0;
  int min_updates = 0;
  int max_updates = 0;
  double contrast = 0.0;
  double generator = 0.0;
  double discriminator = 0.0;
  std::optional<double> valid_auc;
  std::vector<double> kappa;
};

struct TrainResult {
  ModelState best;
  std::vector<TrainLogRecord> log;
  double best_valid_auc = 0.0;  // NaN when the graph has no validation edges
  int best_iteration = 0;
};

/// Initial model: encoder from init_features, discriminator over the
/// concatenated kernel features.
ModelState init_model(const GraphStore& g, const TrainConfig& cfg);

/// Mutable training state shared by the loop and the step functions.
struct Trainer {
  Trainer(const GraphStore& g, const MotifSet& motifs, const TrainConfig& cfg);

  /// One min-phase update: contrast plus generator surrogate, then Riemannian,
  /// curvature and Euclidean steps. Returns (contrast, surrogate).
  std::pair<double, double> min_step();
  /// One max-phase update of the discriminator. Returns its loss before the step.
  double max_step();
  /// Validation link-prediction AUC of the current state.
  double validation_auc() const;

  const GraphStore& graph;
  const MotifSet& motifs;
  TrainConfig cfg;
  SparseMatrix propagation;
  ModelState model;
  std::mt19937_64 rng;

  std::vector<AdamMoments> point_moments;
  AdamMoments curvature_moments;
  std::vector<AdamMoments> euclid_moments;
  std::vector<AdamMoments> disc_moments;
};

/// Writes one JSON line per record.
void write_log_record(std::ostream& out, const TrainLogRecord& rec);

/// Runs the alternating loop on `g` (whose adjacency should hold only training
/// edges) and returns the best-on-validation state. Records are streamed to
/// `log` when given.
TrainResult train(const GraphStore& g, const MotifSet& motifs, const TrainConfig& cfg, std::ostream* log = nullptr);

/// Fits the Fermi-Dirac decoder of `model` on training positives against an
/// equal number of seeded uniform non-edges.
void fit_decoder(ModelState& model, const GraphStore& g, LpMode mode, std::uint64_t seed);

/// Concatenated views of the current state.
Matrix embed(const GraphStore& g, const EncoderState& state);

}  // namespace motifrgc
