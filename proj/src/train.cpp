#include "motifrgc/train.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "json.hpp"
#include "motifrgc/errors.hpp"
#include "motifrgc/rng.hpp"

namespace motifrgc {

namespace {

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

void adam_update(Eigen::Ref<Matrix> param, const Eigen::Ref<const Matrix>& grad, AdamMoments& mo, double lr,
                 const AdamConfig& cfg) {
  ++mo.steps;
  mo.first = cfg.beta1 * mo.first + (1.0 - cfg.beta1) * grad;
  mo.second = cfg.beta2 * mo.second + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, mo.steps);
  const double c2 = 1.0 - std::pow(cfg.beta2, mo.steps);
  param.array() -= lr * (mo.first.array() / c1) / ((mo.second.array() / c2).sqrt() + cfg.eps);
}

void require_finite(const Matrix& grad, const char* what) {
  if (!grad.allFinite()) throw InvalidTangentError(std::string("non-finite gradient for ") + what);
}

std::vector<Dense*> dense_layers(EncoderState& s) {
  std::vector<Dense*> out;
  for (auto& c : s.conv) {
    out.push_back(&c.first);
    out.push_back(&c.second);
  }
  out.push_back(&s.projector.first);
  out.push_back(&s.projector.second);
  return out;
}

std::vector<Dense*> dense_layers(EncoderGrads& g) {
  std::vector<Dense*> out;
  for (auto& c : g.conv) {
    out.push_back(&c.first);
    out.push_back(&c.second);
  }
  out.push_back(&g.projector.first);
  out.push_back(&g.projector.second);
  return out;
}

std::vector<Dense*> dense_layers(Discriminator& d) { return {&d.hidden1, &d.hidden2, &d.output}; }

std::vector<AdamMoments> moments_for(const std::vector<Dense*>& layers) {
  std::vector<AdamMoments> out;
  for (const Dense* l : layers) {
    out.push_back(AdamMoments::like(l->weight));
    out.push_back(AdamMoments::like(Matrix(l->bias)));
  }
  return out;
}

void step_layers(const std::vector<Dense*>& params, const std::vector<Dense*>& grads,
                 std::vector<AdamMoments>& moments, double lr, const char* what) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_finite(grads[i]->weight, what);
    require_finite(grads[i]->bias, what);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i]->weight, grads[i]->weight, moments[2 * i], lr, {});
    MatrixMap bias(params[i]->bias.data(), 1, params[i]->bias.size());
    ConstMatrixMap gbias(grads[i]->bias.data(), 1, grads[i]->bias.size());
    adam_update(bias, gbias, moments[2 * i + 1], lr, {});
  }
}

Matrix kernel_concat(const ForwardCache& cache) {
  KernelFeatures k;
  for (const auto& v : cache.views) k.kernels.push_back(v.kernel);
  return k.concat();
}

std::vector<Edge> sample_non_edges(const CsrAdjacency& adj, std::size_t count, std::uint64_t seed) {
  const int n = adj.num_nodes();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node(0, n - 1);
  std::vector<Edge> out;
  const std::size_t limit = 100 * count + 1000;
  for (std::size_t tries = 0; out.size() < count && tries < limit; ++tries) {
    int u = node(rng), v = node(rng);
    if (u == v || adj.has_edge(u, v)) continue;
    if (u > v) std::swap(u, v);
    out.emplace_back(u, v);
  }
  return out;
}

}  // namespace

void adam_step(Matrix& param, const Matrix& grad, AdamMoments& moments, double lr, const AdamConfig& cfg) {
  require_finite(grad, "parameter");
  adam_update(param, grad, moments, lr, cfg);
}

void riemannian_adam_step(Matrix& points, const Matrix& grad, AdamMoments& moments, double kappa, double lr,
                          const AdamConfig& cfg) {
  require_finite(grad, "ball points");
  Matrix rgrad = grad;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double lambda = conformal_factor(points.row(i), kappa);
    rgrad.row(i) /= lambda * lambda;
  }
  ++moments.steps;
  moments.first = cfg.beta1 * moments.first + (1.0 - cfg.beta1) * rgrad;
  moments.second = cfg.beta2 * moments.second + (1.0 - cfg.beta2) * rgrad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, moments.steps);
  const double c2 = 1.0 - std::pow(cfg.beta2, moments.steps);
  const Matrix direction =
      (-lr * (moments.first.array() / c1) / ((moments.second.array() / c2).sqrt() + cfg.eps)).matrix();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    points.row(i) = exp_map(points.row(i).transpose(), direction.row(i).transpose(), kappa).transpose();
  }
}

void curvature_step(CurvatureParams& params, const Vector& grad_kappa, AdamMoments& moments, double lr,
                    const AdamConfig& cfg) {
  if (!grad_kappa.allFinite()) throw InvalidTangentError("non-finite curvature gradient");
  const Vector grad_c = grad_kappa.cwiseProduct(params.values());
  adam_update(params.log_magnitude, grad_c, moments, lr, cfg);
  const double lo = std::log(CurvatureParams::kMinMagnitude);
  const double hi = std::log(CurvatureParams::kMaxMagnitude);
  params.log_magnitude = params.log_magnitude.cwiseMax(lo).cwiseMin(hi);
}

void reproject_points(EncoderState& state) {
  for (int m = 0; m < state.num_factors(); ++m) {
    const double kappa = state.kappa(m);
    if (kappa >= 0) continue;
    Matrix& p = state.factor_points[static_cast<std::size_t>(m)];
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) = project_to_ball(p.row(i).transpose(), kappa).transpose();
  }
}

void TrainConfig::validate() const {
  if (min_steps < 1 || max_steps < 1) throw ConfigError("min_steps and max_steps must be at least 1");
  if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(lr_euclidean > 0) || !(lr_riemannian > 0) || !(lr_curvature > 0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (fake_batch_size < 1) throw ConfigError("fake_batch_size must be at least 1");
  if (discriminator_width < 1) throw ConfigError("discriminator_width must be at least 1");
  if (generator.sign != 1 && generator.sign != -1) throw ConfigError("generator_sign must be +1 or -1");
  if (generator.candidate_limit < 0) throw ConfigError("candidate_limit must be nonnegative");
  if (hardness.alpha < 0) throw ConfigError("alpha must be nonnegative");
  if (hardness.temperature && !(*hardness.temperature > 0)) throw ConfigError("temperature must be positive");
  if (encoder.factors.empty()) throw ConfigError("at least one factor is required");
  for (const auto& f : encoder.factors) {
    if (f.curvature == 0.0) throw ConfigError("factor curvature must be nonzero");
    if (f.dim < 1) throw ConfigError("factor dimension must be positive");
  }
  if (encoder.kernel_dim < 1 || encoder.hidden_dim < 1 || encoder.view_dim < 1 || encoder.projector_hidden < 1) {
    throw ConfigError("layer widths must be positive");
  }
  if (!(encoder.frequency_std > 0)) throw ConfigError("frequency_std must be positive");
}

ModelState init_model(const GraphStore& g, const TrainConfig& cfg) {
  ModelState model;
  EncoderConfig enc = cfg.encoder;
  enc.seed = cfg.seed;
  model.encoder = init_features(g, enc);
  std::mt19937_64 rng(derive_seed(cfg.seed, 3));
  const int input_dim = enc.kernel_dim * model.encoder.num_views();
  model.discriminator = Discriminator::init(input_dim, cfg.discriminator_width, rng);
  return model;
}

Trainer::Trainer(const GraphStore& g, const MotifSet& m, const TrainConfig& c)
    : graph(g), motifs(m), cfg(c), propagation(normalized_adjacency(g.adjacency)), model(init_model(g, c)),
      rng(derive_seed(c.seed, 7)) {
  cfg.validate();
  for (const auto& p : model.encoder.factor_points) point_moments.push_back(AdamMoments::like(p));
  curvature_moments = AdamMoments::like(Matrix(model.encoder.curvature.log_magnitude));
  euclid_moments = moments_for(dense_layers(model.encoder));
  disc_moments = moments_for(dense_layers(model.discriminator));
}

std::pair<double, double> Trainer::min_step() {
  EncoderState& enc = model.encoder;
  ForwardCache cache;
  const ViewSet views = forward(propagation, enc, &cache);
  const TotalContrast tc = total_contrast(views.views, motifs, cfg.hardness, true);
  EncoderGrads grads = EncoderGrads::zeros_like(enc);
  backward(propagation, enc, cache, tc.view_grads, grads);

  FakeMotifBatch batch = sample_fake_motifs(enc, cfg.generator, cfg.fake_batch_size, rng());
  score_fake_motifs(batch, kernel_concat(cache), model.discriminator);
  const double surrogate = generator_surrogate_backward(enc, cfg.generator, batch, grads, cfg.reward_baseline);
  if (!std::isfinite(tc.loss)) throw NumericalFault("contrast loss is not finite");
  if (!std::isfinite(surrogate)) throw NumericalFault("generator surrogate is not finite");

  try {
    for (int m = 0; m < enc.num_factors(); ++m) {
      const auto mi = static_cast<std::size_t>(m);
      riemannian_adam_step(enc.factor_points[mi], grads.factor_points[mi], point_moments[mi], enc.kappa(m),
                           cfg.lr_riemannian);
    }
    curvature_step(enc.curvature, grads.kappa, curvature_moments, cfg.lr_curvature);
    step_layers(dense_layers(enc), dense_layers(grads), euclid_moments, cfg.lr_euclidean, "encoder weights");
  } catch (const InvalidTangentError& e) {
    throw NumericalFault(std::string("min step: ") + e.what());
  }
  reproject_points(enc);
  return {tc.loss, surrogate};
}

double Trainer::max_step() {
  if (motifs.triangles.empty()) throw SamplingError("no triangles to train the discriminator on");
  const Matrix features = kernel_views(model.encoder).concat();
  const FakeMotifBatch fake = sample_fake_motifs(model.encoder, cfg.generator, cfg.fake_batch_size, rng());
  std::uniform_int_distribution<std::size_t> pick(0, motifs.triangles.size() - 1);
  std::vector<Triple> real;
  real.reserve(static_cast<std::size_t>(cfg.fake_batch_size));
  for (int i = 0; i < cfg.fake_batch_size; ++i) real.push_back(motifs.triangles[pick(rng)]);

  Discriminator grad = Discriminator::zeros_like(model.discriminator);
  const double loss = discriminator_loss(real, triples_of(fake), features, model.discriminator, &grad);
  if (!std::isfinite(loss)) throw NumericalFault("discriminator loss is not finite");
  try {
    step_layers(dense_layers(model.discriminator), dense_layers(grad), disc_moments, cfg.lr_euclidean,
                "discriminator weights");
  } catch (const InvalidTangentError& e) {
    throw NumericalFault(std::string("max step: ") + e.what());
  }
  return loss;
}

double Trainer::validation_auc() const {
  if (!graph.edge_split) throw SplitError("validation needs an edge split");
  const auto& s = *graph.edge_split;
  Matrix views;
  if (cfg.lp_mode == LpMode::kEuclidean) views = forward(propagation, model.encoder).concat();
  const Vector pos = pair_dist_sq(model.encoder, s.valid_pos, cfg.lp_mode, &views);
  const Vector neg = pair_dist_sq(model.encoder, s.valid_neg, cfg.lp_mode, &views);
  return auc(-pos, -neg);
}

void write_log_record(std::ostream& out, const TrainLogRecord& rec) {
  nlohmann::ordered_json j;
  j["iteration"] = rec.iteration;
  j["min_updates"] = rec.min_updates;
  j["max_updates"] = rec.max_updates;
  j["contrast"] = rec.contrast;
  j["generator"] = rec.generator;
  j["discriminator"] = rec.discriminator;
  j["valid_auc"] = rec.valid_auc ? nlohmann::ordered_json(*rec.valid_auc) : nlohmann::ordered_json(nullptr);
  j["kappa"] = rec.kappa;
  out << j.dump() << '\n';
}

TrainResult train(const GraphStore& g, const MotifSet& motifs, const TrainConfig& cfg, std::ostream* log) {
  Trainer t(g, motifs, cfg);
  const bool has_valid = g.edge_split && !g.edge_split->valid_pos.empty() && !g.edge_split->valid_neg.empty();
  const bool adversarial = !motifs.triangles.empty();

  TrainResult result;
  result.best = t.model;
  result.best_valid_auc = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  auto emit = [&](TrainLogRecord rec) {
    const Vector k = t.model.encoder.curvature.values();
    rec.kappa.assign(k.data(), k.data() + k.size());
    if (log) {
      write_log_record(*log, rec);
      log->flush();
    }
    result.log.push_back(std::move(rec));
  };

  TrainLogRecord start;
  if (has_valid) {
    start.valid_auc = t.validation_auc();
    result.best_valid_auc = *start.valid_auc;
  }
  emit(start);

  int min_updates = 0, max_updates = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    TrainLogRecord rec;
    rec.iteration = it;
    for (int s = 0; s < cfg.min_steps; ++s) {
      std::tie(rec.contrast, rec.generator) = t.min_step();
      ++min_updates;
    }
    if (adversarial) {
      for (int s = 0; s < cfg.max_steps; ++s) {
        rec.discriminator = t.max_step();
        ++max_updates;
      }
    }
    rec.min_updates = min_updates;
    rec.max_updates = max_updates;
    bool stop = false;
    if (has_valid && it % cfg.eval_every == 0) {
      rec.valid_auc = t.validation_auc();
      if (*rec.valid_auc > result.best_valid_auc) {
        result.best_valid_auc = *rec.valid_auc;
        result.best = t.model;
        result.best_iteration = it;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        stop = true;
      }
    }
    emit(rec);
    if (stop) break;
  }
  if (!has_valid) {
    result.best_valid_auc = std::numeric_limits<double>::quiet_NaN();
    result.best = t.model;
    result.best_iteration = cfg.max_iterations;
  }
  fit_decoder(result.best, g, cfg.lp_mode, derive_seed(cfg.seed, 11));
  return result;
}

Matrix embed(const GraphStore& g, const EncoderState& state) { return forward(g, state).concat(); }

void fit_decoder(ModelState& model, const GraphStore& g, LpMode mode, std::uint64_t seed) {
  const std::vector<Edge> pos = g.edge_split ? g.edge_split->train_pos : g.adjacency.edges();
  if (pos.empty()) return;
  const std::vector<Edge> neg = sample_non_edges(g.adjacency, pos.size(), seed);
  if (neg.empty()) return;
  Matrix views;
  if (mode == LpMode::kEuclidean) views = embed(g, model.encoder);
  model.decoder = fit_fermi_dirac(pair_dist_sq(model.encoder, pos, mode, &views),
                                  pair_dist_sq(model.encoder, neg, mode, &views));
}

}  // namespace motifrgc
