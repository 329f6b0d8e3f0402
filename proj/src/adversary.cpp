#include "motifrgc/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "motifrgc/errors.hpp"

namespace motifrgc {

namespace {

struct RowTerms {
  Vector xy, xx, den, n2, half;
  double mm = 0.0;
};

RowTerms row_terms(const Matrix& points, const Vector& mu, double kappa) {
  RowTerms t;
  t.xy = points * mu;
  t.xx = points.rowwise().squaredNorm();
  t.mm = mu.squaredNorm();
  t.den = (1.0 + 2.0 * kappa * t.xy.array() + kappa * kappa * t.mm * t.xx.array()).matrix();
  if ((t.den.array().abs() < guard::kDenominatorFloor).any()) {
    throw SingularAdditionError("gyro difference: denominator vanishes (antipodal pair)");
  }
  const Vector q = (t.xx.array() - 2.0 * t.xy.array() + t.mm).max(0.0).matrix();
  t.n2 = q.cwiseQuotient(t.den).cwiseMax(0.0);
  t.half.resize(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) t.half(i) = atan_k(std::sqrt(t.n2(i)), kappa);
  return t;
}

double log_sum_exp(const double* v, std::size_t n) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) hi = std::max(hi, v[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - hi);
  return hi + std::log(s);
}

std::vector<int> complement(int n, const std::vector<int>& selected) {
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int s : selected) taken[static_cast<std::size_t>(s)] = 1;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n) - selected.size());
  for (int v = 0; v < n; ++v) {
    if (!taken[static_cast<std::size_t>(v)]) out.push_back(v);
  }
  return out;
}

Matrix pooled_forward(const Discriminator& d, const Matrix& x, Matrix* pre1, Matrix* h1, Matrix* pre2,
                      Matrix* h2) {
  Matrix a1 = d.hidden1(x);
  Matrix b1 = elu(a1);
  Matrix a2 = d.hidden2(b1);
  Matrix b2 = elu(a2);
  Matrix z = d.output(b2);
  if (pre1) {
    *pre1 = std::move(a1);
    *h1 = std::move(b1);
    *pre2 = std::move(a2);
    *h2 = std::move(b2);
  }
  return z;
}

}  // namespace

Vector factor_dist_sq_rows(const Matrix& points, const Vector& mu, double kappa) {
  const RowTerms t = row_terms(points, mu, kappa);
  return 4.0 * t.half.cwiseAbs2();
}

double factor_dist_sq_rows_backward(const Matrix& points, const Vector& mu, double kappa, const Vector& g,
                                    Matrix& g_points, Vector& g_mu) {
  const RowTerms t = row_terms(points, mu, kappa);
  const Eigen::Index n = points.rows();
  Vector a(n);
  double g_kappa = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (g(i) == 0.0) {
      a(i) = 0.0;
      continue;
    }
    const double nn = std::sqrt(t.n2(i));
    const double ratio = nn > 1e-150 ? t.half(i) / nn : 1.0;
    double dd_dn2 = 4.0 * ratio / (1.0 + kappa * t.n2(i));
    if (kappa < 0 && std::sqrt(-kappa) * nn > guard::kArtanhClamp) dd_dn2 = 0.0;
    a(i) = g(i) * dd_dn2 / t.den(i);
    const double dn2_dk = -t.n2(i) * (2.0 * t.xy(i) + 2.0 * kappa * t.xx(i) * t.mm) / t.den(i);
    g_kappa += g(i) * (dd_dn2 * dn2_dk + 8.0 * t.half(i) * atan_k_dkappa(nn, kappa));
  }
  const Vector self_coef = (a.array() * (2.0 - 2.0 * kappa * kappa * t.mm * t.n2.array())).matrix();
  const Vector mu_coef = (a.array() * (2.0 + 2.0 * kappa * t.n2.array())).matrix();
  g_points.noalias() += self_coef.asDiagonal() * points;
  g_points.noalias() -= mu_coef * mu.transpose();
  g_mu.noalias() -= points.transpose() * mu_coef;
  g_mu += (a.array() * (2.0 - 2.0 * kappa * kappa * t.n2.array() * t.xx.array())).sum() * mu;
  return g_kappa;
}

ProductPoint<double> selection_centroid(const EncoderState& state, const std::vector<int>& selected,
                                        bool literal_midpoint) {
  ProductPoint<double> mu;
  for (int m = 0; m < state.num_factors(); ++m) {
    mu.components.push_back(
        gyro_midpoint(state.factor_points[static_cast<std::size_t>(m)], selected, state.kappa(m), literal_midpoint));
  }
  double r = 0.0;
  for (int s : selected) r += state.magnitudes(s);
  mu.magnitude = r / static_cast<double>(selected.size());
  return mu;
}

Vector selection_from_distances(const Vector& dist, int sign) {
  const Vector logits = static_cast<double>(sign) * dist;
  const double hi = logits.maxCoeff();
  Vector p = (logits.array() - hi).exp().matrix();
  return p / p.sum();
}

namespace {

// squared product distance of every node to mu
Vector all_dist_sq(const EncoderState& state, const ProductPoint<double>& mu) {
  Vector total = (state.magnitudes.array() - mu.magnitude).square().matrix();
  for (int m = 0; m < state.num_factors(); ++m) {
    total += factor_dist_sq_rows(state.factor_points[static_cast<std::size_t>(m)],
                                 mu.components[static_cast<std::size_t>(m)], state.kappa(m));
  }
  return total;
}

}  // namespace

Selection selection_distribution(const EncoderState& state, const std::vector<int>& selected,
                                 const GeneratorConfig& cfg, const std::vector<int>* candidates) {
  const int n = state.num_nodes();
  if (selected.empty()) throw ContractError("selection_distribution: empty selected set");
  if (static_cast<int>(selected.size()) >= n) throw ContractError("selection_distribution: no candidates left");
  Selection out;
  out.candidates = candidates ? *candidates : complement(n, selected);
  const Vector dsq = all_dist_sq(state, selection_centroid(state, selected, cfg.literal_midpoint));
  out.dist.resize(static_cast<Eigen::Index>(out.candidates.size()));
  for (std::size_t c = 0; c < out.candidates.size(); ++c) {
    out.dist(static_cast<Eigen::Index>(c)) = std::sqrt(dsq(out.candidates[c]));
  }
  out.prob = selection_from_distances(out.dist, cfg.sign);
  return out;
}

FakeMotifBatch sample_fake_motifs(const EncoderState& state, const GeneratorConfig& cfg, int count,
                                  std::uint64_t seed, int k) {
  if (k != 3) throw ContractError("only triangle motifs (k = 3) are supported");
  if (count < 1) throw ContractError("fake motif count must be positive");
  const int n = state.num_nodes();
  if (n < k) throw SamplingError("graph has fewer nodes than the motif size");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_seed(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  FakeMotifBatch batch;
  batch.motifs.resize(static_cast<std::size_t>(count));
  for (auto& motif : batch.motifs) {
    std::vector<int> selected{pick_seed(rng)};
    for (int step = 0; step < k - 1; ++step) {
      std::vector<int> pool = complement(n, selected);
      const bool subsample = cfg.candidate_limit > 0 && static_cast<int>(pool.size()) > cfg.candidate_limit;
      if (subsample) {
        for (int i = 0; i < cfg.candidate_limit; ++i) {
          std::uniform_int_distribution<int> j(i, static_cast<int>(pool.size()) - 1);
          std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j(rng))]);
        }
        pool.resize(static_cast<std::size_t>(cfg.candidate_limit));
      }
      const Selection sel = selection_distribution(state, selected, cfg, &pool);
      const double u = unit(rng);
      double acc = 0.0;
      Eigen::Index chosen = sel.prob.size() - 1;
      for (Eigen::Index c = 0; c < sel.prob.size(); ++c) {
        acc += sel.prob(c);
        if (u < acc) {
          chosen = c;
          break;
        }
      }
      // never land on a zero-probability tail entry through rounding
      while (sel.prob(chosen) == 0.0 && chosen > 0) --chosen;
      const double lp = std::log(sel.prob(chosen));
      if (!std::isfinite(lp)) throw NumericalFault("generator step log-probability is not finite");
      motif.step_log_prob[static_cast<std::size_t>(step)] = lp;
      motif.log_prob += lp;
      if (subsample) motif.candidates[static_cast<std::size_t>(step)] = std::move(pool);
      selected.push_back(sel.candidates[static_cast<std::size_t>(chosen)]);
    }
    motif.nodes = {selected[0], selected[1], selected[2]};
  }
  batch.rewards = Vector::Zero(count);
  return batch;
}

double ordered_log_prob(const EncoderState& state, const GeneratorConfig& cfg, const Triple& nodes) {
  double total = 0.0;
  std::vector<int> selected{nodes[0]};
  for (int step = 1; step < 3; ++step) {
    const Selection sel = selection_distribution(state, selected, cfg);
    const auto it = std::find(sel.candidates.begin(), sel.candidates.end(), nodes[static_cast<std::size_t>(step)]);
    if (it == sel.candidates.end()) throw ContractError("triple has repeated nodes");
    total += std::log(sel.prob(it - sel.candidates.begin()));
    selected.push_back(nodes[static_cast<std::size_t>(step)]);
  }
  return total;
}

double triple_log_likelihood(const EncoderState& state, const GeneratorConfig& cfg, const Triple& nodes) {
  Triple order = nodes;
  std::sort(order.begin(), order.end());
  std::array<double, 6> terms{};
  std::size_t at = 0;
  const double seed_term = -std::log(static_cast<double>(state.num_nodes()));
  do {
    terms[at++] = seed_term + ordered_log_prob(state, cfg, order);
  } while (std::next_permutation(order.begin(), order.end()));
  return log_sum_exp(terms.data(), at);
}

Discriminator Discriminator::init(int input_dim, int width, std::mt19937_64& rng) {
  return {Dense::glorot(input_dim, width, rng), Dense::glorot(width, width, rng), Dense::glorot(width, 1, rng)};
}

Discriminator Discriminator::zeros_like(const Discriminator& other) {
  return {Dense::zeros_like(other.hidden1), Dense::zeros_like(other.hidden2), Dense::zeros_like(other.output)};
}

Matrix pool_triples(const std::vector<Triple>& triples, const Matrix& features) {
  Matrix out(static_cast<Eigen::Index>(triples.size()), features.cols());
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const auto& s = triples[t];
    out.row(static_cast<Eigen::Index>(t)) = (features.row(s[0]) + features.row(s[1]) + features.row(s[2])) / 3.0;
  }
  return out;
}

double discriminate(const Triple& triple, const Matrix& features, const Discriminator& disc) {
  return discriminate(std::vector<Triple>{triple}, features, disc)(0);
}

Vector discriminate(const std::vector<Triple>& triples, const Matrix& features, const Discriminator& disc) {
  const Matrix z = pooled_forward(disc, pool_triples(triples, features), nullptr, nullptr, nullptr, nullptr);
  return z.col(0).unaryExpr([](double v) { return sigmoid(v); });
}

double discriminator_loss(const std::vector<Triple>& real, const std::vector<Triple>& fake, const Matrix& features,
                          const Discriminator& disc, Discriminator* grad) {
  if (real.empty() || fake.empty()) throw ContractError("discriminator_loss: empty batch");
  std::vector<Triple> all = real;
  all.insert(all.end(), fake.begin(), fake.end());
  const Matrix x = pool_triples(all, features);
  Matrix pre1, h1, pre2, h2;
  const Matrix z = pooled_forward(disc, x, &pre1, &h1, &pre2, &h2);
  const auto n_real = static_cast<Eigen::Index>(real.size());
  const auto n_fake = static_cast<Eigen::Index>(fake.size());
  double real_term = 0.0;
  double fake_term = 0.0;
  Matrix gz = Matrix::Zero(z.rows(), 1);
  // gradients follow the unclamped log-sigmoid so a saturated discriminator can recover
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double p = sigmoid(z(i, 0));
    if (i < n_real) {
      real_term += std::log(std::clamp(p, kProbClampLow, kProbClampHigh));
      gz(i, 0) = -(1.0 - p) / static_cast<double>(n_real);
    } else {
      fake_term += std::log(std::clamp(1.0 - p, kProbClampLow, kProbClampHigh));
      gz(i, 0) = p / static_cast<double>(n_fake);
    }
  }
  const double loss = -(real_term / static_cast<double>(n_real) + fake_term / static_cast<double>(n_fake));
  if (grad) {
    Matrix g = dense_backward(disc.output, h2, gz, grad->output);
    g = elu_backward(pre2, g);
    g = dense_backward(disc.hidden2, h1, g, grad->hidden2);
    g = elu_backward(pre1, g);
    dense_backward(disc.hidden1, x, g, grad->hidden1);
  }
  return loss;
}

void score_fake_motifs(FakeMotifBatch& batch, const Matrix& features, const Discriminator& disc) {
  const Vector p = discriminate(triples_of(batch), features, disc);
  batch.rewards = p.unaryExpr([](double v) { return std::log(std::clamp(1.0 - v, kProbClampLow, kProbClampHigh)); });
}

std::vector<Triple> triples_of(const FakeMotifBatch& batch) {
  std::vector<Triple> out;
  out.reserve(batch.motifs.size());
  for (const auto& m : batch.motifs) out.push_back(m.nodes);
  return out;
}

namespace {

Vector surrogate_coefficients(const FakeMotifBatch& batch, bool use_baseline) {
  if (batch.motifs.empty()) throw ContractError("generator surrogate: empty batch");
  if (batch.rewards.size() != static_cast<Eigen::Index>(batch.motifs.size())) {
    throw ContractError("generator surrogate: rewards missing");
  }
  const double baseline = use_baseline ? batch.rewards.mean() : 0.0;
  return (batch.rewards.array() - baseline).matrix() / static_cast<double>(batch.motifs.size());
}

}  // namespace

double generator_surrogate_loss(const FakeMotifBatch& batch, bool use_baseline) {
  const Vector coef = surrogate_coefficients(batch, use_baseline);
  double total = 0.0;
  for (std::size_t s = 0; s < batch.motifs.size(); ++s) {
    total += coef(static_cast<Eigen::Index>(s)) * batch.motifs[s].log_prob;
  }
  return total;
}

double generator_surrogate_backward(const EncoderState& state, const GeneratorConfig& cfg,
                                    const FakeMotifBatch& batch, EncoderGrads& grads, bool use_baseline) {
  const Vector coef = surrogate_coefficients(batch, use_baseline);
  const int n = state.num_nodes();
  double total = 0.0;
  for (std::size_t s = 0; s < batch.motifs.size(); ++s) {
    const FakeMotif& motif = batch.motifs[s];
    const double c = coef(static_cast<Eigen::Index>(s));
    std::vector<int> selected{motif.nodes[0]};
    for (int step = 0; step < 2; ++step) {
      const auto& stored = motif.candidates[static_cast<std::size_t>(step)];
      const Selection sel = selection_distribution(state, selected, cfg, stored.empty() ? nullptr : &stored);
      const int chosen_node = motif.nodes[static_cast<std::size_t>(step + 1)];
      const auto chosen = std::find(sel.candidates.begin(), sel.candidates.end(), chosen_node) - sel.candidates.begin();
      total += c * std::log(sel.prob(chosen));
      if (c != 0.0) {
        // d(c log p_v)/d dist_u = c sign (1[u = v] - p_u), then through dist = sqrt(dist_sq)
        Vector g_sq = Vector::Zero(n);
        for (std::size_t u = 0; u < sel.candidates.size(); ++u) {
          const auto ui = static_cast<Eigen::Index>(u);
          const double g_d = c * cfg.sign * ((ui == chosen ? 1.0 : 0.0) - sel.prob(ui));
          const double d = sel.dist(ui);
          if (d > 1e-12) g_sq(sel.candidates[u]) = g_d / (2.0 * d);
        }
        for (int m = 0; m < state.num_factors(); ++m) {
          const auto mi = static_cast<std::size_t>(m);
          const Matrix& pts = state.factor_points[mi];
          const double kappa = state.kappa(m);
          const Vector mu = gyro_midpoint(pts, selected, kappa, cfg.literal_midpoint);
          Vector g_mu = Vector::Zero(mu.size());
          grads.kappa(m) += factor_dist_sq_rows_backward(pts, mu, kappa, g_sq, grads.factor_points[mi], g_mu);
          grads.kappa(m) += gyro_midpoint_backward(pts, selected, kappa, cfg.literal_midpoint, g_mu,
                                                   grads.factor_points[mi]);
        }
      }
      selected.push_back(chosen_node);
    }
  }
  return total;
}

}  // namespace motifrgc
