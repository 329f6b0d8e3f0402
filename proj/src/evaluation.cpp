#include "motifrgc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "motifrgc/errors.hpp"

namespace motifrgc {

double fermi_dirac(double d_sq, double r, double t) {
  if (!(t > 0.0)) throw ContractError("fermi_dirac: temperature must be positive");
  const double e = std::clamp((d_sq - r) / t, -kFermiDiracExponentClamp, kFermiDiracExponentClamp);
  return 1.0 / (std::exp(e) + 1.0);
}

FermiDirac fit_fermi_dirac(const Vector& pos_d_sq, const Vector& neg_d_sq, FermiDirac init, int iterations,
                           double lr) {
  if (pos_d_sq.size() == 0 || neg_d_sq.size() == 0) throw MetricError("fit_fermi_dirac: empty class");
  // parameters (r, log t); the logit is (r - d) / t
  double r = init.r;
  double s = std::log(init.t);
  double m1[2] = {0, 0}, m2[2] = {0, 0};
  const double b1 = 0.9, b2 = 0.999;
  const double wp = 1.0 / static_cast<double>(pos_d_sq.size());
  const double wn = 1.0 / static_cast<double>(neg_d_sq.size());
  for (int it = 1; it <= iterations; ++it) {
    const double t = std::exp(s);
    double gr = 0.0, gs = 0.0;
    auto accumulate = [&](const Vector& d, double label, double w) {
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double logit = std::clamp((r - d(i)) / t, -kFermiDiracExponentClamp, kFermiDiracExponentClamp);
        const double g = w * (sigmoid(logit) - label);  // dBCE/dlogit
        gr += g / t;
        gs += -g * logit;
      }
    };
    accumulate(pos_d_sq, 1.0, wp);
    accumulate(neg_d_sq, 0.0, wn);
    const double grads[2] = {gr, gs};
    double* params[2] = {&r, &s};
    for (int k = 0; k < 2; ++k) {
      m1[k] = b1 * m1[k] + (1 - b1) * grads[k];
      m2[k] = b2 * m2[k] + (1 - b2) * grads[k] * grads[k];
      const double mh = m1[k] / (1 - std::pow(b1, it));
      const double vh = m2[k] / (1 - std::pow(b2, it));
      *params[k] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
    s = std::clamp(s, -20.0, 20.0);
  }
  return {r, std::exp(s)};
}

LpMode parse_lp_mode(const std::string& name) {
  if (name == "manifold") return LpMode::kManifold;
  if (name == "euclidean") return LpMode::kEuclidean;
  throw ConfigError("unknown link-prediction mode '" + name + "' (expected manifold or euclidean)");
}

std::string to_string(LpMode mode) { return mode == LpMode::kManifold ? "manifold" : "euclidean"; }

Vector pair_dist_sq(const EncoderState& state, const std::vector<Edge>& pairs, LpMode mode, const Matrix* views) {
  Vector out(static_cast<Eigen::Index>(pairs.size()));
  if (mode == LpMode::kEuclidean) {
    if (!views) throw ContractError("euclidean link scoring needs the view matrix");
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      out(static_cast<Eigen::Index>(e)) = (views->row(pairs[e].first) - views->row(pairs[e].second)).squaredNorm();
    }
    return out;
  }
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [u, v] = pairs[e];
    const double dr = state.magnitudes(u) - state.magnitudes(v);
    double total = dr * dr;
    for (int m = 0; m < state.num_factors(); ++m) {
      const Matrix& p = state.factor_points[static_cast<std::size_t>(m)];
      const double d = factor_dist(p.row(u).transpose(), p.row(v).transpose(), state.kappa(m));
      total += d * d;
    }
    out(static_cast<Eigen::Index>(e)) = total;
  }
  return out;
}

Vector lp_scores(const EncoderState& state, const std::vector<Edge>& pairs, LpMode mode, const FermiDirac& decoder,
                 const Matrix* views) {
  return pair_dist_sq(state, pairs, mode, views).unaryExpr([&](double d) { return decoder(d); });
}

double auc(const Vector& pos, const Vector& neg) {
  if (pos.size() == 0 || neg.size() == 0) throw MetricError("auc: empty class");
  std::vector<double> sorted(neg.data(), neg.data() + neg.size());
  std::sort(sorted.begin(), sorted.end());
  // twice the count of (pos > neg) pairs plus tied pairs; exact in double
  double doubled = 0.0;
  for (Eigen::Index i = 0; i < pos.size(); ++i) {
    const auto lo = std::lower_bound(sorted.begin(), sorted.end(), pos(i));
    const auto hi = std::upper_bound(lo, sorted.end(), pos(i));
    doubled += 2.0 * static_cast<double>(lo - sorted.begin()) + static_cast<double>(hi - lo);
  }
  return doubled / (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double ap(const Vector& pos, const Vector& neg) {
  if (pos.size() == 0 || neg.size() == 0) throw MetricError("ap: empty class");
  std::vector<std::pair<double, int>> all;
  all.reserve(static_cast<std::size_t>(pos.size() + neg.size()));
  for (Eigen::Index i = 0; i < pos.size(); ++i) all.emplace_back(pos(i), 1);
  for (Eigen::Index i = 0; i < neg.size(); ++i) all.emplace_back(neg(i), 0);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const double total_pos = static_cast<double>(pos.size());
  double tp = 0.0, fp = 0.0, prev_tp = 0.0, out = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? tp : fp) += 1.0;
      ++j;
    }
    out += (tp - prev_tp) / total_pos * (tp / (tp + fp));
    prev_tp = tp;
    i = j;
  }
  return out;
}

double acc(const std::vector<int>& pred, const std::vector<int>& labels) {
  if (pred.empty()) throw MetricError("acc: empty prediction set");
  if (pred.size() != labels.size()) throw ContractError("acc: size mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

struct Probe {
  Matrix weight;
  RowVector bias;

  std::vector<int> predict(const Matrix& x) const {
    const Matrix logits = (x * weight).rowwise() + bias;
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) logits.row(i).maxCoeff(&out[static_cast<std::size_t>(i)]);
    return out;
  }
};

Probe train_probe(const Matrix& x, const std::vector<int>& y, int classes, double decay, const ProbeConfig& cfg) {
  const Eigen::Index n = x.rows();
  Probe p{Matrix::Zero(x.cols(), classes), RowVector::Zero(classes)};
  Matrix onehot = Matrix::Zero(n, classes);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;
  Matrix mw = Matrix::Zero(x.cols(), classes), vw = mw;
  RowVector mb = RowVector::Zero(classes), vb = mb;
  const double b1 = 0.9, b2 = 0.999;
  for (int it = 1; it <= cfg.iterations; ++it) {
    Matrix logits = (x * p.weight).rowwise() + p.bias;
    logits.colwise() -= logits.rowwise().maxCoeff();
    Matrix prob = logits.array().exp().matrix();
    prob = prob.rowwise().sum().cwiseInverse().asDiagonal() * prob;
    const Matrix g = (prob - onehot) / static_cast<double>(n);
    const Matrix gw = x.transpose() * g + decay * p.weight;
    const RowVector gb = g.colwise().sum();
    const double c1 = 1 - std::pow(b1, it);
    const double c2 = 1 - std::pow(b2, it);
    mw = b1 * mw + (1 - b1) * gw;
    vw = b2 * vw + (1 - b2) * gw.cwiseAbs2();
    mb = b1 * mb + (1 - b1) * gb;
    vb = b2 * vb + (1 - b2) * gb.cwiseAbs2();
    p.weight -= cfg.lr * ((mw / c1).array() / ((vw / c2).array().sqrt() + 1e-8)).matrix();
    p.bias -= cfg.lr * ((mb / c1).array() / ((vb / c2).array().sqrt() + 1e-8)).matrix();
  }
  return p;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

ProbeResult node_classify(const Matrix& features, const std::optional<std::vector<int>>& labels,
                          const NodeSplit& split, const ProbeConfig& cfg) {
  if (!labels) throw DataError("node classification needs node labels");
  if (split.train.empty() || split.test.empty()) throw SplitError("node split has an empty train or test part");
  const auto& y = *labels;
  const int classes = *std::max_element(y.begin(), y.end()) + 1;

  Matrix train_x = gather_rows(features, split.train);
  const RowVector mean = train_x.colwise().mean();
  RowVector scale = ((train_x.rowwise() - mean).cwiseAbs2().colwise().mean()).cwiseSqrt();
  scale = scale.unaryExpr([](double s) { return s > 1e-12 ? 1.0 / s : 1.0; });
  auto standardize = [&](const Matrix& x) -> Matrix { return (x.rowwise() - mean).array().rowwise() * scale.array(); };
  train_x = standardize(train_x);
  const std::vector<int> train_y = gather_labels(y, split.train);
  const Matrix test_x = standardize(gather_rows(features, split.test));
  const std::vector<int> test_y = gather_labels(y, split.test);

  ProbeResult best;
  best.valid_acc = -1.0;
  const bool has_valid = !split.valid.empty();
  const Matrix valid_x = has_valid ? standardize(gather_rows(features, split.valid)) : Matrix();
  const std::vector<int> valid_y = has_valid ? gather_labels(y, split.valid) : std::vector<int>{};
  const std::vector<double> decays = has_valid ? cfg.weight_decays : std::vector<double>{cfg.weight_decays.front()};
  for (double decay : decays) {
    const Probe p = train_probe(train_x, train_y, classes, decay, cfg);
    const double v = has_valid ? acc(p.predict(valid_x), valid_y) : 0.0;
    if (v > best.valid_acc) {
      best.valid_acc = v;
      best.weight_decay = decay;
      best.test_acc = acc(p.predict(test_x), test_y);
    }
  }
  return best;
}

double triangle_generation_auc(const EncoderState& state, const GeneratorConfig& cfg,
                               const std::vector<Triple>& positives, const std::vector<Triple>& negatives) {
  GeneratorConfig full = cfg;
  full.candidate_limit = 0;
  auto score = [&](const std::vector<Triple>& triples) {
    Vector out(static_cast<Eigen::Index>(triples.size()));
    for (std::size_t i = 0; i < triples.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = triple_log_likelihood(state, full, triples[i]);
    }
    return out;
  };
  return auc(score(positives), score(negatives));
}

std::string report_json(const std::vector<MetricsReport>& per_seed) {
  using nlohmann::ordered_json;
  ordered_json root;
  root["format"] = "motifrgc-metrics";
  root["version"] = 1;
  ordered_json runs = ordered_json::array();
  const char* names[] = {"lp_auc", "lp_ap", "nc_acc", "tri_auc"};
  auto field = [](const MetricsReport& r, int k) -> const std::optional<double>& {
    switch (k) {
      case 0: return r.lp_auc;
      case 1: return r.lp_ap;
      case 2: return r.nc_acc;
      default: return r.tri_auc;
    }
  };
  for (const auto& r : per_seed) {
    ordered_json rec;
    if (r.seed) rec["seed"] = *r.seed;
    for (int k = 0; k < 4; ++k) {
      if (field(r, k)) rec[names[k]] = *field(r, k);
    }
    runs.push_back(rec);
  }
  root["runs"] = runs;
  ordered_json agg;
  for (int k = 0; k < 4; ++k) {
    std::vector<double> vals;
    for (const auto& r : per_seed) {
      if (field(r, k)) vals.push_back(*field(r, k));
    }
    if (vals.empty()) continue;
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    agg[names[k]] = {{"mean", mean}, {"std", std::sqrt(var / static_cast<double>(vals.size()))}};
  }
  root["aggregate"] = agg;
  return root.dump(2);
}

}  // namespace motifrgc
