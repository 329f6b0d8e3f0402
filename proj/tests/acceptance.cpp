// Acceptance suite: one PASS/FAIL line per criterion.
//
// Criteria that need Cora / Citeseer read a dataset directory from
// MOTIFRGC_CORA / MOTIFRGC_CITESEER (canonical layout with meta.json, or the
// raw LINQS .content/.cites pair). Without it those criteria print FAIL with
// the reason. The exit status is nonzero when any criterion fails for another
// reason, or when any criterion fails at all under --strict.
// MOTIFRGC_ACCEPT_CONFIG may name a JSON run config used for the desk-scale
// training runs; the thresholds below do not depend on it.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "motifrgc/adversary.hpp"
#include "motifrgc/checkpoint.hpp"
#include "motifrgc/config.hpp"
#include "motifrgc/contrast.hpp"
#include "motifrgc/errors.hpp"
#include "motifrgc/evaluation.hpp"
#include "motifrgc/geometry.hpp"
#include "motifrgc/kernel.hpp"
#include "motifrgc/rng.hpp"
#include "motifrgc/train.hpp"
#include "test_util.hpp"

using namespace motifrgc;
namespace fs = std::filesystem;

namespace {

// Tolerances and floors, fixed here.
constexpr int kGeometrySamples = 10000;
constexpr double kIdentityTol = 1e-12;
constexpr double kFlatLimitTol = 1e-4;
constexpr double kFlatKappa = 1e-8;
constexpr double kSingletonTol = 1e-8;
constexpr double kGeometrySeconds = 30.0;
constexpr int kKernelSamples = 100000;
constexpr double kBoundaryGap = 1e-6;
constexpr int kPoissonSamples = 10000;
constexpr double kPoissonTol = 1e-10;
constexpr double kInfoNceTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kSurrogateGradTol = 1e-3;
constexpr double kGradSeconds = 60.0;
constexpr double kFrequencyTol = 0.01;
constexpr int kFrequencyDraws = 100000;
constexpr double kCoraLpFloor = 0.93;
constexpr double kCiteseerLpFloor = 0.93;
constexpr double kCoraNcFloor = 0.78;
constexpr int kDeskSeeds = 5;
constexpr double kDeskMinutes = 30.0;
constexpr double kTriangleFloor = 0.65;
constexpr double kUntrainedTriTol = 0.05;
constexpr int kTriangleCount = 1000;

struct Outcome {
  bool pass = false;
  bool data_missing = false;
  std::string detail;
};

struct Tally {
  int failed = 0;
  int failed_for_data = 0;

  void report(const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) (o.data_missing ? failed_for_data : failed) += 1;
  }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

Eigen::VectorXd in_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  return v.normalized() * radius * std::pow(unit(rng), 1.0 / n);
}

// ---------------------------------------------------------------- geometry

Outcome geometry_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mag(0.1, 3.0);
  std::uniform_int_distribution<int> dim(2, 8);
  double identity = 0, inverse = 0, asym = 0, flat = 0, singleton = 0;
  for (int t = 0; t < kGeometrySamples; ++t) {
    const int n = dim(rng);
    const double kappa = (t % 2 == 0 ? -1.0 : 1.0) * mag(rng);
    const double radius = 0.9 / std::sqrt(std::abs(kappa));
    const Eigen::VectorXd x = in_ball(rng, n, radius);
    const Eigen::VectorXd y = in_ball(rng, n, radius);
    identity = std::max(identity, (mobius_add(Eigen::VectorXd::Zero(n), x, kappa) - x).norm());
    inverse = std::max(inverse, mobius_add(Eigen::VectorXd(-x), x, kappa).norm());
    const double dxy = factor_dist(x, y, kappa);
    asym = std::max(asym, std::abs(dxy - factor_dist(y, x, kappa)) / std::max(1.0, dxy));
    const Eigen::VectorXd a = in_ball(rng, n, 1.0), b = in_ball(rng, n, 1.0);
    const double euclid = 2.0 * (a - b).norm();
    flat = std::max(flat, std::abs(factor_dist(a, b, t % 2 == 0 ? -kFlatKappa : kFlatKappa) - euclid) / euclid);
    Eigen::MatrixXd one(1, n);
    one.row(0) = x.transpose();
    singleton = std::max(singleton, (gyro_midpoint(one, kappa) - x).norm());
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = identity <= kIdentityTol && inverse <= kIdentityTol && asym <= kIdentityTol && flat <= kFlatLimitTol &&
           singleton <= kSingletonTol && secs < kGeometrySeconds;
  o.detail = std::to_string(kGeometrySamples) + " samples per property; left identity " + fmt(identity) +
             ", left inverse " + fmt(inverse) + ", distance asymmetry " + fmt(asym) + ", flat limit rel " +
             fmt(flat) + " (<= " + fmt(kFlatLimitTol) + "), singleton midpoint " + fmt(singleton) + "; " +
             fmt(secs, 3) + " s";
  return o;
}

// ------------------------------------------------------------------ kernel

Outcome kernel_stability() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> gauss(0.0, 1.0);
  long non_finite = 0;
  for (int n : {2, 8, 32}) {
    const auto basis = sample_basis<double>(n, 64, -1.0, 7 + static_cast<std::uint64_t>(n));
    const int rows = kKernelSamples / 3 + (n == 32 ? kKernelSamples % 3 : 0);
    Eigen::MatrixXd pts(rows, n);
    std::uniform_real_distribution<double> gap(0.0, kBoundaryGap);
    for (int i = 0; i < rows; ++i) {
      Eigen::VectorXd d(n);
      for (int j = 0; j < n; ++j) d(j) = gauss(rng);
      // distance to the boundary between 1e-16 and 1e-6
      const double r = 1.0 - std::max(1e-16, (i % 2 == 0) ? kBoundaryGap : gap(rng));
      pts.row(i) = (d.normalized() * r).transpose();
    }
    const Eigen::MatrixXd out = gf_map_rows(pts, basis, -1.0);
    non_finite += static_cast<long>((!out.array().isFinite()).count());
  }

  double worst = 0.0;
  for (int t = 0; t < kPoissonSamples; ++t) {
    const int n = 2 + t % 4;
    const Eigen::VectorXd x = in_ball(rng, n, 0.95);
    const Eigen::VectorXd w = in_ball(rng, n, 1.0);
    const double amplitude = std::exp((n - 1) / 2.0 * signed_dist(w, x, -1.0));
    const double poisson = std::pow((1.0 - x.squaredNorm()) / (x - w).squaredNorm(), (n - 1) / 2.0);
    worst = std::max(worst, std::abs(amplitude - poisson) / std::max(1.0, poisson));
  }
  Outcome o;
  o.pass = non_finite == 0 && worst <= kPoissonTol;
  o.detail = std::to_string(kKernelSamples) + " gF evaluations within " + fmt(kBoundaryGap) + " of the boundary, " +
             std::to_string(non_finite) + " non-finite; amplitude vs Poisson kernel over " +
             std::to_string(kPoissonSamples) + " samples, max rel err " + fmt(worst) + " (<= " + fmt(kPoissonTol) + ")";
  return o;
}

// -------------------------------------------------------------- contrast

Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd s(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) s(i, j) = a.row(i).dot(b.row(j)) / (a.row(i).norm() * b.row(j).norm());
  }
  return s;
}

double weighted_nce(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd s = cosine_matrix(a, b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double denom = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) denom += std::exp(h(i, j) * s(i, j));
    loss -= s(i, i) - std::log(denom);
  }
  return loss;
}

Eigen::MatrixXd hardness_weights(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const MotifSet& m, double alpha) {
  const Eigen::MatrixXd s = cosine_matrix(a, b);
  Eigen::MatrixXd h(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const double ind = m.is_positive(static_cast<int>(i), static_cast<int>(j)) ? 1.0 : 0.0;
      h(i, j) = std::pow(std::abs(ind - (s(i, j) + 1.0) / 2.0), alpha);
    }
  }
  return h;
}

Outcome hardness_and_infonce() {
  const double h9 = hardness_from_normalized(false, 0.9, 2.0);
  const double h1 = hardness_from_normalized(false, 0.1, 2.0);
  std::mt19937_64 rng(303);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial * 5;
    const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, 8, [&]() { return gauss(rng); });
    const Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(n, 8, [&]() { return gauss(rng); });
    MotifSet m;
    m.positive_sets.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i + 1 < n; i += 2) {
      m.positive_sets[static_cast<std::size_t>(i)].push_back(i + 1);
      m.positive_sets[static_cast<std::size_t>(i + 1)].push_back(i);
    }
    HardnessConfig cfg;
    cfg.alpha = 0.0;
    const double mine = rc_loss(a, b, m, cfg).loss;
    worst = std::max(worst, std::abs(mine - weighted_nce(a, b, Eigen::MatrixXd::Ones(n, n))));
  }
  Outcome o;
  o.pass = std::abs(h9 - 0.81) <= 1e-15 && std::abs(h1 - 0.01) <= 1e-15 && worst <= kInfoNceTol;
  o.detail = "h(0.9) = " + fmt(h9, 17) + ", h(0.1) = " + fmt(h1, 17) + "; alpha=0 vs independent InfoNCE max |diff| " +
             fmt(worst) + " (<= " + fmt(kInfoNceTol) + ")";
  return o;
}

// -------------------------------------------------------------- gradients

double rel_err(double fd, double an) {
  return std::abs(fd - an) / std::max(1e-6, std::max(std::abs(fd), std::abs(an)));
}

Outcome gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GraphStore g;
  g.num_nodes = 6;
  g.adjacency = CsrAdjacency::from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {4, 5}, {3, 5}, {1, 4}});
  g.features = Eigen::MatrixXd::NullaryExpr(6, 5, [&]() { return gauss(rng); });
  const MotifSet motifs = enumerate_triangles(g.adjacency);
  EncoderConfig ec;
  ec.factors = {{1.0, 3}, {-1.0, 3}};
  ec.kernel_dim = 12;
  ec.hidden_dim = 6;
  ec.view_dim = 5;
  ec.projector_hidden = 6;
  ec.seed = 5;
  const EncoderState s = init_features(g, ec);
  const SparseMatrix prop = normalized_adjacency(g.adjacency);
  HardnessConfig hc;  // alpha = 2

  // total contrast through the encoder, hardness frozen at the base point
  ForwardCache cache;
  const ViewSet base = forward(prop, s, &cache);
  std::vector<Eigen::MatrixXd> fwd, bwd;
  for (int v = 1; v < base.views.size(); ++v) {
    fwd.push_back(hardness_weights(base.views[static_cast<std::size_t>(v)], base.views[0], motifs, hc.alpha));
    bwd.push_back(hardness_weights(base.views[0], base.views[static_cast<std::size_t>(v)], motifs, hc.alpha));
  }
  auto contrast_frozen = [&](const EncoderState& st) {
    const ViewSet z = forward(prop, st);
    double total = 0.0;
    for (std::size_t v = 1; v < z.views.size(); ++v) {
      total += weighted_nce(z.views[v], z.views[0], fwd[v - 1]) + weighted_nce(z.views[0], z.views[v], bwd[v - 1]);
    }
    return total;
  };
  const TotalContrast tc = total_contrast(base.views, motifs, hc, true);
  EncoderGrads cg = EncoderGrads::zeros_like(s);
  backward(prop, s, cache, tc.view_grads, cg);

  const double h = 1e-6;
  double contrast_err = 0.0;
  int checked = 0;
  auto fd_of = [&](auto&& f, const EncoderState& a, const EncoderState& b) { return (f(a) - f(b)) / (2 * h); };
  for (int m = 0; m < 2; ++m) {
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 3; ++j) {
        EncoderState a = s, b = s;
        a.factor_points[static_cast<std::size_t>(m)](i, j) += h;
        b.factor_points[static_cast<std::size_t>(m)](i, j) -= h;
        contrast_err = std::max(contrast_err, rel_err(fd_of(contrast_frozen, a, b),
                                                      cg.factor_points[static_cast<std::size_t>(m)](i, j)));
        ++checked;
      }
    }
    EncoderState a = s, b = s;
    a.curvature.log_magnitude(m) += h;
    b.curvature.log_magnitude(m) -= h;
    contrast_err = std::max(contrast_err, rel_err(fd_of(contrast_frozen, a, b), cg.kappa(m) * s.kappa(m)));
    ++checked;
  }
  for (std::size_t v = 0; v < s.conv.size(); ++v) {
    for (Dense ConvStack::*layer : {&ConvStack::first, &ConvStack::second}) {
      const Dense& d = s.conv[v].*layer;
      for (Eigen::Index i = 0; i < d.weight.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.weight.cols(); ++j) {
          EncoderState a = s, b = s;
          (a.conv[v].*layer).weight(i, j) += h;
          (b.conv[v].*layer).weight(i, j) -= h;
          contrast_err = std::max(contrast_err, rel_err(fd_of(contrast_frozen, a, b), (cg.conv[v].*layer).weight(i, j)));
          ++checked;
        }
      }
      for (Eigen::Index j = 0; j < d.bias.size(); ++j) {
        EncoderState a = s, b = s;
        (a.conv[v].*layer).bias(j) += h;
        (b.conv[v].*layer).bias(j) -= h;
        contrast_err = std::max(contrast_err, rel_err(fd_of(contrast_frozen, a, b), (cg.conv[v].*layer).bias(j)));
        ++checked;
      }
    }
  }
  for (Dense ConvStack::*layer : {&ConvStack::first, &ConvStack::second}) {
    const Dense& d = s.projector.*layer;
    for (Eigen::Index i = 0; i < d.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < d.weight.cols(); ++j) {
        EncoderState a = s, b = s;
        (a.projector.*layer).weight(i, j) += h;
        (b.projector.*layer).weight(i, j) -= h;
        contrast_err = std::max(contrast_err, rel_err(fd_of(contrast_frozen, a, b), (cg.projector.*layer).weight(i, j)));
        ++checked;
      }
    }
  }

  // generator surrogate with frozen samples and rewards
  double surrogate_err = 0.0;
  for (int sign : {1, -1}) {
    GeneratorConfig gc;
    gc.sign = sign;
    FakeMotifBatch batch = sample_fake_motifs(s, gc, 16, 9);
    std::mt19937_64 d_rng(10);
    const Discriminator disc = Discriminator::init(static_cast<int>(kernel_views(s).concat().cols()), 8, d_rng);
    score_fake_motifs(batch, kernel_views(s).concat(), disc);
    EncoderGrads sg = EncoderGrads::zeros_like(s);
    generator_surrogate_backward(s, gc, batch, sg);
    auto surrogate = [&](const EncoderState& st) {
      const double bl = batch.rewards.mean();
      double total = 0.0;
      for (std::size_t t = 0; t < batch.motifs.size(); ++t) {
        total += (batch.rewards(static_cast<Eigen::Index>(t)) - bl) * ordered_log_prob(st, gc, batch.motifs[t].nodes);
      }
      return total / static_cast<double>(batch.motifs.size());
    };
    for (int m = 0; m < 2; ++m) {
      EncoderState a = s, b = s;
      a.curvature.log_magnitude(m) += h;
      b.curvature.log_magnitude(m) -= h;
      surrogate_err = std::max(surrogate_err, rel_err(fd_of(surrogate, a, b), sg.kappa(m) * s.kappa(m)));
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 3; ++j) {
          EncoderState p = s, q = s;
          p.factor_points[static_cast<std::size_t>(m)](i, j) += h;
          q.factor_points[static_cast<std::size_t>(m)](i, j) -= h;
          surrogate_err = std::max(surrogate_err, rel_err(fd_of(surrogate, p, q),
                                                          sg.factor_points[static_cast<std::size_t>(m)](i, j)));
        }
      }
    }
  }

  // discriminator loss
  const Eigen::MatrixXd feats = kernel_views(s).concat();
  std::mt19937_64 d_rng(11);
  Discriminator disc = Discriminator::init(static_cast<int>(feats.cols()), 8, d_rng);
  const std::vector<Triple> real = motifs.triangles;
  const std::vector<Triple> fake{{0, 3, 5}, {1, 2, 5}, {0, 4, 5}};
  Discriminator dg = Discriminator::zeros_like(disc);
  discriminator_loss(real, fake, feats, disc, &dg);
  double disc_err = 0.0;
  for (Dense Discriminator::*layer : {&Discriminator::hidden1, &Discriminator::hidden2, &Discriminator::output}) {
    Dense& d = disc.*layer;
    for (Eigen::Index i = 0; i < d.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < d.weight.cols(); ++j) {
        const double keep = d.weight(i, j);
        d.weight(i, j) = keep + h;
        const double up = discriminator_loss(real, fake, feats, disc);
        d.weight(i, j) = keep - h;
        const double down = discriminator_loss(real, fake, feats, disc);
        d.weight(i, j) = keep;
        disc_err = std::max(disc_err, rel_err((up - down) / (2 * h), (dg.*layer).weight(i, j)));
      }
    }
    for (Eigen::Index j = 0; j < d.bias.size(); ++j) {
      const double keep = d.bias(j);
      d.bias(j) = keep + h;
      const double up = discriminator_loss(real, fake, feats, disc);
      d.bias(j) = keep - h;
      const double down = discriminator_loss(real, fake, feats, disc);
      d.bias(j) = keep;
      disc_err = std::max(disc_err, rel_err((up - down) / (2 * h), (dg.*layer).bias(j)));
    }
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = contrast_err <= kGradTol && disc_err <= kGradTol && surrogate_err <= kSurrogateGradTol && secs < kGradSeconds;
  o.detail = "6-node fixture; total contrast over " + std::to_string(checked) + " encoder parameters max rel err " +
             fmt(contrast_err) + ", discriminator " + fmt(disc_err) + " (<= " + fmt(kGradTol) +
             "), generator surrogate " + fmt(surrogate_err) + " (<= " + fmt(kSurrogateGradTol) + "); " + fmt(secs, 3) +
             " s";
  return o;
}

// ---------------------------------------------------------- small oracles

std::set<Triple> brute_triangles(const CsrAdjacency& adj) {
  std::set<Triple> out;
  const int n = adj.num_nodes();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!adj.has_edge(a, b)) continue;
      for (int c = b + 1; c < n; ++c) {
        if (adj.has_edge(a, c) && adj.has_edge(b, c)) out.insert({a, b, c});
      }
    }
  }
  return out;
}

bool triangles_match(const CsrAdjacency& adj) {
  const MotifSet m = enumerate_triangles(adj);
  return m.triangles.size() == brute_triangles(adj).size() &&
         std::set<Triple>(m.triangles.begin(), m.triangles.end()) == brute_triangles(adj);
}

double brute_auc(const Eigen::VectorXd& pos, const Eigen::VectorXd& neg) {
  double wins = 0.0;
  for (Eigen::Index i = 0; i < pos.size(); ++i) {
    for (Eigen::Index j = 0; j < neg.size(); ++j) wins += pos(i) > neg(j) ? 1.0 : (pos(i) == neg(j) ? 0.5 : 0.0);
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

double brute_ap(const Eigen::VectorXd& pos, const Eigen::VectorXd& neg) {
  std::set<double, std::greater<>> thresholds(pos.data(), pos.data() + pos.size());
  thresholds.insert(neg.data(), neg.data() + neg.size());
  const double total = static_cast<double>(pos.size());
  double out = 0.0, prev_tp = 0.0;
  for (double t : thresholds) {
    const double tp = static_cast<double>((pos.array() >= t).count());
    const double fp = static_cast<double>((neg.array() >= t).count());
    out += (tp - prev_tp) / total * (tp / (tp + fp));
    prev_tp = tp;
  }
  return out;
}

Outcome small_oracles() {
  // every graph on at most 5 nodes, then random graphs for each N up to 50
  long graphs = 0, tri_bad = 0;
  for (int n = 1; n <= 5; ++n) {
    std::vector<Edge> all;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) all.emplace_back(u, v);
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << all.size()); ++mask) {
      std::vector<Edge> edges;
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (mask >> k & 1) edges.push_back(all[k]);
      }
      ++graphs;
      if (!triangles_match(CsrAdjacency::from_edges(n, edges))) ++tri_bad;
    }
  }
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 6; n <= 50; ++n) {
    for (double p : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0}) {
      for (int rep = 0; rep < 5; ++rep) {
        std::vector<Edge> edges;
        for (int u = 0; u < n; ++u) {
          for (int v = u + 1; v < n; ++v) {
            if (unit(rng) < p) edges.emplace_back(u, v);
          }
        }
        ++graphs;
        if (!triangles_match(CsrAdjacency::from_edges(n, edges))) ++tri_bad;
      }
    }
  }

  int metric_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> size(1, 1000);
    std::uniform_int_distribution<int> level(0, trial % 3 == 0 ? 10 : (trial % 3 == 1 ? 500 : 1 << 30));
    const int np = size(rng), nn = size(rng);
    Eigen::VectorXd pos(np), neg(nn);
    for (int i = 0; i < np; ++i) pos(i) = level(rng) + (trial % 2);
    for (int i = 0; i < nn; ++i) neg(i) = level(rng);
    if (auc(pos, neg) != brute_auc(pos, neg) || ap(pos, neg) != brute_ap(pos, neg)) ++metric_bad;
  }

  // generator frequencies on a 5-node toy
  std::normal_distribution<double> gauss(0.0, 1.0);
  GraphStore g;
  g.num_nodes = 5;
  g.adjacency = CsrAdjacency::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  g.features = Eigen::MatrixXd::NullaryExpr(5, 4, [&]() { return gauss(rng); });
  EncoderConfig ec;
  ec.factors = {{1.0, 3}, {-1.0, 3}};
  ec.kernel_dim = 8;
  EncoderState s = init_features(g, ec);
  for (auto& p : s.factor_points) p *= 1.6;
  double freq_err = 0.0;
  for (int sign : {1, -1}) {
    GeneratorConfig gc;
    gc.sign = sign;
    const FakeMotifBatch batch = sample_fake_motifs(s, gc, kFrequencyDraws, 606);
    std::map<Triple, int> seen;
    for (const auto& m : batch.motifs) ++seen[m.nodes];
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) {
        for (int c = 0; c < 5; ++c) {
          if (a == b || a == c || b == c) continue;
          const double exact = std::exp(ordered_log_prob(s, gc, {a, b, c})) / 5.0;
          const auto it = seen.find({a, b, c});
          const double got = it == seen.end() ? 0.0 : it->second / static_cast<double>(kFrequencyDraws);
          freq_err = std::max(freq_err, std::abs(exact - got));
        }
      }
    }
  }
  Outcome o;
  o.pass = tri_bad == 0 && metric_bad == 0 && freq_err <= kFrequencyTol;
  o.detail = "triangles vs brute force on " + std::to_string(graphs) + " graphs (all N <= 5, random N 6..50): " +
             std::to_string(tri_bad) + " mismatches; AUC/AP vs pair counting on 200 inputs: " +
             std::to_string(metric_bad) + " mismatches; generator frequencies over " + std::to_string(kFrequencyDraws) +
             " draws max abs err " + fmt(freq_err) + " (<= " + fmt(kFrequencyTol) + ")";
  return o;
}

// ------------------------------------------------------------ desk scale

struct DeskData {
  GraphStore full;
  GraphStore train_graph;
  MotifSet train_motifs;
};

std::optional<DeskData> load_desk(const char* env, std::string& why) {
  const char* path = std::getenv(env);
  if (!path || !*path) {
    why = std::string("dataset unavailable, set ") + env + " to a prepared or raw Planetoid directory";
    return std::nullopt;
  }
  try {
    const fs::path dir(path);
    const GraphFormat format = fs::exists(dir / "meta.json") ? GraphFormat::kCanonical : GraphFormat::kPlanetoid;
    DeskData d;
    d.full = load_graph(dir, format);
    const RunConfig defaults;
    if (!d.full.edge_split) d.full.edge_split = split_edges(d.full, defaults.edge_ratios, defaults.split_seed);
    if (!d.full.node_split && d.full.labels) {
      d.full.node_split = split_nodes(d.full, defaults.node_ratios, defaults.split_seed);
    }
    d.train_graph = d.full.with_edges(d.full.edge_split->train_pos);
    d.train_motifs = enumerate_triangles(d.train_graph.adjacency);
    return d;
  } catch (const Error& e) {
    why = std::string("cannot load ") + path + ": " + e.what();
    return std::nullopt;
  }
}

TrainConfig desk_config() {
  RunConfig rc;
  if (const char* p = std::getenv("MOTIFRGC_ACCEPT_CONFIG"); p && *p) rc = load_run_config(p);
  return rc.train;
}

struct DeskRun {
  std::vector<double> lp_auc;
  std::optional<double> nc_acc;  // first seed
  std::optional<ModelState> first_model;
  double minutes = 0.0;
  std::string error;
};

DeskRun run_desk(const DeskData& d, const TrainConfig& base, bool want_nc) {
  DeskRun r;
  const auto start = std::chrono::steady_clock::now();
  try {
    for (int seed = 0; seed < kDeskSeeds; ++seed) {
      TrainConfig cfg = base;
      cfg.seed = static_cast<std::uint64_t>(seed);
      const TrainResult tr = train(d.train_graph, d.train_motifs, cfg);
      Eigen::MatrixXd views;
      if (cfg.lp_mode == LpMode::kEuclidean || (want_nc && seed == 0)) views = embed(d.train_graph, tr.best.encoder);
      const auto& s = *d.full.edge_split;
      const Eigen::VectorXd pos = lp_scores(tr.best.encoder, s.test_pos, cfg.lp_mode, tr.best.decoder, &views);
      const Eigen::VectorXd neg = lp_scores(tr.best.encoder, s.test_neg, cfg.lp_mode, tr.best.decoder, &views);
      r.lp_auc.push_back(auc(pos, neg));
      std::cout << "  seed " << seed << ": LP AUC " << fmt(r.lp_auc.back()) << " (best iteration "
                << tr.best_iteration << ", " << fmt(seconds_since(start) / 60.0, 3) << " min)" << std::endl;
      if (seed == 0) {
        r.first_model = tr.best;
        if (want_nc) r.nc_acc = node_classify(views, d.full.labels, *d.full.node_split).test_acc;
      }
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  r.minutes = seconds_since(start) / 60.0;
  return r;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Outcome desk_lp(const char* env, const std::string& name, double floor, bool want_nc, std::optional<DeskRun>* keep,
                std::optional<DeskData>* keep_data) {
  Outcome o;
  std::string why;
  auto data = load_desk(env, why);
  if (!data) {
    o.data_missing = true;
    o.detail = why;
    return o;
  }
  std::cout << "  " << name << ": " << data->full.num_nodes << " nodes, " << data->full.adjacency.num_edges()
            << " edges" << std::endl;
  DeskRun run = run_desk(*data, desk_config(), want_nc);
  if (!run.error.empty()) {
    o.detail = "training aborted: " + run.error;
    return o;
  }
  const double m = mean(run.lp_auc);
  o.pass = m >= floor && run.minutes < kDeskMinutes;
  o.detail = name + " LP test AUC mean over " + std::to_string(kDeskSeeds) + " seeds " + fmt(m) + " (>= " +
             fmt(floor) + "), " + fmt(run.minutes, 3) + " min (< " + fmt(kDeskMinutes) + ")";
  if (keep) *keep = std::move(run);
  if (keep_data) *keep_data = std::move(data);
  return o;
}

Outcome desk_nc(const std::optional<DeskRun>& run, const std::string& missing) {
  Outcome o;
  if (!run) {
    o.data_missing = !missing.empty();
    o.detail = missing.empty() ? "Cora training did not complete" : missing;
    return o;
  }
  if (!run->nc_acc) {
    o.detail = "no node labels in the Cora directory";
    return o;
  }
  o.pass = *run->nc_acc >= kCoraNcFloor;
  o.detail = "Cora NC test ACC " + fmt(*run->nc_acc) + " (>= " + fmt(kCoraNcFloor) + ")";
  return o;
}

Outcome triangle_generation(const std::optional<DeskData>& data, const std::optional<DeskRun>& run,
                            const std::string& missing) {
  Outcome o;
  if (!data || !run || !run->first_model) {
    o.data_missing = !missing.empty();
    o.detail = missing.empty() ? "Cora training did not complete" : missing;
    return o;
  }
  try {
    const MotifSet full = enumerate_triangles(data->full.adjacency);
    std::vector<Triple> pos = full.triangles;
    std::mt19937_64 rng(707);
    std::shuffle(pos.begin(), pos.end(), rng);
    if (pos.size() > static_cast<std::size_t>(kTriangleCount)) pos.resize(kTriangleCount);
    const std::vector<Triple> neg = sample_negative_triples(data->full, full, static_cast<int>(pos.size()), 708);

    TrainConfig base = desk_config();
    base.seed = 0;
    const ModelState untrained = init_model(data->train_graph, base);
    const double untrained_auc = triangle_generation_auc(untrained.encoder, base.generator, pos, neg);

    std::map<int, double> trained;
    GeneratorConfig gc = base.generator;
    trained[gc.sign] = triangle_generation_auc(run->first_model->encoder, gc, pos, neg);
    TrainConfig flipped = base;
    flipped.generator.sign = -gc.sign;
    const TrainResult other = train(data->train_graph, data->train_motifs, flipped);
    trained[flipped.generator.sign] = triangle_generation_auc(other.best.encoder, flipped.generator, pos, neg);

    const double best = std::max(trained[1], trained[-1]);
    o.pass = best >= kTriangleFloor && std::abs(untrained_auc - 0.5) <= kUntrainedTriTol;
    o.detail = "Cora triangle generation AUC sign=+1 " + fmt(trained[1]) + ", sign=-1 " + fmt(trained[-1]) +
               " (best >= " + fmt(kTriangleFloor) + "); untrained " + fmt(untrained_auc) + " (0.5 +- " +
               fmt(kUntrainedTriTol) + ")";
  } catch (const Error& e) {
    o.detail = std::string("aborted: ") + e.what();
  }
  return o;
}

// ----------------------------------------------------------- determinism

Outcome determinism() {
  test::TempDir dir;
  GraphStore g = test::block_graph(80, 0.25, 0.02, 8, 808);
  g.edge_split = split_edges(g, {0.85, 0.05, 0.10}, 808);
  g.node_split = split_nodes(g, {0.6, 0.2, 0.2}, 808);
  const GraphStore tg = g.with_edges(g.edge_split->train_pos);
  const MotifSet motifs = enumerate_triangles(tg.adjacency);
  RunConfig rc;
  rc.train.encoder.factors = {{1.0, 8}, {-1.0, 8}, {-1.0, 8}};
  rc.train.encoder.kernel_dim = 32;
  rc.train.max_iterations = 5;
  rc.train.min_steps = 2;
  rc.train.max_steps = 2;
  rc.train.fake_batch_size = 32;
  rc.train.seed = 17;

  std::vector<std::uint64_t> hashes;
  std::vector<std::string> reports;
  for (int rep = 0; rep < 2; ++rep) {
    const TrainResult r = train(tg, motifs, rc.train);
    const fs::path file = dir.path / ("run" + std::to_string(rep) + ".ckpt");
    save_checkpoint(file, {r.best, rc, rc.train.seed, r.best_valid_auc, r.best_iteration});
    hashes.push_back(file_hash(file));
    MetricsReport m;
    m.seed = rc.train.seed;
    const auto& s = *g.edge_split;
    const Eigen::VectorXd pos = lp_scores(r.best.encoder, s.test_pos, rc.train.lp_mode, r.best.decoder);
    const Eigen::VectorXd neg = lp_scores(r.best.encoder, s.test_neg, rc.train.lp_mode, r.best.decoder);
    m.lp_auc = auc(pos, neg);
    m.lp_ap = ap(pos, neg);
    m.nc_acc = node_classify(embed(tg, r.best.encoder), g.labels, *g.node_split).test_acc;
    reports.push_back(report_json({m}));
  }
  Outcome o;
  o.pass = hashes[0] == hashes[1] && reports[0] == reports[1];
  o.detail = std::string("two seeded runs on an 80-node block model: checkpoint hashes ") +
             (hashes[0] == hashes[1] ? "equal" : "differ") + ", metric reports " +
             (reports[0] == reports[1] ? "equal" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) strict = true;
  }
  Tally tally;
  auto guarded = [&](const std::string& name, auto&& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.detail = std::string("aborted: ") + e.what();
    }
    tally.report(name, o);
  };

  guarded("geometry", geometry_suite);
  guarded("kernel-stability", kernel_stability);
  guarded("hardness-infonce", hardness_and_infonce);
  guarded("gradients", gradient_check);
  guarded("small-oracles", small_oracles);

  std::optional<DeskRun> cora_run;
  std::optional<DeskData> cora_data;
  std::string cora_missing;
  guarded("desk-cora-lp", [&]() {
    Outcome o = desk_lp("MOTIFRGC_CORA", "Cora", kCoraLpFloor, true, &cora_run, &cora_data);
    if (o.data_missing) cora_missing = o.detail;
    return o;
  });
  guarded("desk-citeseer-lp",
          [&]() { return desk_lp("MOTIFRGC_CITESEER", "Citeseer", kCiteseerLpFloor, false, nullptr, nullptr); });
  guarded("desk-cora-nc", [&]() { return desk_nc(cora_run, cora_missing); });
  guarded("triangle-generation", [&]() { return triangle_generation(cora_data, cora_run, cora_missing); });
  guarded("determinism", determinism);

  std::cout << tally.failed << " failed, " << tally.failed_for_data << " failed for missing data" << std::endl;
  if (tally.failed > 0) return 1;
  return strict && tally.failed_for_data > 0 ? 1 : 0;
}
