#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "motifrgc/errors.hpp"
#include "motifrgc/train.hpp"
#include "test_util.hpp"

using namespace motifrgc;

namespace {

TrainConfig small_train_config(std::uint64_t seed) {
  TrainConfig c;
  c.encoder.factors = {{1.0, 4}, {-1.0, 4}, {-1.0, 4}};
  c.encoder.kernel_dim = 32;
  c.encoder.hidden_dim = 16;
  c.encoder.view_dim = 8;
  c.encoder.projector_hidden = 16;
  c.discriminator_width = 16;
  c.fake_batch_size = 16;
  c.min_steps = 1;
  c.max_steps = 1;
  c.max_iterations = 1;
  c.seed = seed;
  return c;
}

struct Prepared {
  GraphStore full;
  GraphStore train_graph;
  MotifSet motifs;
};

Prepared prepare_sbm(std::uint64_t seed) {
  Prepared p;
  p.full = test::block_graph(60, 0.3, 0.02, 6, seed);
  p.full.edge_split = split_edges(p.full, {0.85, 0.05, 0.10}, seed);
  p.train_graph = p.full.with_edges(p.full.edge_split->train_pos);
  p.motifs = enumerate_triangles(p.train_graph.adjacency);
  return p;
}

double total_abs(const ModelState& m) {
  double s = 0.0;
  for (const auto& p : m.encoder.factor_points) s += p.cwiseAbs().sum();
  for (const auto& c : m.encoder.conv) s += c.first.weight.cwiseAbs().sum() + c.second.weight.cwiseAbs().sum();
  return s;
}

double disc_abs(const ModelState& m) {
  return m.discriminator.hidden1.weight.cwiseAbs().sum() + m.discriminator.output.weight.cwiseAbs().sum();
}

}  // namespace

TEST_CASE("adam_step first step by hand") {
  Matrix p = Matrix::Constant(1, 2, 1.0);
  Matrix g(1, 2);
  g << 0.5, -2.0;
  AdamMoments m = AdamMoments::like(p);
  adam_step(p, g, m, 0.1);
  // bias-corrected first step is lr * g / (|g| + eps)
  CHECK(p(0, 0) == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  CHECK(p(0, 1) == doctest::Approx(1.0 + 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-14));
  CHECK(m.steps == 1);
  CHECK_THROWS(adam_step(p, Matrix::Constant(1, 2, std::nan("")), m, 0.1));
}

TEST_CASE("riemannian_adam_step at the origin") {
  for (double grad : {0.3, -1.7}) {
    Matrix x = Matrix::Zero(1, 1);
    AdamMoments m = AdamMoments::like(x);
    const double lr = 0.05;
    riemannian_adam_step(x, Matrix::Constant(1, 1, grad), m, -1.0, lr);
    // rgrad = grad / lambda_0^2 = grad / 4; the first Adam direction is
    // -lr * rgrad / (|rgrad| + eps), and exp_0(v) = tanh(|v|) v / |v| at k = -1
    const double rg = grad / 4.0;
    const double v = -lr * rg / (std::abs(rg) + 1e-8);
    CHECK(std::abs(x(0, 0) - std::tanh(std::abs(v)) * (v > 0 ? 1.0 : -1.0)) <= 1e-8);
  }
}

TEST_CASE("riemannian_adam_step zero gradient and feasibility") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x = Matrix::NullaryExpr(5, 3, [&]() { return 0.2 * gauss(rng); });
  AdamMoments m = AdamMoments::like(x);
  const Matrix before = x;
  riemannian_adam_step(x, Matrix::Zero(5, 3), m, -1.0, 0.1);
  CHECK(x == before);

  for (double kappa : {-1.0, -4.0}) {
    Matrix pts = Matrix::NullaryExpr(6, 3, [&]() { return 0.1 * gauss(rng); });
    AdamMoments mm = AdamMoments::like(pts);
    const double radius = 1.0 / std::sqrt(-kappa);
    bool feasible = true;
    for (int step = 0; step < 1000; ++step) {
      const Matrix g = Matrix::NullaryExpr(6, 3, [&]() { return 10.0 * gauss(rng); });
      riemannian_adam_step(pts, g, mm, kappa, 0.5);
      feasible = feasible && (pts.rowwise().norm().array() < radius).all() && pts.allFinite();
    }
    CHECK(feasible);
  }
  CHECK_THROWS(riemannian_adam_step(x, Matrix::Constant(5, 3, std::nan("")), m, -1.0, 0.1));
}

TEST_CASE("curvature_step") {
  CurvatureParams c = CurvatureParams::from_values({1.0, -1.0, -2.0});
  AdamMoments m = AdamMoments::like(Matrix(c.log_magnitude));
  const Vector before = c.values();
  curvature_step(c, Vector::Zero(3), m, 0.1);
  CHECK(c.values().isApprox(before));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int step = 0; step < 2000; ++step) {
    Vector g(3);
    for (int i = 0; i < 3; ++i) g(i) = 100.0 * gauss(rng) + (i == 0 ? 50.0 : -50.0);
    curvature_step(c, g, m, 0.5);
    CHECK(c.kappa(0) > 0.0);
    CHECK(c.kappa(1) < 0.0);
    CHECK(c.kappa(2) < 0.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(c.kappa(i)) >= CurvatureParams::kMinMagnitude * (1 - 1e-12));
      CHECK(std::abs(c.kappa(i)) <= CurvatureParams::kMaxMagnitude * (1 + 1e-12));
    }
  }
}

TEST_CASE("shrinking |kappa| keeps points feasible without projection") {
  const GraphStore g = test::block_graph(20, 0.3, 0.05, 4, 3);
  EncoderConfig ec;
  ec.factors = {{-1.0, 4}};
  ec.kernel_dim = 8;
  EncoderState s = init_features(g, ec);
  for (auto& p : s.factor_points) p *= 1.9;  // close to the boundary
  const Matrix before = s.factor_points[0];
  AdamMoments m = AdamMoments::like(Matrix(s.curvature.log_magnitude));
  // a negative dL/dkappa raises kappa, i.e. toward zero from below
  curvature_step(s.curvature, Vector::Constant(1, -1.0), m, 0.1);
  CHECK(std::abs(s.kappa(0)) < 1.0);
  reproject_points(s);
  CHECK(s.factor_points[0] == before);
  CHECK((std::abs(s.kappa(0)) * s.factor_points[0].rowwise().squaredNorm().array() < 1.0).all());
}

TEST_CASE("one outer iteration does one update of each kind") {
  Prepared p = prepare_sbm(4);
  TrainConfig cfg = small_train_config(4);
  Trainer t(p.train_graph, p.motifs, cfg);
  const ModelState init = t.model;
  t.min_step();
  CHECK(total_abs(t.model) != total_abs(init));
  CHECK(disc_abs(t.model) == disc_abs(init));
  const double enc_after_min = total_abs(t.model);
  t.max_step();
  CHECK(disc_abs(t.model) != disc_abs(init));
  CHECK(total_abs(t.model) == enc_after_min);

  std::ostringstream log;
  const TrainResult r = train(p.train_graph, p.motifs, cfg, &log);
  REQUIRE(r.log.size() == 2);
  CHECK(r.log[1].min_updates == 1);
  CHECK(r.log[1].max_updates == 1);
  std::istringstream lines(log.str());
  std::string line;
  int records = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("valid_auc"));
    CHECK(j["kappa"].size() == 3);
    ++records;
  }
  CHECK(records == 2);
}

TEST_CASE("training is deterministic") {
  Prepared p = prepare_sbm(5);
  TrainConfig cfg = small_train_config(5);
  cfg.max_iterations = 3;
  std::ostringstream a, b;
  const TrainResult ra = train(p.train_graph, p.motifs, cfg, &a);
  const TrainResult rb = train(p.train_graph, p.motifs, cfg, &b);
  CHECK(a.str() == b.str());
  CHECK(ra.best.encoder.factor_points[1] == rb.best.encoder.factor_points[1]);
  CHECK(ra.best.decoder.r == rb.best.decoder.r);
}

TEST_CASE("training improves validation AUC on a block model") {
  Prepared p = prepare_sbm(6);
  TrainConfig cfg = small_train_config(6);
  cfg.min_steps = 2;
  cfg.max_steps = 2;
  cfg.max_iterations = 30;
  const double initial = Trainer(p.train_graph, p.motifs, cfg).validation_auc();
  const TrainResult r = train(p.train_graph, p.motifs, cfg);
  CAPTURE(initial);
  CAPTURE(r.best_valid_auc);
  CHECK(r.best_valid_auc > initial);
  for (const auto& pts : r.best.encoder.factor_points) CHECK(pts.allFinite());
}

TEST_CASE("discriminator loss falls on a frozen generator") {
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Prepared p = prepare_sbm(10 + seed);
    TrainConfig cfg = small_train_config(seed);
    cfg.fake_batch_size = 64;
    Trainer t(p.train_graph, p.motifs, cfg);
    const double first = t.max_step();
    double last = first;
    for (int s = 0; s < 5; ++s) last = t.max_step();
    if (last <= first) ++decreased;
  }
  CHECK(decreased >= 3);
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.min_steps = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr_euclidean = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.generator.sign = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(TrainConfig{}.validate());
}
