#include "motifrgc/encoder.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "motifrgc/rng.hpp"

namespace motifrgc {

namespace {
constexpr double kKernelNormFloor = 1e-150;
constexpr double kColumnVarianceEps = 1e-12;
}  // namespace

CurvatureParams CurvatureParams::from_values(const std::vector<double>& kappas) {
  CurvatureParams p;
  p.log_magnitude.resize(static_cast<Eigen::Index>(kappas.size()));
  for (std::size_t m = 0; m < kappas.size(); ++m) {
    if (kappas[m] == 0.0) throw ContractError("curvature must be nonzero");
    p.signs.push_back(kappas[m] > 0 ? 1 : -1);
    const double mag = std::clamp(std::abs(kappas[m]), kMinMagnitude, kMaxMagnitude);
    p.log_magnitude(static_cast<Eigen::Index>(m)) = std::log(mag);
  }
  return p;
}

double CurvatureParams::kappa(int m) const {
  return signs[static_cast<std::size_t>(m)] * std::exp(log_magnitude(m));
}

Vector CurvatureParams::values() const {
  Vector out(size());
  for (int m = 0; m < size(); ++m) out(m) = kappa(m);
  return out;
}

Matrix ViewSet::concat() const {
  Eigen::Index cols = 0;
  for (const auto& v : views) cols += v.cols();
  Matrix out(views.front().rows(), cols);
  Eigen::Index at = 0;
  for (const auto& v : views) {
    out.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  return out;
}

Matrix KernelFeatures::concat() const {
  Eigen::Index cols = 0;
  for (const auto& k : kernels) cols += k.cols();
  Matrix out(kernels.front().rows(), cols);
  Eigen::Index at = 0;
  for (std::size_t m = 1; m < kernels.size(); ++m) {
    out.middleCols(at, kernels[m].cols()) = kernels[m];
    at += kernels[m].cols();
  }
  out.middleCols(at, kernels[0].cols()) = kernels[0];
  return out;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderState& state) {
  EncoderGrads g;
  for (const auto& p : state.factor_points) g.factor_points.push_back(Matrix::Zero(p.rows(), p.cols()));
  g.kappa = Vector::Zero(state.num_factors());
  for (const auto& c : state.conv) g.conv.push_back({Dense::zeros_like(c.first), Dense::zeros_like(c.second)});
  g.projector = {Dense::zeros_like(state.projector.first), Dense::zeros_like(state.projector.second)};
  return g;
}

void EncoderGrads::set_zero() {
  for (auto& p : factor_points) p.setZero();
  kappa.setZero();
  for (auto* stack : {&projector}) {
    stack->first.weight.setZero();
    stack->first.bias.setZero();
    stack->second.weight.setZero();
    stack->second.bias.setZero();
  }
  for (auto& c : conv) {
    c.first.weight.setZero();
    c.first.bias.setZero();
    c.second.weight.setZero();
    c.second.bias.setZero();
  }
}

Matrix principal_components(const Matrix& x, int k, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  const Eigen::Index f = x.cols();
  const RowVector mean = x.colwise().mean();
  const Eigen::Index width = std::min<Eigen::Index>(f, k + 10);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix basis = Matrix::NullaryExpr(f, width, [&]() { return gauss(rng); });

  // Xc = X - 1 mean, applied without materializing the centered matrix
  auto times = [&](const Matrix& v) -> Matrix {
    Matrix y = x * v;
    y.rowwise() -= mean * v;
    return y;
  };
  auto times_t = [&](const Matrix& y) -> Matrix {
    Matrix v = x.transpose() * y;
    v -= mean.transpose() * y.colwise().sum();
    return v;
  };
  for (int it = 0; it < 6; ++it) {
    Matrix y = times(basis);
    Eigen::HouseholderQR<Matrix> qr_y(y);
    y = qr_y.householderQ() * Matrix::Identity(n, width);
    basis = times_t(y);
    Eigen::HouseholderQR<Matrix> qr_b(basis);
    basis = qr_b.householderQ() * Matrix::Identity(f, width);
  }
  const Matrix projected = times(basis);  // n x width
  Eigen::JacobiSVD<Matrix> svd(projected, Eigen::ComputeThinV);
  Matrix scores = projected * svd.matrixV().leftCols(std::min<Eigen::Index>(k, width));
  // fix the sign of each component so the largest-magnitude entry is positive
  for (Eigen::Index c = 0; c < scores.cols(); ++c) {
    Eigen::Index arg = 0;
    scores.col(c).cwiseAbs().maxCoeff(&arg);
    if (scores(arg, c) < 0) scores.col(c) *= -1.0;
  }
  return scores;
}

EncoderState init_features(const GraphStore& g, const EncoderConfig& config) {
  if (config.factors.empty()) throw ContractError("encoder needs at least one factor");
  const int n = g.num_nodes;
  const auto f = static_cast<int>(g.features.cols());
  if (g.features.rows() != n) throw ContractError("feature rows do not match the node count");
  if (g.features.cwiseAbs().maxCoeff() == 0.0) throw DegenerateInitError("all-zero feature matrix");

  EncoderState s;
  s.config = config;
  s.spec.factors = config.factors;
  s.spec.diversified.dim = std::max(1, f - 1);
  std::vector<double> kappas;
  for (const auto& fs : config.factors) {
    if (fs.dim < 1) throw ContractError("factor dimension must be positive");
    kappas.push_back(fs.curvature);
  }
  s.curvature = CurvatureParams::from_values(kappas);
  s.magnitudes = g.features.rowwise().norm();

  int max_dim = 0;
  for (const auto& fs : config.factors) max_dim = std::max(max_dim, fs.dim);
  Matrix reduced;
  if (f > max_dim) {
    reduced = principal_components(g.features, max_dim, derive_seed(config.seed, 2));
  } else {
    reduced = Matrix::Zero(n, max_dim);
    reduced.leftCols(f) = g.features;
  }

  for (int m = 0; m < static_cast<int>(config.factors.size()); ++m) {
    const int d = config.factors[static_cast<std::size_t>(m)].dim;
    Matrix p = reduced.leftCols(d);
    const double max_norm = p.rowwise().norm().maxCoeff();
    if (max_norm == 0.0) throw DegenerateInitError("feature rows have zero norm after reduction");
    p /= 2.0 * std::sqrt(std::abs(s.kappa(m))) * max_norm;
    s.factor_points.push_back(std::move(p));
    s.factor_bases.push_back(sample_basis<double>(d, config.kernel_dim, s.kappa(m),
                                                  derive_seed(config.seed, 200 + static_cast<std::uint64_t>(m)),
                                                  config.frequency_std));
  }
  s.euclid_basis = sample_basis<double>(f, config.kernel_dim, std::nullopt, derive_seed(config.seed, 100),
                                        config.frequency_std);
  s.euclid_kernel = fourier_map_rows(g.features, s.euclid_basis);

  std::mt19937_64 rng(derive_seed(config.seed, 1));
  for (int v = 0; v < s.num_views(); ++v) {
    s.conv.push_back({Dense::glorot(config.kernel_dim, config.hidden_dim, rng),
                      Dense::glorot(config.hidden_dim, config.hidden_dim, rng)});
  }
  s.projector = {Dense::glorot(config.hidden_dim, config.projector_hidden, rng),
                 Dense::glorot(config.projector_hidden, config.view_dim, rng)};
  return s;
}

KernelNorm parse_kernel_norm(const std::string& name) {
  if (name == "none") return KernelNorm::kNone;
  if (name == "row") return KernelNorm::kRow;
  if (name == "column") return KernelNorm::kColumn;
  if (name == "row_column") return KernelNorm::kRowColumn;
  throw ConfigError("unknown kernel_norm '" + name + "' (expected none, row, column or row_column)");
}

std::string to_string(KernelNorm norm) {
  switch (norm) {
    case KernelNorm::kNone: return "none";
    case KernelNorm::kRow: return "row";
    case KernelNorm::kColumn: return "column";
    case KernelNorm::kRowColumn: return "row_column";
  }
  return "none";
}

namespace {

bool rows_normalized(KernelNorm n) { return n == KernelNorm::kRow || n == KernelNorm::kRowColumn; }
bool columns_normalized(KernelNorm n) { return n == KernelNorm::kColumn || n == KernelNorm::kRowColumn; }

Matrix normalize_kernel(const Matrix& raw, KernelNorm mode, int view, ViewCache* cache) {
  Matrix k = raw;
  if (rows_normalized(mode)) {
    const Vector norms = k.rowwise().norm();
    if ((norms.array() < kKernelNormFloor).any()) {
      throw NumericalFault("kernel row with vanishing norm (view " + std::to_string(view) + ")");
    }
    k = norms.cwiseInverse().asDiagonal() * k;
    if (cache) cache->row_norm = norms;
  }
  if (columns_normalized(mode)) {
    if (cache && rows_normalized(mode)) cache->kernel_unit = k;
    k.rowwise() -= k.colwise().mean();
    const RowVector scale =
        ((k.colwise().squaredNorm() / static_cast<double>(k.rows())).array() + kColumnVarianceEps).rsqrt().matrix();
    k = k * scale.asDiagonal();
    if (cache) cache->col_scale = scale;
  }
  return k;
}

// Reverse of normalize_kernel: gradient wrt the raw kernel given the gradient
// wrt the conv input.
Matrix normalize_kernel_backward(const ViewCache& c, KernelNorm mode, Matrix g) {
  if (columns_normalized(mode)) {
    // y = (u - mean) * s per column: s * (g - mean(g) - y * mean(g y))
    const double inv_n = 1.0 / static_cast<double>(g.rows());
    const RowVector g_mean = g.colwise().sum() * inv_n;
    const RowVector gy_mean = c.kernel.cwiseProduct(g).colwise().sum() * inv_n;
    g = ((g.rowwise() - g_mean) - c.kernel * gy_mean.asDiagonal()) * c.col_scale.asDiagonal();
  }
  if (rows_normalized(mode)) {
    const Matrix& unit = columns_normalized(mode) ? c.kernel_unit : c.kernel;
    const Vector proj = unit.cwiseProduct(g).rowwise().sum();
    g = c.row_norm.cwiseInverse().asDiagonal() * (g - proj.asDiagonal() * unit);
  }
  return g;
}

KernelFeatures kernel_views(const EncoderState& state, ForwardCache* cache) {
  KernelFeatures out;
  std::vector<Matrix> raw;
  raw.push_back(state.euclid_kernel);
  for (int m = 0; m < state.num_factors(); ++m) {
    raw.push_back(gf_map_rows(state.factor_points[static_cast<std::size_t>(m)],
                              state.factor_bases[static_cast<std::size_t>(m)], state.kappa(m)));
    check_finite(raw.back(), "kernel", m + 1);
  }
  const KernelNorm mode = state.config.kernel_norm;
  if (mode == KernelNorm::kNone) {
    out.kernels = std::move(raw);
    return out;
  }
  for (std::size_t v = 0; v < raw.size(); ++v) {
    ViewCache* c = cache ? &cache->views[v] : nullptr;
    out.kernels.push_back(normalize_kernel(raw[v], mode, static_cast<int>(v), c));
  }
  out.raw = std::move(raw);
  return out;
}

}  // namespace

KernelFeatures kernel_views(const EncoderState& state) { return kernel_views(state, nullptr); }

void check_finite(const Matrix& m, const char* where, int view) {
  if (m.allFinite()) return;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite()) {
      throw NumericalFault(std::string("non-finite activation in ") + where + " (view " + std::to_string(view) +
                           ", node " + std::to_string(i) + ")");
    }
  }
}

ViewSet forward(const SparseMatrix& propagation, const EncoderState& state, ForwardCache* cache) {
  if (cache) cache->views.assign(static_cast<std::size_t>(state.num_views()), {});
  const KernelFeatures kernels = kernel_views(state, cache);
  ViewSet out;
  for (int v = 0; v < state.num_views(); ++v) {
    const ConvStack& conv = state.conv[static_cast<std::size_t>(v)];
    const Matrix& k = kernels.kernels[static_cast<std::size_t>(v)];
    Matrix pre1 = propagation * (k * conv.first.weight);
    pre1.rowwise() += conv.first.bias;
    Matrix hidden1 = elu(pre1);
    Matrix propagated1 = propagation * hidden1;
    Matrix pre2 = conv.second(propagated1);
    check_finite(pre2, "conv", v);
    Matrix proj_pre = state.projector.first(pre2);
    Matrix proj_hidden = elu(proj_pre);
    Matrix z = state.projector.second(proj_hidden);
    check_finite(z, "projector", v);
    out.views.push_back(std::move(z));
    if (cache) {
      auto& c = cache->views[static_cast<std::size_t>(v)];
      c.kernel = k;
      c.pre1 = std::move(pre1);
      c.hidden1 = std::move(hidden1);
      c.propagated1 = std::move(propagated1);
      c.pre2 = std::move(pre2);
      c.proj_pre = std::move(proj_pre);
      c.proj_hidden = std::move(proj_hidden);
    }
  }
  return out;
}

void backward(const SparseMatrix& propagation, const EncoderState& state, const ForwardCache& cache,
              const std::vector<Matrix>& view_grads, EncoderGrads& grads) {
  for (int v = 0; v < state.num_views(); ++v) {
    const auto& c = cache.views[static_cast<std::size_t>(v)];
    const ConvStack& conv = state.conv[static_cast<std::size_t>(v)];
    ConvStack& gconv = grads.conv[static_cast<std::size_t>(v)];

    Matrix g = dense_backward(state.projector.second, c.proj_hidden, view_grads[static_cast<std::size_t>(v)],
                              grads.projector.second);
    g = elu_backward(c.proj_pre, g);
    g = dense_backward(state.projector.first, c.pre2, g, grads.projector.first);
    g = dense_backward(conv.second, c.propagated1, g, gconv.second);
    g = propagation.transpose() * g;
    g = elu_backward(c.pre1, g);
    gconv.first.bias += g.colwise().sum();
    const Matrix g_t = propagation.transpose() * g;  // gradient wrt K W1
    gconv.first.weight.noalias() += c.kernel.transpose() * g_t;
    if (v == 0) continue;
    Matrix g_kernel = g_t * conv.first.weight.transpose();
    if (state.config.kernel_norm != KernelNorm::kNone) {
      g_kernel = normalize_kernel_backward(c, state.config.kernel_norm, std::move(g_kernel));
    }
    const int m = v - 1;
    grads.kappa(m) += gf_map_rows_backward(state.factor_points[static_cast<std::size_t>(m)],
                                           state.factor_bases[static_cast<std::size_t>(m)], state.kappa(m), g_kernel,
                                           grads.factor_points[static_cast<std::size_t>(m)]);
  }
}

ProductPoint<double> product_point(const EncoderState& state, int node) {
  ProductPoint<double> p;
  for (const auto& pts : state.factor_points) p.components.push_back(pts.row(node).transpose());
  p.magnitude = state.magnitudes(node);
  return p;
}

}  // namespace motifrgc
