#include "motifrgc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "motifrgc/errors.hpp"

namespace motifrgc {

namespace fs = std::filesystem;
using nlohmann::json;

bool CsrAdjacency::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= num_nodes() || v >= num_nodes()) return false;
  return std::binary_search(begin(u), end(u), v);
}

CsrAdjacency CsrAdjacency::from_edges(int num_nodes, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(num_nodes));
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw IndexError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range for " +
                       std::to_string(num_nodes) + " nodes");
    }
    if (u == v) continue;
    lists[static_cast<std::size_t>(u)].push_back(v);
    lists[static_cast<std::size_t>(v)].push_back(u);
  }
  CsrAdjacency adj;
  adj.offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (int v = 0; v < num_nodes; ++v) {
    auto& l = lists[static_cast<std::size_t>(v)];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    adj.offsets[static_cast<std::size_t>(v) + 1] = adj.offsets[static_cast<std::size_t>(v)] + static_cast<std::int64_t>(l.size());
  }
  adj.neighbors.reserve(static_cast<std::size_t>(adj.offsets.back()));
  for (const auto& l : lists) adj.neighbors.insert(adj.neighbors.end(), l.begin(), l.end());
  return adj;
}

std::vector<Edge> CsrAdjacency::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (int u = 0; u < num_nodes(); ++u) {
    for (const int* it = begin(u); it != end(u); ++it) {
      if (u < *it) out.emplace_back(u, *it);
    }
  }
  return out;
}

int GraphStore::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

GraphStore GraphStore::with_edges(const std::vector<Edge>& edges) const {
  GraphStore out = *this;
  out.adjacency = CsrAdjacency::from_edges(num_nodes, edges);
  return out;
}

bool MotifSet::is_positive(int i, int j) const {
  if (i == j) return true;
  const auto& s = positive_sets[static_cast<std::size_t>(i)];
  return std::binary_search(s.begin(), s.end(), j);
}

GraphFormat parse_format(const std::string& name) {
  if (name == "canonical") return GraphFormat::kCanonical;
  if (name == "planetoid") return GraphFormat::kPlanetoid;
  throw ConfigError("unknown graph format '" + name + "'");
}

// ---------------------------------------------------------------------------
// text helpers

namespace {

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view token, const fs::path& file, long line) {
  T value{};
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(file.string(), line, "cannot parse '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void write_text(const fs::path& file, const std::string& contents) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out << contents;
}

std::vector<Edge> read_edge_file(const fs::path& file) {
  auto in = open_input(file);
  std::vector<Edge> edges;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tok = split_ws(t);
    if (tok.size() != 2) throw ParseError(file.string(), lineno, "expected two node ids");
    edges.emplace_back(parse_number<int>(tok[0], file, lineno), parse_number<int>(tok[1], file, lineno));
  }
  return edges;
}

Eigen::MatrixXd read_feature_file(const fs::path& file) {
  auto in = open_input(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = t.find(',', start);
      const auto tok = trim(t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      row.push_back(parse_number<double>(tok, file, lineno));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(file.string(), lineno, "row width " + std::to_string(row.size()) + " differs from " +
                                                  std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  return x;
}

std::vector<int> read_label_file(const fs::path& file) {
  auto in = open_input(file);
  std::vector<int> labels;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    labels.push_back(parse_number<int>(t, file, lineno));
  }
  return labels;
}

GraphStore load_canonical(const fs::path& dir) {
  const fs::path meta_file = dir / "meta.json";
  if (!fs::exists(meta_file)) throw DataError("missing " + meta_file.string());
  json meta;
  try {
    std::ifstream in(meta_file);
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(meta_file.string(), 0, e.what());
  }
  const fs::path feature_file = dir / "features.csv";
  const fs::path edge_file = dir / "edges.tsv";
  if (!fs::exists(feature_file)) throw DataError("missing " + feature_file.string());
  if (!fs::exists(edge_file)) throw DataError("missing " + edge_file.string());

  GraphStore g;
  g.num_nodes = meta.at("num_nodes").get<int>();
  g.features = read_feature_file(feature_file);
  if (g.features.rows() != g.num_nodes) {
    throw ParseError(feature_file.string(), g.features.rows(),
                     "feature rows " + std::to_string(g.features.rows()) + " != num_nodes " + std::to_string(g.num_nodes));
  }
  if (meta.contains("num_features") && meta["num_features"].get<int>() != g.features.cols()) {
    throw ParseError(feature_file.string(), 1, "feature width disagrees with meta.json");
  }
  g.adjacency = CsrAdjacency::from_edges(g.num_nodes, read_edge_file(edge_file));
  if (fs::exists(dir / "labels.csv")) {
    g.labels = read_label_file(dir / "labels.csv");
    if (static_cast<int>(g.labels->size()) != g.num_nodes) {
      throw ParseError((dir / "labels.csv").string(), static_cast<long>(g.labels->size()), "label count != num_nodes");
    }
  }
  if (fs::exists(dir / "splits.json")) read_splits(dir / "splits.json", g);
  return g;
}

fs::path find_with_extension(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> hits;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) hits.push_back(entry.path());
  }
  if (hits.empty()) throw DataError("no *" + ext + " file in " + dir.string());
  std::sort(hits.begin(), hits.end());
  return hits.front();
}

GraphStore load_planetoid(const fs::path& dir) {
  const fs::path content = find_with_extension(dir, ".content");
  const fs::path cites = find_with_extension(dir, ".cites");

  std::unordered_map<std::string, int> index;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> label_names;
  {
    auto in = open_input(content);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty()) continue;
      const auto tok = split_ws(t);
      if (tok.size() < 3) throw ParseError(content.string(), lineno, "expected id, features and label");
      const std::string id(tok.front());
      if (index.count(id)) throw ParseError(content.string(), lineno, "duplicate paper id '" + id + "'");
      std::vector<double> row;
      row.reserve(tok.size() - 2);
      for (std::size_t k = 1; k + 1 < tok.size(); ++k) row.push_back(parse_number<double>(tok[k], content, lineno));
      if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(content.string(), lineno, "ragged feature row");
      index.emplace(id, static_cast<int>(rows.size()));
      rows.push_back(std::move(row));
      label_names.emplace_back(tok.back());
    }
  }
  GraphStore g;
  g.num_nodes = static_cast<int>(rows.size());
  const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  g.features.resize(g.num_nodes, cols);
  for (int i = 0; i < g.num_nodes; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  std::vector<std::string> classes = label_names;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<int> labels;
  labels.reserve(label_names.size());
  for (const auto& name : label_names) {
    labels.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), name) - classes.begin()));
  }
  g.labels = std::move(labels);

  std::vector<Edge> edges;
  {
    auto in = open_input(cites);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty()) continue;
      const auto tok = split_ws(t);
      if (tok.size() != 2) throw ParseError(cites.string(), lineno, "expected two paper ids");
      const auto a = index.find(std::string(tok[0]));
      const auto b = index.find(std::string(tok[1]));
      if (a == index.end() || b == index.end()) continue;
      edges.emplace_back(a->second, b->second);
    }
  }
  g.adjacency = CsrAdjacency::from_edges(g.num_nodes, edges);
  return g;
}

}  // namespace

GraphStore load_graph(const fs::path& dir, GraphFormat format) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  return format == GraphFormat::kCanonical ? load_canonical(dir) : load_planetoid(dir);
}

void save_canonical(const GraphStore& g, const fs::path& dir) {
  fs::create_directories(dir);
  std::string edges;
  for (const auto& [u, v] : g.adjacency.edges()) {
    edges += std::to_string(u);
    edges += '\t';
    edges += std::to_string(v);
    edges += '\n';
  }
  write_text(dir / "edges.tsv", edges);

  std::string feats;
  feats.reserve(static_cast<std::size_t>(g.features.size()) * 4);
  for (Eigen::Index i = 0; i < g.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.features.cols(); ++j) {
      if (j) feats += ',';
      append_double(feats, g.features(i, j));
    }
    feats += '\n';
  }
  write_text(dir / "features.csv", feats);

  if (g.labels) {
    std::string labels;
    for (int l : *g.labels) {
      labels += std::to_string(l);
      labels += '\n';
    }
    write_text(dir / "labels.csv", labels);
  }
  json meta = {{"num_nodes", g.num_nodes}, {"num_features", g.features.cols()}, {"num_classes", g.num_classes()}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// triangles

MotifSet enumerate_triangles(const CsrAdjacency& adj) {
  const int n = adj.num_nodes();
  // rank by (degree, id); orient every edge from lower to higher rank
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return adj.degree(a) != adj.degree(b) ? adj.degree(a) < adj.degree(b) : a < b;
  });
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

  std::vector<std::vector<int>> forward(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    for (const int* it = adj.begin(u); it != adj.end(u); ++it) {
      if (rank[static_cast<std::size_t>(u)] < rank[static_cast<std::size_t>(*it)]) forward[static_cast<std::size_t>(u)].push_back(*it);
    }
    auto& f = forward[static_cast<std::size_t>(u)];
    std::sort(f.begin(), f.end());
  }

  MotifSet motifs;
  std::vector<int> common;
  for (int u = 0; u < n; ++u) {
    const auto& fu = forward[static_cast<std::size_t>(u)];
    for (int v : fu) {
      const auto& fv = forward[static_cast<std::size_t>(v)];
      common.clear();
      std::set_intersection(fu.begin(), fu.end(), fv.begin(), fv.end(), std::back_inserter(common));
      for (int w : common) {
        Triple t{u, v, w};
        std::sort(t.begin(), t.end());
        motifs.triangles.push_back(t);
      }
    }
  }
  std::sort(motifs.triangles.begin(), motifs.triangles.end());

  motifs.positive_sets.assign(static_cast<std::size_t>(n), {});
  for (const auto& t : motifs.triangles) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a != b) motifs.positive_sets[static_cast<std::size_t>(t[static_cast<std::size_t>(a)])].push_back(t[static_cast<std::size_t>(b)]);
      }
    }
  }
  for (auto& s : motifs.positive_sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return motifs;
}

// ---------------------------------------------------------------------------
// splits

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(a)] = b;
    return true;
  }
};

std::uint64_t edge_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
}

void check_ratios(const std::array<double, 3>& ratios) {
  for (double r : ratios) {
    if (r < 0.0 || r > 1.0) throw SplitError("split ratios must lie in [0, 1]");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw SplitError("split ratios must sum to 1");
}

}  // namespace

EdgeSplit split_edges(const GraphStore& g, std::array<double, 3> ratios, std::uint64_t seed) {
  check_ratios(ratios);
  std::vector<Edge> edges = g.adjacency.edges();
  const auto total = static_cast<long>(edges.size());
  const long n_valid = std::lround(static_cast<double>(total) * ratios[1]);
  const long n_test = std::lround(static_cast<double>(total) * ratios[2]);
  if (n_valid + n_test > total) throw SplitError("graph too small for the requested split");

  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);

  // a random spanning forest stays in train so the training graph keeps the
  // original connectivity whenever enough other edges exist
  DisjointSets sets(g.num_nodes);
  std::vector<Edge> forest;
  std::vector<Edge> rest;
  for (const auto& e : edges) (sets.unite(e.first, e.second) ? forest : rest).push_back(e);
  std::vector<Edge> pool = rest;
  pool.insert(pool.end(), forest.begin(), forest.end());

  EdgeSplit split;
  split.valid_pos.assign(pool.begin(), pool.begin() + n_valid);
  split.test_pos.assign(pool.begin() + n_valid, pool.begin() + n_valid + n_test);
  split.train_pos.assign(pool.begin() + n_valid + n_test, pool.end());
  std::sort(split.train_pos.begin(), split.train_pos.end());

  const auto n = static_cast<std::uint64_t>(g.num_nodes);
  const std::uint64_t non_edges = n * (n - (n > 0 ? 1 : 0)) / 2 - static_cast<std::uint64_t>(total);
  if (static_cast<std::uint64_t>(n_valid + n_test) > non_edges) throw SplitError("not enough non-edges for negatives");
  std::unordered_set<std::uint64_t> used;
  std::uniform_int_distribution<int> pick(0, std::max(0, g.num_nodes - 1));
  auto draw = [&](long count, std::vector<Edge>& out) {
    while (static_cast<long>(out.size()) < count) {
      int u = pick(rng);
      int v = pick(rng);
      if (u == v || g.adjacency.has_edge(u, v)) continue;
      if (!used.insert(edge_key(u, v)).second) continue;
      out.emplace_back(std::min(u, v), std::max(u, v));
    }
  };
  draw(n_valid, split.valid_neg);
  draw(n_test, split.test_neg);
  return split;
}

NodeSplit split_nodes(const GraphStore& g, std::array<double, 3> ratios, std::uint64_t seed) {
  check_ratios(ratios);
  if (!g.labels) throw SplitError("node split requires labels");
  std::map<int, std::vector<int>> by_class;
  for (int v = 0; v < g.num_nodes; ++v) by_class[(*g.labels)[static_cast<std::size_t>(v)]].push_back(v);
  std::mt19937_64 rng(seed);
  NodeSplit split;
  for (auto& [label, nodes] : by_class) {
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const auto c = static_cast<double>(nodes.size());
    const auto n_train = static_cast<std::size_t>(std::lround(c * ratios[0]));
    const auto n_valid = std::min(nodes.size() - n_train, static_cast<std::size_t>(std::lround(c * ratios[1])));
    split.train.insert(split.train.end(), nodes.begin(), nodes.begin() + static_cast<long>(n_train));
    split.valid.insert(split.valid.end(), nodes.begin() + static_cast<long>(n_train),
                       nodes.begin() + static_cast<long>(n_train + n_valid));
    split.test.insert(split.test.end(), nodes.begin() + static_cast<long>(n_train + n_valid), nodes.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.valid.begin(), split.valid.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<Triple> sample_negative_triples(const GraphStore& g, const MotifSet& motifs, int count, std::uint64_t seed) {
  if (count < 1) throw SamplingError("sample_negative_triples: count must be positive");
  const auto& adj = g.adjacency;
  std::vector<double> wedges(static_cast<std::size_t>(g.num_nodes));
  double total_wedges = 0.0;
  for (int v = 0; v < g.num_nodes; ++v) {
    const double d = adj.degree(v);
    wedges[static_cast<std::size_t>(v)] = d * (d - 1.0) / 2.0;
    total_wedges += wedges[static_cast<std::size_t>(v)];
  }
  const double open = total_wedges - 3.0 * static_cast<double>(motifs.triangles.size());
  if (open < 0.5) throw SamplingError("graph has no connected non-triangle triples");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> center(wedges.begin(), wedges.end());
  std::vector<Triple> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const int c = center(rng);
    std::uniform_int_distribution<int> pick(0, adj.degree(c) - 1);
    const int a = adj.begin(c)[pick(rng)];
    const int b = adj.begin(c)[pick(rng)];
    if (a == b || adj.has_edge(a, b)) continue;
    Triple t{a, b, c};
    std::sort(t.begin(), t.end());
    out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// split / triangle files

namespace {

json edges_to_json(const std::vector<Edge>& edges) {
  json arr = json::array();
  for (const auto& [u, v] : edges) arr.push_back({u, v});
  return arr;
}

std::vector<Edge> edges_from_json(const json& arr) {
  std::vector<Edge> out;
  for (const auto& e : arr) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return out;
}

}  // namespace

void write_splits(const fs::path& file, const EdgeSplit& edges, const std::optional<NodeSplit>& nodes, std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["edge"] = {{"train_pos", edges_to_json(edges.train_pos)}, {"valid_pos", edges_to_json(edges.valid_pos)},
               {"valid_neg", edges_to_json(edges.valid_neg)}, {"test_pos", edges_to_json(edges.test_pos)},
               {"test_neg", edges_to_json(edges.test_neg)}};
  if (nodes) j["node"] = {{"train", nodes->train}, {"valid", nodes->valid}, {"test", nodes->test}};
  write_text(file, j.dump() + "\n");
}

void read_splits(const fs::path& file, GraphStore& g) {
  json j;
  try {
    std::ifstream in(file);
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(file.string(), 0, e.what());
  }
  auto check = [&](const std::vector<Edge>& edges) {
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= g.num_nodes || v >= g.num_nodes) throw IndexError("split edge out of range in " + file.string());
    }
    return edges;
  };
  if (j.contains("edge")) {
    const auto& e = j["edge"];
    EdgeSplit s;
    s.train_pos = check(edges_from_json(e.at("train_pos")));
    s.valid_pos = check(edges_from_json(e.at("valid_pos")));
    s.valid_neg = check(edges_from_json(e.at("valid_neg")));
    s.test_pos = check(edges_from_json(e.at("test_pos")));
    s.test_neg = check(edges_from_json(e.at("test_neg")));
    g.edge_split = std::move(s);
  }
  if (j.contains("node")) {
    NodeSplit s;
    s.train = j["node"].at("train").get<std::vector<int>>();
    s.valid = j["node"].at("valid").get<std::vector<int>>();
    s.test = j["node"].at("test").get<std::vector<int>>();
    g.node_split = std::move(s);
  }
}

void write_triangles(const fs::path& file, const MotifSet& motifs) {
  std::string out;
  for (const auto& t : motifs.triangles) {
    out += std::to_string(t[0]) + '\t' + std::to_string(t[1]) + '\t' + std::to_string(t[2]) + '\n';
  }
  write_text(file, out);
}

std::uint64_t split_hash(const EdgeSplit& split) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto* list : {&split.train_pos, &split.valid_pos, &split.valid_neg, &split.test_pos, &split.test_neg}) {
    mix(list->size());
    for (const auto& [u, v] : *list) mix(edge_key(u, v));
  }
  return h;
}

}  // namespace motifrgc
