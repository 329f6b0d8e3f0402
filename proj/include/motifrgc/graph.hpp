#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace motifrgc {

using Edge = std::pair<int, int>;
using Triple = std::array<int, 3>;

/// Undirected adjacency in CSR form; neighbor lists are sorted.
struct CsrAdjacency {
  std::vector<std::int64_t> offsets{0};
  std::vector<int> neighbors;

  int num_nodes() const { return static_cast<int>(offsets.size()) - 1; }
  int degree(int v) const { return static_cast<int>(offsets[v + 1] - offsets[v]); }
  const int* begin(int v) const { return neighbors.data() + offsets[v]; }
  const int* end(int v) const { return neighbors.data() + offsets[v + 1]; }
  bool has_edge(int u, int v) const;
  std::size_t num_edges() const { return neighbors.size() / 2; }

  /// Builds a symmetric, self-loop-free, deduplicated adjacency.
  static CsrAdjacency from_edges(int num_nodes, const std::vector<Edge>& edges);
  /// Each undirected edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const;
};

struct EdgeSplit {
  std::vector<Edge> train_pos;
  std::vector<Edge> valid_pos;
  std::vector<Edge> valid_neg;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
};

struct NodeSplit {
  std::vector<int> train;
  std::vector<int> valid;
  std::vector<int> test;
};

struct GraphStore {
  int num_nodes = 0;
  CsrAdjacency adjacency;
  Eigen::MatrixXd features;
  std::optional<std::vector<int>> labels;
  std::optional<EdgeSplit> edge_split;
  std::optional<NodeSplit> node_split;

  int num_features() const { return static_cast<int>(features.cols()); }
  int num_classes() const;
  /// Copy of this graph whose adjacency holds only `edges` (e.g. training positives).
  GraphStore with_edges(const std::vector<Edge>& edges) const;
};

/// Triangles as sorted triples plus, per node, the sorted set of nodes sharing
/// a triangle with it.
struct MotifSet {
  std::vector<Triple> triangles;
  std::vector<std::vector<int>> positive_sets;

  bool is_positive(int i, int j) const;
};

enum class GraphFormat { kCanonical, kPlanetoid };

/// Loads a dataset directory.
///
/// canonical: edges.tsv, features.csv, optional labels.csv, meta.json and
///            optional splits.json.
/// planetoid: the citation-network raw layout <name>.content / <name>.cites;
///            citations that reference papers missing from the content file
///            are dropped.
GraphStore load_graph(const std::filesystem::path& dir, GraphFormat format);
GraphFormat parse_format(const std::string& name);

void save_canonical(const GraphStore& g, const std::filesystem::path& dir);

MotifSet enumerate_triangles(const CsrAdjacency& adjacency);
inline MotifSet enumerate_triangles(const GraphStore& g) { return enumerate_triangles(g.adjacency); }

EdgeSplit split_edges(const GraphStore& g, std::array<double, 3> ratios, std::uint64_t seed);
NodeSplit split_nodes(const GraphStore& g, std::array<double, 3> ratios, std::uint64_t seed);

/// Connected, non-triangle 3-node subgraphs (paths u - c - w with u, w not
/// adjacent), drawn uniformly from the pool of such wedges.
std::vector<Triple> sample_negative_triples(const GraphStore& g, const MotifSet& motifs, int count,
                                            std::uint64_t seed);

// splits.json / triangles.tsv
void write_splits(const std::filesystem::path& file, const EdgeSplit& edges, const std::optional<NodeSplit>& nodes,
                  std::uint64_t seed);
void read_splits(const std::filesystem::path& file, GraphStore& g);
void write_triangles(const std::filesystem::path& file, const MotifSet& motifs);

/// FNV-1a over the split contents; equal seeds give equal hashes.
std::uint64_t split_hash(const EdgeSplit& split);

}  // namespace motifrgc
