#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace tepose {

// Hop-count sentinel for joint pairs with no connecting path. Never equal
// to any kernel scale k >= 0.
constexpr int kUnreachable = -1;

// Undirected joint connectivity. Self-loops are not stored here; they are
// folded in when the k-adjacency matrices are built.
struct SkeletonGraph {
  int num_joints = 0;
  std::vector<std::pair<int, int>> edges;

  void validate() const;

  static SkeletonGraph from_json(const std::string& text);
  static SkeletonGraph from_json_file(const std::string& path);
  std::string to_json() const;
};

// All-pairs shortest hop counts via per-node breadth-first search.
// Entry (m, n) is the hop count, or kUnreachable.
Eigen::MatrixXi hop_distance(const SkeletonGraph& graph);

// Binary matrix with 1 where d(m, n) == k or m == n.
Eigen::MatrixXd k_adjacency(const Eigen::MatrixXi& dist, int k);

// Symmetric degree normalization D^{-1/2} A D^{-1/2}.
// Throws if any row sum is not strictly positive.
Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a);

struct TiledAdjacency {
  int base_scale = 0;
  int window = 1;
  Eigen::MatrixXd matrix;  // (tau*N) x (tau*N), normalized
};

// Tiles the raw binary k-adjacency into a tau x tau block matrix, then
// normalizes with the tiled degree matrix.
TiledAdjacency tile_adjacency(const Eigen::MatrixXd& a_k, int tau,
                              int base_scale = 0);

// The k-hop adjacency family for one skeleton.
struct AdjacencySet {
  std::vector<Eigen::MatrixXd> scales;      // K+1 binary matrices
  std::vector<Eigen::MatrixXd> normalized;  // K+1 normalized matrices

  int num_scales() const { return static_cast<int>(scales.size()); }

  static AdjacencySet build(const SkeletonGraph& graph, int max_scale);
};

}  // namespace tepose
