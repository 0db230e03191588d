#include "tepose/graph.hpp"

#include <deque>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace tepose {

void SkeletonGraph::validate() const {
  if (num_joints <= 0) {
    throw std::invalid_argument("SkeletonGraph: num_joints must be positive");
  }
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_joints || b >= num_joints) {
      throw std::invalid_argument("SkeletonGraph: edge endpoint out of range");
    }
    if (a == b) {
      throw std::invalid_argument("SkeletonGraph: self-loop edge not allowed");
    }
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("SkeletonGraph: duplicate edge");
    }
  }
}

SkeletonGraph SkeletonGraph::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  SkeletonGraph g;
  g.num_joints = j.at("num_joints").get<int>();
  for (const auto& e : j.at("edges")) {
    g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  }
  g.validate();
  return g;
}

SkeletonGraph SkeletonGraph::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open skeleton file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string SkeletonGraph::to_json() const {
  nlohmann::json j;
  j["num_joints"] = num_joints;
  auto arr = nlohmann::json::array();
  for (auto [a, b] : edges) arr.push_back({a, b});
  j["edges"] = arr;
  return j.dump();
}

Eigen::MatrixXi hop_distance(const SkeletonGraph& graph) {
  graph.validate();
  const int n = graph.num_joints;
  std::vector<std::vector<int>> nbrs(n);
  for (auto [a, b] : graph.edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, kUnreachable);
  for (int s = 0; s < n; ++s) {
    dist(s, s) = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : nbrs[u]) {
        if (dist(s, v) == kUnreachable) {
          dist(s, v) = dist(s, u) + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

Eigen::MatrixXd k_adjacency(const Eigen::MatrixXi& dist, int k) {
  if (k < 0) throw std::invalid_argument("k_adjacency: k must be >= 0");
  const auto n = dist.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (m == c || dist(m, c) == k) a(m, c) = 1.0;
    }
  }
  return a;
}

Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("normalize_adjacency: matrix must be square");
  }
  Eigen::VectorXd deg = a.rowwise().sum();
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (deg(i) <= 0.0) {
      throw std::invalid_argument("normalize_adjacency: zero row sum");
    }
  }
  Eigen::VectorXd inv_sqrt = deg.array().rsqrt();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

TiledAdjacency tile_adjacency(const Eigen::MatrixXd& a_k, int tau,
                              int base_scale) {
  if (tau < 1) throw std::invalid_argument("tile_adjacency: tau must be >= 1");
  const auto n = a_k.rows();
  Eigen::MatrixXd tiled(tau * n, tau * n);
  for (int i = 0; i < tau; ++i) {
    for (int j = 0; j < tau; ++j) {
      tiled.block(i * n, j * n, n, n) = a_k;
    }
  }
  TiledAdjacency out;
  out.base_scale = base_scale;
  out.window = tau;
  out.matrix = normalize_adjacency(tiled);
  return out;
}

AdjacencySet AdjacencySet::build(const SkeletonGraph& graph, int max_scale) {
  Eigen::MatrixXi dist = hop_distance(graph);
  AdjacencySet set;
  for (int k = 0; k <= max_scale; ++k) {
    set.scales.push_back(k_adjacency(dist, k));
    set.normalized.push_back(normalize_adjacency(set.scales.back()));
  }
  return set;
}

}  // namespace tepose
