#include <doctest.h>

#include "tepose/gcn.hpp"
#include "tepose/graph.hpp"
#include "tepose/rng.hpp"

using namespace tepose;

namespace {

SkeletonGraph chain(int n) {
  SkeletonGraph g;
  g.num_joints = n;
  for (int i = 1; i < n; ++i) g.edges.emplace_back(i - 1, i);
  return g;
}

Eigen::MatrixXd random_matrix(int r, int c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("msgcn on a single node is a plain linear map") {
  SkeletonGraph g;
  g.num_joints = 1;
  const auto adj = AdjacencySet::build(g, 0);
  Rng rng(1);
  const auto p = make_msgcn_params(0, 3, 4, rng);
  const Eigen::MatrixXd x = random_matrix(1, 3, rng);
  const auto y = msgcn_forward(x, adj.normalized, p, Activation::kIdentity);
  CHECK(y.isApprox(x * p.weights[0], 1e-12));
}

TEST_CASE("msgcn matches the explicit scale sum") {
  Rng rng(2);
  const auto adj = AdjacencySet::build(chain(5), 2);
  const auto p = make_msgcn_params(2, 3, 4, rng);
  const Eigen::MatrixXd x = random_matrix(5, 3, rng);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(5, 4);
  for (int k = 0; k <= 2; ++k) {
    expect += adj.normalized[k] * x * p.weights[k];
  }
  const auto y = msgcn_forward(x, adj.normalized, p, Activation::kIdentity);
  CHECK(y.isApprox(expect, 1e-12));
  const auto yr = msgcn_forward(x, adj.normalized, p, Activation::kRelu);
  CHECK(yr.isApprox(expect.cwiseMax(0.0), 1e-12));
}

TEST_CASE("msg3d matches a tiled-window oracle") {
  Rng rng(3);
  const int n = 4, tau = 3, frames = 5;
  const auto adj = AdjacencySet::build(chain(n), 1);
  std::vector<Eigen::MatrixXd> tiled;
  for (const auto& a : adj.scales) {
    tiled.push_back(tile_adjacency(a, tau).matrix);
  }
  const auto p = make_msg3d_params(1, 3, 2, tau, rng);
  FeatureSeq x;
  for (int t = 0; t < frames; ++t) x.push_back(random_matrix(n, 3, rng));

  const auto y = msg3d_forward(x, tiled, p, Activation::kIdentity);
  REQUIRE(static_cast<int>(y.size()) == frames);

  // oracle: stack the zero-padded window, multiply the full tiled matrix,
  // keep the center block of rows
  const int half = tau / 2;
  for (int t = 0; t < frames; ++t) {
    Eigen::MatrixXd window = Eigen::MatrixXd::Zero(tau * n, 3);
    for (int d = -half; d <= half; ++d) {
      const int src = t + d;
      if (src < 0 || src >= frames) continue;
      window.block((d + half) * n, 0, n, 3) = x[src];
    }
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(tau * n, 2);
    for (std::size_t k = 0; k < tiled.size(); ++k) {
      big += tiled[k] * window * p.weights[k];
    }
    CHECK(y[t].isApprox(big.block(half * n, 0, n, 2), 1e-12));
  }
}

TEST_CASE("gcn block composes branches with an identity residual") {
  Rng rng(4);
  const int n = 4, tau = 3;
  const auto adj = AdjacencySet::build(chain(n), 1);
  std::vector<Eigen::MatrixXd> tiled;
  for (const auto& a : adj.scales) {
    tiled.push_back(tile_adjacency(a, tau).matrix);
  }
  auto p = make_gcn_block_params(1, 1, 3, 3, tau, rng);
  REQUIRE(p.identity_residual);
  FeatureSeq x;
  for (int t = 0; t < 3; ++t) x.push_back(random_matrix(n, 3, rng));

  const auto gcn_out = [&] {
    FeatureSeq out;
    for (const auto& f : x) {
      out.push_back(msgcn_forward(f, adj.normalized, p.msgcn,
                                  Activation::kIdentity));
    }
    return out;
  }();
  const auto g3d_out = msg3d_forward(x, tiled, p.msg3d, Activation::kIdentity);

  const auto y = gcn_block_forward(x, adj.normalized, tiled, p,
                                   Activation::kRelu);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const Eigen::MatrixXd expect =
        (gcn_out[t] + g3d_out[t] + x[t]).cwiseMax(0.0);
    CHECK(y[t].isApprox(expect, 1e-12));
  }
}

TEST_CASE("gcn block uses a projection residual when widths differ") {
  Rng rng(5);
  auto p = make_gcn_block_params(1, 1, 3, 5, 3, rng);
  CHECK(!p.identity_residual);
  CHECK(p.residual.rows() == 3);
  CHECK(p.residual.cols() == 5);
}
