#include "tepose/discriminator.hpp"

#include <stdexcept>

namespace tepose {

DiscriminatorAdjacency DiscriminatorAdjacency::build(const SkeletonGraph& graph,
                                                     int gcn_scales,
                                                     int g3d_scales, int tau) {
  DiscriminatorAdjacency adj;
  adj.tau = tau;
  Eigen::MatrixXi dist = hop_distance(graph);
  for (int k = 0; k <= gcn_scales; ++k) {
    adj.gcn_norm.push_back(normalize_adjacency(k_adjacency(dist, k)));
  }
  for (int k = 0; k <= g3d_scales; ++k) {
    adj.g3d_tiled.push_back(tile_adjacency(k_adjacency(dist, k), tau, k).matrix);
  }
  return adj;
}

DiscriminatorParams make_discriminator_params(const std::vector<int>& channels,
                                              int gcn_scales, int g3d_scales,
                                              int tau, int root_joint,
                                              Rng& rng) {
  if (channels.size() != 4) {
    throw std::invalid_argument(
        "make_discriminator_params: need 4 channel widths (3 blocks)");
  }
  DiscriminatorParams p;
  for (int b = 0; b < 3; ++b) {
    p.blocks.push_back(make_gcn_block_params(gcn_scales, g3d_scales,
                                             channels[b], channels[b + 1], tau,
                                             rng));
  }
  const int c_top = channels[3];
  const double a = std::sqrt(6.0 / (c_top + 1));
  p.head_w.resize(c_top);
  for (int i = 0; i < c_top; ++i) p.head_w(i) = rng.uniform(-a, a);
  p.head_b = 0.0;
  p.root_joint = root_joint;
  return p;
}

double discriminate(const FeatureSeq& sample, const DiscriminatorAdjacency& adj,
                    const DiscriminatorParams& params,
                    DiscriminatorCache* cache) {
  if (sample.empty()) throw std::invalid_argument("discriminate: empty sample");
  if (params.blocks.size() != 3) {
    throw std::invalid_argument("discriminate: expected three blocks");
  }
  DiscriminatorCache local;
  DiscriminatorCache& c = cache ? *cache : local;

  // root-center each frame
  c.centered.resize(sample.size());
  for (std::size_t t = 0; t < sample.size(); ++t) {
    c.centered[t] = sample[t].rowwise() - sample[t].row(params.root_joint);
  }

  c.blocks.resize(3);
  FeatureSeq h = c.centered;
  for (int b = 0; b < 3; ++b) {
    h = gcn_block_forward(h, adj.gcn_norm, adj.g3d_tiled, params.blocks[b],
                          Activation::kRelu, &c.blocks[b]);
  }
  c.top = h;

  const int c_top = static_cast<int>(h[0].cols());
  if (params.head_w.size() != c_top) {
    throw std::invalid_argument("discriminate: head width mismatch");
  }
  c.pooled = Eigen::VectorXd::Zero(c_top);
  for (const auto& frame : h) c.pooled += frame.colwise().sum().transpose();
  c.pooled /= static_cast<double>(h.size()) * h[0].rows();

  return params.head_w.dot(c.pooled) + params.head_b;
}

DiscriminatorGrads DiscriminatorGrads::zero_like(const DiscriminatorParams& p) {
  DiscriminatorGrads g;
  for (const auto& b : p.blocks) g.blocks.push_back(tepose::zero_like(b));
  g.head_w = Eigen::VectorXd::Zero(p.head_w.size());
  g.head_b = 0.0;
  return g;
}

namespace {
void accumulate_block(GcnBlockParams& into, const GcnBlockParams& from) {
  for (std::size_t k = 0; k < into.msgcn.weights.size(); ++k) {
    into.msgcn.weights[k] += from.msgcn.weights[k];
  }
  for (std::size_t k = 0; k < into.msg3d.weights.size(); ++k) {
    into.msg3d.weights[k] += from.msg3d.weights[k];
  }
  if (!into.identity_residual) into.residual += from.residual;
}
}  // namespace

void DiscriminatorGrads::accumulate(const DiscriminatorGrads& other) {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    accumulate_block(blocks[b], other.blocks[b]);
  }
  head_w += other.head_w;
  head_b += other.head_b;
}

void DiscriminatorGrads::scale(double s) {
  for (auto& b : blocks) {
    for (auto& w : b.msgcn.weights) w *= s;
    for (auto& w : b.msg3d.weights) w *= s;
    if (!b.identity_residual) b.residual *= s;
  }
  head_w *= s;
  head_b *= s;
}

void discriminator_backward(const DiscriminatorAdjacency& adj,
                            const DiscriminatorParams& params,
                            const DiscriminatorCache& cache, double d_score,
                            DiscriminatorGrads& grads, FeatureSeq* d_input) {
  const auto frames = cache.top.size();
  const auto n = cache.top[0].rows();

  grads.head_w += d_score * cache.pooled;
  grads.head_b += d_score;

  const double inv = 1.0 / (static_cast<double>(frames) * n);
  FeatureSeq d_h(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    d_h[t] = Eigen::MatrixXd::Zero(n, cache.top[0].cols());
    d_h[t].rowwise() += (d_score * inv * params.head_w).transpose();
  }

  for (int b = 2; b >= 0; --b) {
    FeatureSeq d_in;
    gcn_block_backward(adj.gcn_norm, adj.g3d_tiled, params.blocks[b],
                       cache.blocks[b], d_h, Activation::kRelu, d_in,
                       grads.blocks[b]);
    d_h = std::move(d_in);
  }

  if (d_input) {
    // undo root centering: Xc[n] = X[n] - X[root]
    d_input->resize(frames);
    for (std::size_t t = 0; t < frames; ++t) {
      (*d_input)[t] = d_h[t];
      (*d_input)[t].row(params.root_joint) -= d_h[t].colwise().sum();
    }
  }
}

}  // namespace tepose
