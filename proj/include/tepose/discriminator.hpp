#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tepose/gcn.hpp"
#include "tepose/graph.hpp"
#include "tepose/rng.hpp"

namespace tepose {

// Normalized k-adjacency families shared by every block of the
// discriminator.
struct DiscriminatorAdjacency {
  std::vector<Eigen::MatrixXd> gcn_norm;   // K1+1 normalized N x N matrices
  std::vector<Eigen::MatrixXd> g3d_tiled;  // K2+1 normalized (tau N) x (tau N)
  int tau = 3;

  static DiscriminatorAdjacency build(const SkeletonGraph& graph,
                                      int gcn_scales, int g3d_scales, int tau);
};

struct DiscriminatorParams {
  std::vector<GcnBlockParams> blocks;  // three blocks
  Eigen::VectorXd head_w;              // final channels -> 1
  double head_b = 0.0;
  int root_joint = 0;
};

DiscriminatorParams make_discriminator_params(
    const std::vector<int>& channels,  // e.g. {3, 64, 128, 256}
    int gcn_scales, int g3d_scales, int tau, int root_joint, Rng& rng);

struct DiscriminatorCache {
  FeatureSeq centered;
  std::vector<GcnBlockCache> blocks;
  FeatureSeq top;           // last block output
  Eigen::VectorXd pooled;   // mean over frames and joints
};

// Root-centers the skeleton sequence, runs three GCN blocks, global
// average pooling and a linear head. Raw score, no squashing.
double discriminate(const FeatureSeq& sample, const DiscriminatorAdjacency& adj,
                    const DiscriminatorParams& params,
                    DiscriminatorCache* cache = nullptr);

struct DiscriminatorGrads {
  std::vector<GcnBlockParams> blocks;
  Eigen::VectorXd head_w;
  double head_b = 0.0;

  static DiscriminatorGrads zero_like(const DiscriminatorParams& p);
  void accumulate(const DiscriminatorGrads& other);
  void scale(double s);
};

// d_input, when non-null, receives the gradient w.r.t. the (uncentered)
// input sequence; needed for the adversarial generator update.
void discriminator_backward(const DiscriminatorAdjacency& adj,
                            const DiscriminatorParams& params,
                            const DiscriminatorCache& cache, double d_score,
                            DiscriminatorGrads& grads,
                            FeatureSeq* d_input = nullptr);

}  // namespace tepose
