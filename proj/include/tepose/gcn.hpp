#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tepose/graph.hpp"
#include "tepose/rng.hpp"

namespace tepose {

// (T+1) frames of N x C joint features.
using FeatureSeq = std::vector<Eigen::MatrixXd>;

enum class Activation { kIdentity, kRelu };

inline Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& x,
                                        Activation act) {
  if (act == Activation::kIdentity) return x;
  return x.cwiseMax(0.0);
}

inline Eigen::MatrixXd activation_backward(const Eigen::MatrixXd& pre,
                                           const Eigen::MatrixXd& d_out,
                                           Activation act) {
  if (act == Activation::kIdentity) return d_out;
  return (pre.array() > 0.0).select(d_out, Eigen::MatrixXd::Zero(pre.rows(), pre.cols()));
}

struct MsGcnParams {
  std::vector<Eigen::MatrixXd> weights;  // K+1 matrices, C x C'
};

struct MsG3dParams {
  std::vector<Eigen::MatrixXd> weights;  // K+1 matrices, C x C'
  int window = 3;                        // tau, odd
};

struct GcnBlockParams {
  MsGcnParams msgcn;
  MsG3dParams msg3d;
  bool identity_residual = true;
  Eigen::MatrixXd residual;  // C x C' when not identity

  int in_channels() const { return static_cast<int>(msgcn.weights.at(0).rows()); }
  int out_channels() const { return static_cast<int>(msgcn.weights.at(0).cols()); }
};

MsGcnParams make_msgcn_params(int scales, int c_in, int c_out, Rng& rng);
MsG3dParams make_msg3d_params(int scales, int c_in, int c_out, int tau,
                              Rng& rng);
GcnBlockParams make_gcn_block_params(int gcn_scales, int g3d_scales, int c_in,
                                     int c_out, int tau, Rng& rng);

// One frame of MS-GCN: sigma[ sum_k Ahat_k X W_k ].
Eigen::MatrixXd msgcn_forward(const Eigen::MatrixXd& x,
                              const std::vector<Eigen::MatrixXd>& adj_norm,
                              const MsGcnParams& params, Activation act,
                              Eigen::MatrixXd* pre_out = nullptr);

// Gradients of the identity-activation MS-GCN given d(pre-activation).
void msgcn_backward(const Eigen::MatrixXd& x,
                    const std::vector<Eigen::MatrixXd>& adj_norm,
                    const MsGcnParams& params, const Eigen::MatrixXd& d_pre,
                    Eigen::MatrixXd& d_x, MsGcnParams& d_params);

// MS-G3D over a zero-padded temporal window; per output frame the tiled
// window is convolved and the center block of rows is emitted.
FeatureSeq msg3d_forward(const FeatureSeq& x,
                         const std::vector<Eigen::MatrixXd>& tiled_adj,
                         const MsG3dParams& params, Activation act,
                         FeatureSeq* pre_out = nullptr);

void msg3d_backward(const FeatureSeq& x,
                    const std::vector<Eigen::MatrixXd>& tiled_adj,
                    const MsG3dParams& params, const FeatureSeq& d_pre,
                    FeatureSeq& d_x, MsG3dParams& d_params);

struct GcnBlockCache {
  FeatureSeq input;
  FeatureSeq pre;  // pre-activation of the block output
};

// sigma( msgcn(X) + msg3d(X) + residual(X) ), branches with identity
// internal activation.
FeatureSeq gcn_block_forward(const FeatureSeq& x,
                             const std::vector<Eigen::MatrixXd>& adj_norm,
                             const std::vector<Eigen::MatrixXd>& tiled_adj,
                             const GcnBlockParams& params, Activation act,
                             GcnBlockCache* cache = nullptr);

void gcn_block_backward(const std::vector<Eigen::MatrixXd>& adj_norm,
                        const std::vector<Eigen::MatrixXd>& tiled_adj,
                        const GcnBlockParams& params, const GcnBlockCache& cache,
                        const FeatureSeq& d_out, Activation act,
                        FeatureSeq& d_x, GcnBlockParams& d_params);

GcnBlockParams zero_like(const GcnBlockParams& p);
FeatureSeq zero_like(const FeatureSeq& x);

}  // namespace tepose
