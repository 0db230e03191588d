#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "tepose/kinematics.hpp"
#include "tepose/rng.hpp"

namespace tepose {

// Gate layout in the stacked matrices: [update z | reset r | candidate n].
struct GruCellParams {
  Eigen::MatrixXd w;  // 3h x in
  Eigen::MatrixXd u;  // 3h x h
  Eigen::VectorXd b;  // 3h

  int hidden() const { return static_cast<int>(u.cols()); }
  int input() const { return static_cast<int>(w.cols()); }
};

GruCellParams make_gru_cell(int in_dim, int hidden, Rng& rng);
GruCellParams zero_like(const GruCellParams& p);

struct GruCellCache {
  Eigen::VectorXd x, h_prev, z, r, n, h;
};

// z = sigmoid(Wz x + Uz h + bz); r likewise; n = tanh(Wn x + Un (r*h) + bn);
// h' = (1 - z) * n + z * h.
Eigen::VectorXd gru_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                         const GruCellParams& cell,
                         GruCellCache* cache = nullptr);

void gru_step_backward(const GruCellParams& cell, const GruCellCache& cache,
                       const Eigen::VectorXd& d_h, Eigen::VectorXd& d_x,
                       Eigen::VectorXd& d_h_prev, GruCellParams& grads);

struct GruStackParams {
  std::vector<GruCellParams> layers;
};

struct EncoderParams {
  GruStackParams uni;     // runs over the full window, last state is g_uni
  GruStackParams bi_fwd;  // forward direction of the bidirectional branch
  GruStackParams bi_bwd;  // backward direction; at the current frame it has
                          // consumed only that frame
  bool use_bidirectional = true;

  int hidden() const { return uni.layers.back().hidden(); }
};

EncoderParams make_encoder_params(int in_dim, int hidden, int layers,
                                  bool bidirectional, Rng& rng);

struct EncoderGrads {
  GruStackParams uni, bi_fwd, bi_bwd;

  static EncoderGrads zero_like(const EncoderParams& p);
};

struct EncoderCache {
  std::vector<std::vector<GruCellCache>> uni;     // [layer][frame]
  std::vector<std::vector<GruCellCache>> bi_fwd;  // [layer][frame]
  std::vector<GruCellCache> bi_bwd;               // [layer], current frame only
  Eigen::VectorXd g_uni, g_bi;
};

// Runs both encoders over the window; g_uni is the uni-directional stack's
// last top-layer state, g_bi averages the bidirectional branch's two
// directions at the current frame. Initial states are zero.
std::pair<Eigen::VectorXd, Eigen::VectorXd> encode(
    const std::vector<Eigen::VectorXd>& features, const EncoderParams& params,
    EncoderCache* cache = nullptr);

void encode_backward(const EncoderParams& params, const EncoderCache& cache,
                     const Eigen::VectorXd& d_g_uni,
                     const Eigen::VectorXd& d_g_bi, EncoderGrads& grads,
                     std::vector<Eigen::VectorXd>* d_features = nullptr);

struct RegressorParams {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
  Eigen::VectorXd mean_params;  // not trainable

  int hidden() const { return static_cast<int>(w1.rows()); }
};

RegressorParams make_regressor_params(int g_dim, int hidden, Rng& rng);

struct RegressorGrads {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static RegressorGrads zero_like(const RegressorParams& p);
};

struct RegressorCache {
  Eigen::VectorXd g;
  std::vector<Eigen::VectorXd> theta;  // n_iter + 1 entries, theta[0] = mean
  std::vector<Eigen::VectorXd> h1, h2;
};

// Iterative error feedback from the mean parameters.
Eigen::VectorXd regress(const Eigen::VectorXd& g, const RegressorParams& params,
                        int n_iter, RegressorCache* cache = nullptr);

void regress_backward(const RegressorParams& params,
                      const RegressorCache& cache,
                      const Eigen::VectorXd& d_theta, Eigen::VectorXd& d_g,
                      RegressorGrads& grads);

// Concatenates per-frame static features with the designated parameter
// slot; the current (last) frame always gets zeros.
std::vector<Eigen::VectorXd> build_input_features(
    const std::vector<Eigen::VectorXd>& static_feats,
    const std::vector<std::optional<Eigen::VectorXd>>& param_history);

struct FramePrediction {
  Eigen::VectorXd eval;              // eval-mode prediction
  Eigen::VectorXd train_uni;         // per-branch predictions (train mode)
  Eigen::VectorXd train_bi;
};

enum class PredictMode { kTrain, kEval };

// Train mode regresses from each GRU branch separately; eval mode averages
// the hidden states first so the prediction is unique.
FramePrediction predict_frame(const std::vector<Eigen::VectorXd>& features,
                              const EncoderParams& enc,
                              const RegressorParams& reg, int n_iter,
                              PredictMode mode);

}  // namespace tepose
