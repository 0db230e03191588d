#include "tepose/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tepose {

namespace {

Eigen::MatrixXd init_matrix(int rows, int cols, Rng& rng) {
  const double a = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-a, a);
  }
  return m;
}

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
  return 1.0 / (1.0 + (-x).exp());
}

}  // namespace

GruCellParams make_gru_cell(int in_dim, int hidden, Rng& rng) {
  GruCellParams c;
  c.w = init_matrix(3 * hidden, in_dim, rng);
  c.u = init_matrix(3 * hidden, hidden, rng);
  c.b = Eigen::VectorXd::Zero(3 * hidden);
  return c;
}

GruCellParams zero_like(const GruCellParams& p) {
  GruCellParams z;
  z.w = Eigen::MatrixXd::Zero(p.w.rows(), p.w.cols());
  z.u = Eigen::MatrixXd::Zero(p.u.rows(), p.u.cols());
  z.b = Eigen::VectorXd::Zero(p.b.size());
  return z;
}

Eigen::VectorXd gru_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                         const GruCellParams& cell, GruCellCache* cache) {
  const int hd = cell.hidden();
  if (x.size() != cell.input() || h.size() != hd) {
    throw std::invalid_argument("gru_step: dimension mismatch");
  }
  Eigen::VectorXd pre = cell.w * x + cell.b;
  pre.head(2 * hd) += cell.u.topRows(2 * hd) * h;
  const Eigen::VectorXd z = sigmoid(pre.head(hd).array());
  const Eigen::VectorXd r = sigmoid(pre.segment(hd, hd).array());
  const Eigen::VectorXd rh = r.cwiseProduct(h);
  const Eigen::VectorXd n =
      (pre.tail(hd) + cell.u.bottomRows(hd) * rh).array().tanh();
  Eigen::VectorXd h_new =
      (1.0 - z.array()) * n.array() + z.array() * h.array();
  if (cache) {
    cache->x = x;
    cache->h_prev = h;
    cache->z = z;
    cache->r = r;
    cache->n = n;
    cache->h = h_new;
  }
  return h_new;
}

void gru_step_backward(const GruCellParams& cell, const GruCellCache& cache,
                       const Eigen::VectorXd& d_h, Eigen::VectorXd& d_x,
                       Eigen::VectorXd& d_h_prev, GruCellParams& grads) {
  const int hd = cell.hidden();
  const auto& z = cache.z;
  const auto& r = cache.r;
  const auto& n = cache.n;
  const auto& h = cache.h_prev;

  if (d_x.size() != cache.x.size()) d_x = Eigen::VectorXd::Zero(cache.x.size());
  if (d_h_prev.size() != hd) d_h_prev = Eigen::VectorXd::Zero(hd);

  const Eigen::VectorXd d_z =
      d_h.array() * (h.array() - n.array());
  const Eigen::VectorXd d_n = d_h.array() * (1.0 - z.array());
  d_h_prev.array() += d_h.array() * z.array();

  const Eigen::VectorXd d_an = d_n.array() * (1.0 - n.array().square());
  const Eigen::VectorXd d_rh = cell.u.bottomRows(hd).transpose() * d_an;
  const Eigen::VectorXd d_r = d_rh.cwiseProduct(h);
  d_h_prev.array() += d_rh.array() * r.array();

  const Eigen::VectorXd d_az =
      d_z.array() * z.array() * (1.0 - z.array());
  const Eigen::VectorXd d_ar =
      d_r.array() * r.array() * (1.0 - r.array());

  Eigen::VectorXd d_pre(3 * hd);
  d_pre << d_az, d_ar, d_an;

  grads.w.noalias() += d_pre * cache.x.transpose();
  grads.b += d_pre;
  grads.u.topRows(2 * hd).noalias() += d_pre.head(2 * hd) * h.transpose();
  grads.u.bottomRows(hd).noalias() +=
      d_an * (r.cwiseProduct(h)).transpose();

  d_x.noalias() += cell.w.transpose() * d_pre;
  d_h_prev.noalias() += cell.u.topRows(2 * hd).transpose() * d_pre.head(2 * hd);
}

EncoderParams make_encoder_params(int in_dim, int hidden, int layers,
                                  bool bidirectional, Rng& rng) {
  EncoderParams p;
  p.use_bidirectional = bidirectional;
  auto make_stack = [&](GruStackParams& s) {
    for (int l = 0; l < layers; ++l) {
      s.layers.push_back(make_gru_cell(l == 0 ? in_dim : hidden, hidden, rng));
    }
  };
  make_stack(p.uni);
  if (bidirectional) {
    make_stack(p.bi_fwd);
    make_stack(p.bi_bwd);
  }
  return p;
}

EncoderGrads EncoderGrads::zero_like(const EncoderParams& p) {
  EncoderGrads g;
  auto zero_stack = [](const GruStackParams& s) {
    GruStackParams z;
    for (const auto& c : s.layers) z.layers.push_back(tepose::zero_like(c));
    return z;
  };
  g.uni = zero_stack(p.uni);
  g.bi_fwd = zero_stack(p.bi_fwd);
  g.bi_bwd = zero_stack(p.bi_bwd);
  return g;
}

namespace {

// Runs a stack over the feature sequence in index order, returning the
// top-layer state after the last step. caches[layer][step].
Eigen::VectorXd run_stack(const GruStackParams& stack,
                          const std::vector<Eigen::VectorXd>& features,
                          std::vector<std::vector<GruCellCache>>* caches) {
  const int layers = static_cast<int>(stack.layers.size());
  const int frames = static_cast<int>(features.size());
  if (caches) {
    caches->assign(layers, std::vector<GruCellCache>(frames));
  }
  std::vector<Eigen::VectorXd> inputs = features;
  for (int l = 0; l < layers; ++l) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(stack.layers[l].hidden());
    for (int t = 0; t < frames; ++t) {
      h = gru_step(inputs[t], h, stack.layers[l],
                   caches ? &(*caches)[l][t] : nullptr);
      inputs[t] = h;
    }
  }
  return inputs.back();
}

void stack_backward(const GruStackParams& stack,
                    const std::vector<std::vector<GruCellCache>>& caches,
                    const Eigen::VectorXd& d_g, GruStackParams& grads,
                    std::vector<Eigen::VectorXd>* d_features) {
  const int layers = static_cast<int>(stack.layers.size());
  const int frames = static_cast<int>(caches.at(0).size());
  // d w.r.t. each layer's per-step output
  std::vector<Eigen::VectorXd> d_out(
      frames, Eigen::VectorXd::Zero(stack.layers.back().hidden()));
  d_out.back() = d_g;
  for (int l = layers - 1; l >= 0; --l) {
    std::vector<Eigen::VectorXd> d_in(frames);
    Eigen::VectorXd d_h = Eigen::VectorXd::Zero(stack.layers[l].hidden());
    for (int t = frames - 1; t >= 0; --t) {
      d_h += d_out[t];
      Eigen::VectorXd d_x, d_h_prev;
      gru_step_backward(stack.layers[l], caches[l][t], d_h, d_x, d_h_prev,
                        grads.layers[l]);
      d_in[t] = d_x;
      d_h = d_h_prev;
    }
    d_out = std::move(d_in);
  }
  if (d_features) {
    for (int t = 0; t < frames; ++t) (*d_features)[t] += d_out[t];
  }
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> encode(
    const std::vector<Eigen::VectorXd>& features, const EncoderParams& params,
    EncoderCache* cache) {
  if (features.empty()) throw std::invalid_argument("encode: empty sequence");
  Eigen::VectorXd g_uni =
      run_stack(params.uni, features, cache ? &cache->uni : nullptr);
  Eigen::VectorXd g_bi;
  if (params.use_bidirectional) {
    Eigen::VectorXd g_fwd =
        run_stack(params.bi_fwd, features, cache ? &cache->bi_fwd : nullptr);
    // The backward direction at the current (last) frame has consumed only
    // that frame, so a single step per layer suffices.
    const int layers = static_cast<int>(params.bi_bwd.layers.size());
    if (cache) cache->bi_bwd.resize(layers);
    Eigen::VectorXd in = features.back();
    for (int l = 0; l < layers; ++l) {
      Eigen::VectorXd h0 =
          Eigen::VectorXd::Zero(params.bi_bwd.layers[l].hidden());
      in = gru_step(in, h0, params.bi_bwd.layers[l],
                    cache ? &cache->bi_bwd[l] : nullptr);
    }
    g_bi = 0.5 * (g_fwd + in);
  }
  if (cache) {
    cache->g_uni = g_uni;
    cache->g_bi = g_bi;
  }
  return {g_uni, g_bi};
}

void encode_backward(const EncoderParams& params, const EncoderCache& cache,
                     const Eigen::VectorXd& d_g_uni,
                     const Eigen::VectorXd& d_g_bi, EncoderGrads& grads,
                     std::vector<Eigen::VectorXd>* d_features) {
  const int frames = static_cast<int>(cache.uni.at(0).size());
  if (d_features) {
    d_features->assign(frames,
                       Eigen::VectorXd::Zero(cache.uni[0][0].x.size()));
  }
  if (d_g_uni.size() > 0) {
    stack_backward(params.uni, cache.uni, d_g_uni, grads.uni, d_features);
  }
  if (params.use_bidirectional && d_g_bi.size() > 0) {
    stack_backward(params.bi_fwd, cache.bi_fwd, 0.5 * d_g_bi, grads.bi_fwd,
                   d_features);
    // backward-direction branch: single step per layer on the last frame
    const int layers = static_cast<int>(params.bi_bwd.layers.size());
    Eigen::VectorXd d_h = 0.5 * d_g_bi;
    for (int l = layers - 1; l >= 0; --l) {
      Eigen::VectorXd d_x, d_h_prev;
      gru_step_backward(params.bi_bwd.layers[l], cache.bi_bwd[l], d_h, d_x,
                        d_h_prev, grads.bi_bwd.layers[l]);
      d_h = d_x;
    }
    if (d_features) d_features->back() += d_h;
  }
}

RegressorParams make_regressor_params(int g_dim, int hidden, Rng& rng) {
  RegressorParams p;
  p.w1 = init_matrix(hidden, g_dim + kParamDim, rng);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2 = init_matrix(hidden, hidden, rng);
  p.b2 = Eigen::VectorXd::Zero(hidden);
  p.w3 = init_matrix(kParamDim, hidden, rng);
  p.b3 = Eigen::VectorXd::Zero(kParamDim);
  p.mean_params = mean_param_vector();
  return p;
}

RegressorGrads RegressorGrads::zero_like(const RegressorParams& p) {
  RegressorGrads g;
  g.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  g.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  g.w3 = Eigen::MatrixXd::Zero(p.w3.rows(), p.w3.cols());
  g.b1 = Eigen::VectorXd::Zero(p.b1.size());
  g.b2 = Eigen::VectorXd::Zero(p.b2.size());
  g.b3 = Eigen::VectorXd::Zero(p.b3.size());
  return g;
}

Eigen::VectorXd regress(const Eigen::VectorXd& g, const RegressorParams& params,
                        int n_iter, RegressorCache* cache) {
  if (n_iter < 1) throw std::invalid_argument("regress: n_iter must be >= 1");
  if (g.size() + kParamDim != params.w1.cols()) {
    throw std::invalid_argument("regress: hidden size mismatch");
  }
  Eigen::VectorXd theta = params.mean_params;
  if (cache) {
    cache->g = g;
    cache->theta.assign(1, theta);
    cache->h1.clear();
    cache->h2.clear();
  }
  Eigen::VectorXd in(params.w1.cols());
  for (int it = 0; it < n_iter; ++it) {
    in << g, theta;
    const Eigen::VectorXd h1 = (params.w1 * in + params.b1).array().tanh();
    const Eigen::VectorXd h2 = (params.w2 * h1 + params.b2).array().tanh();
    theta += params.w3 * h2 + params.b3;
    if (cache) {
      cache->h1.push_back(h1);
      cache->h2.push_back(h2);
      cache->theta.push_back(theta);
    }
  }
  return theta;
}

void regress_backward(const RegressorParams& params,
                      const RegressorCache& cache,
                      const Eigen::VectorXd& d_theta_out, Eigen::VectorXd& d_g,
                      RegressorGrads& grads) {
  const int n_iter = static_cast<int>(cache.h1.size());
  if (d_g.size() != cache.g.size()) {
    d_g = Eigen::VectorXd::Zero(cache.g.size());
  }
  Eigen::VectorXd d_theta = d_theta_out;
  for (int it = n_iter - 1; it >= 0; --it) {
    const Eigen::VectorXd& h1 = cache.h1[it];
    const Eigen::VectorXd& h2 = cache.h2[it];
    // theta_out = theta_in + w3 h2 + b3
    const Eigen::VectorXd d_r = d_theta;
    grads.w3.noalias() += d_r * h2.transpose();
    grads.b3 += d_r;
    Eigen::VectorXd d_h2 = params.w3.transpose() * d_r;
    Eigen::VectorXd d_a2 = d_h2.array() * (1.0 - h2.array().square());
    grads.w2.noalias() += d_a2 * h1.transpose();
    grads.b2 += d_a2;
    Eigen::VectorXd d_h1 = params.w2.transpose() * d_a2;
    Eigen::VectorXd d_a1 = d_h1.array() * (1.0 - h1.array().square());
    Eigen::VectorXd in(params.w1.cols());
    in << cache.g, cache.theta[it];
    grads.w1.noalias() += d_a1 * in.transpose();
    grads.b1 += d_a1;
    const Eigen::VectorXd d_in = params.w1.transpose() * d_a1;
    d_g += d_in.head(cache.g.size());
    d_theta += d_in.tail(kParamDim);  // pass-through plus feedback input
  }
}

std::vector<Eigen::VectorXd> build_input_features(
    const std::vector<Eigen::VectorXd>& static_feats,
    const std::vector<std::optional<Eigen::VectorXd>>& param_history) {
  if (static_feats.size() != param_history.size() + 1) {
    throw std::invalid_argument(
        "build_input_features: need one parameter source per past frame");
  }
  std::vector<Eigen::VectorXd> out(static_feats.size());
  for (std::size_t i = 0; i < static_feats.size(); ++i) {
    const auto f_dim = static_feats[i].size();
    out[i].resize(f_dim + kParamDim);
    out[i].head(f_dim) = static_feats[i];
    if (i + 1 == static_feats.size()) {
      out[i].tail(kParamDim).setZero();  // current frame: zeros, always
    } else {
      if (!param_history[i].has_value()) {
        throw std::invalid_argument(
            "build_input_features: missing parameter source for past frame");
      }
      if (param_history[i]->size() != kParamDim) {
        throw std::invalid_argument(
            "build_input_features: parameter slot must have 85 entries");
      }
      out[i].tail(kParamDim) = *param_history[i];
    }
  }
  return out;
}

FramePrediction predict_frame(const std::vector<Eigen::VectorXd>& features,
                              const EncoderParams& enc,
                              const RegressorParams& reg, int n_iter,
                              PredictMode mode) {
  auto [g_uni, g_bi] = encode(features, enc);
  FramePrediction out;
  if (!enc.use_bidirectional) {
    Eigen::VectorXd p = regress(g_uni, reg, n_iter);
    out.eval = p;
    if (mode == PredictMode::kTrain) out.train_uni = p;
    return out;
  }
  if (mode == PredictMode::kTrain) {
    out.train_uni = regress(g_uni, reg, n_iter);
    out.train_bi = regress(g_bi, reg, n_iter);
  }
  out.eval = regress(0.5 * (g_uni + g_bi), reg, n_iter);
  return out;
}

}  // namespace tepose
