#include "tepose/gcn.hpp"

#include <cmath>
#include <stdexcept>

namespace tepose {

namespace {

Eigen::MatrixXd init_weight(int rows, int cols, Rng& rng) {
  // uniform fan-based init, a = sqrt(6 / (C + C'))
  const double a = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-a, a);
  }
  return w;
}

void check_scales(std::size_t adj, std::size_t weights, const char* who) {
  if (adj != weights) {
    throw std::invalid_argument(std::string(who) +
                                ": adjacency/weight scale count mismatch");
  }
}

}  // namespace

MsGcnParams make_msgcn_params(int scales, int c_in, int c_out, Rng& rng) {
  MsGcnParams p;
  for (int k = 0; k <= scales; ++k) p.weights.push_back(init_weight(c_in, c_out, rng));
  return p;
}

MsG3dParams make_msg3d_params(int scales, int c_in, int c_out, int tau,
                              Rng& rng) {
  if (tau % 2 == 0) throw std::invalid_argument("msg3d: tau must be odd");
  MsG3dParams p;
  p.window = tau;
  for (int k = 0; k <= scales; ++k) p.weights.push_back(init_weight(c_in, c_out, rng));
  return p;
}

GcnBlockParams make_gcn_block_params(int gcn_scales, int g3d_scales, int c_in,
                                     int c_out, int tau, Rng& rng) {
  GcnBlockParams p;
  p.msgcn = make_msgcn_params(gcn_scales, c_in, c_out, rng);
  p.msg3d = make_msg3d_params(g3d_scales, c_in, c_out, tau, rng);
  p.identity_residual = (c_in == c_out);
  if (!p.identity_residual) p.residual = init_weight(c_in, c_out, rng);
  return p;
}

Eigen::MatrixXd msgcn_forward(const Eigen::MatrixXd& x,
                              const std::vector<Eigen::MatrixXd>& adj_norm,
                              const MsGcnParams& params, Activation act,
                              Eigen::MatrixXd* pre_out) {
  check_scales(adj_norm.size(), params.weights.size(), "msgcn_forward");
  if (x.rows() != adj_norm.at(0).rows() ||
      x.cols() != params.weights.at(0).rows()) {
    throw std::invalid_argument("msgcn_forward: dimension mismatch");
  }
  Eigen::MatrixXd pre =
      Eigen::MatrixXd::Zero(x.rows(), params.weights[0].cols());
  for (std::size_t k = 0; k < adj_norm.size(); ++k) {
    pre.noalias() += adj_norm[k] * x * params.weights[k];
  }
  if (pre_out) *pre_out = pre;
  return apply_activation(pre, act);
}

void msgcn_backward(const Eigen::MatrixXd& x,
                    const std::vector<Eigen::MatrixXd>& adj_norm,
                    const MsGcnParams& params, const Eigen::MatrixXd& d_pre,
                    Eigen::MatrixXd& d_x, MsGcnParams& d_params) {
  check_scales(adj_norm.size(), params.weights.size(), "msgcn_backward");
  if (d_x.rows() != x.rows() || d_x.cols() != x.cols()) {
    d_x = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  }
  if (d_params.weights.size() != params.weights.size()) {
    d_params.weights.assign(params.weights.size(), Eigen::MatrixXd());
  }
  for (std::size_t k = 0; k < adj_norm.size(); ++k) {
    if (d_params.weights[k].size() == 0) {
      d_params.weights[k] = Eigen::MatrixXd::Zero(params.weights[k].rows(),
                                                  params.weights[k].cols());
    }
    const Eigen::MatrixXd ax = adj_norm[k] * x;
    d_params.weights[k].noalias() += ax.transpose() * d_pre;
    d_x.noalias() += adj_norm[k].transpose() * d_pre *
                     params.weights[k].transpose();
  }
}

FeatureSeq msg3d_forward(const FeatureSeq& x,
                         const std::vector<Eigen::MatrixXd>& tiled_adj,
                         const MsG3dParams& params, Activation act,
                         FeatureSeq* pre_out) {
  check_scales(tiled_adj.size(), params.weights.size(), "msg3d_forward");
  const int tau = params.window;
  if (tau % 2 == 0) throw std::invalid_argument("msg3d_forward: tau must be odd");
  const int frames = static_cast<int>(x.size());
  const int n = static_cast<int>(x.at(0).rows());
  const int c_in = static_cast<int>(x.at(0).cols());
  if (tiled_adj.at(0).rows() != static_cast<Eigen::Index>(tau) * n) {
    throw std::invalid_argument("msg3d_forward: tiled adjacency size mismatch");
  }
  const int half = tau / 2;
  const int c_out = static_cast<int>(params.weights.at(0).cols());

  FeatureSeq out(frames);
  if (pre_out) pre_out->assign(frames, Eigen::MatrixXd());
  Eigen::MatrixXd window(tau * n, c_in);
  for (int t = 0; t < frames; ++t) {
    window.setZero();
    for (int d = -half; d <= half; ++d) {
      const int src = t + d;
      if (src >= 0 && src < frames) {
        window.middleRows((d + half) * n, n) = x[src];
      }
    }
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(tau * n, c_out);
    for (std::size_t k = 0; k < tiled_adj.size(); ++k) {
      y.noalias() += tiled_adj[k] * window * params.weights[k];
    }
    Eigen::MatrixXd pre = y.middleRows(half * n, n);
    if (pre_out) (*pre_out)[t] = pre;
    out[t] = apply_activation(pre, act);
  }
  return out;
}

void msg3d_backward(const FeatureSeq& x,
                    const std::vector<Eigen::MatrixXd>& tiled_adj,
                    const MsG3dParams& params, const FeatureSeq& d_pre,
                    FeatureSeq& d_x, MsG3dParams& d_params) {
  check_scales(tiled_adj.size(), params.weights.size(), "msg3d_backward");
  const int tau = params.window;
  const int half = tau / 2;
  const int frames = static_cast<int>(x.size());
  const int n = static_cast<int>(x.at(0).rows());
  const int c_in = static_cast<int>(x.at(0).cols());
  const int c_out = static_cast<int>(params.weights.at(0).cols());

  if (d_x.size() != x.size()) d_x = zero_like(x);
  if (d_params.weights.size() != params.weights.size()) {
    d_params.weights.assign(params.weights.size(), Eigen::MatrixXd());
  }
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    if (d_params.weights[k].size() == 0) {
      d_params.weights[k] = Eigen::MatrixXd::Zero(c_in, c_out);
    }
  }
  d_params.window = tau;

  Eigen::MatrixXd window(tau * n, c_in);
  Eigen::MatrixXd dy(tau * n, c_out);
  for (int t = 0; t < frames; ++t) {
    window.setZero();
    for (int d = -half; d <= half; ++d) {
      const int src = t + d;
      if (src >= 0 && src < frames) {
        window.middleRows((d + half) * n, n) = x[src];
      }
    }
    // only the center block of y reaches the output
    dy.setZero();
    dy.middleRows(half * n, n) = d_pre[t];
    Eigen::MatrixXd d_window = Eigen::MatrixXd::Zero(tau * n, c_in);
    for (std::size_t k = 0; k < tiled_adj.size(); ++k) {
      const Eigen::MatrixXd aw = tiled_adj[k] * window;
      d_params.weights[k].noalias() += aw.transpose() * dy;
      d_window.noalias() +=
          tiled_adj[k].transpose() * dy * params.weights[k].transpose();
    }
    for (int d = -half; d <= half; ++d) {
      const int src = t + d;
      if (src >= 0 && src < frames) {
        d_x[src] += d_window.middleRows((d + half) * n, n);
      }
    }
  }
}

FeatureSeq gcn_block_forward(const FeatureSeq& x,
                             const std::vector<Eigen::MatrixXd>& adj_norm,
                             const std::vector<Eigen::MatrixXd>& tiled_adj,
                             const GcnBlockParams& params, Activation act,
                             GcnBlockCache* cache) {
  const int frames = static_cast<int>(x.size());
  FeatureSeq g3d = msg3d_forward(x, tiled_adj, params.msg3d,
                                 Activation::kIdentity);
  FeatureSeq pre(frames);
  for (int t = 0; t < frames; ++t) {
    pre[t] = msgcn_forward(x[t], adj_norm, params.msgcn, Activation::kIdentity);
    pre[t] += g3d[t];
    if (params.identity_residual) {
      if (x[t].cols() != pre[t].cols()) {
        throw std::invalid_argument(
            "gcn_block_forward: identity residual needs C == C'");
      }
      pre[t] += x[t];
    } else {
      pre[t].noalias() += x[t] * params.residual;
    }
  }
  FeatureSeq out(frames);
  for (int t = 0; t < frames; ++t) out[t] = apply_activation(pre[t], act);
  if (cache) {
    cache->input = x;
    cache->pre = pre;
  }
  return out;
}

void gcn_block_backward(const std::vector<Eigen::MatrixXd>& adj_norm,
                        const std::vector<Eigen::MatrixXd>& tiled_adj,
                        const GcnBlockParams& params, const GcnBlockCache& cache,
                        const FeatureSeq& d_out, Activation act,
                        FeatureSeq& d_x, GcnBlockParams& d_params) {
  const int frames = static_cast<int>(cache.input.size());
  FeatureSeq d_pre(frames);
  for (int t = 0; t < frames; ++t) {
    d_pre[t] = activation_backward(cache.pre[t], d_out[t], act);
  }
  if (d_x.size() != cache.input.size()) d_x = zero_like(cache.input);
  if (!params.identity_residual && d_params.residual.size() == 0) {
    d_params.residual =
        Eigen::MatrixXd::Zero(params.residual.rows(), params.residual.cols());
  }
  d_params.identity_residual = params.identity_residual;
  for (int t = 0; t < frames; ++t) {
    msgcn_backward(cache.input[t], adj_norm, params.msgcn, d_pre[t], d_x[t],
                   d_params.msgcn);
    if (params.identity_residual) {
      d_x[t] += d_pre[t];
    } else {
      d_params.residual.noalias() += cache.input[t].transpose() * d_pre[t];
      d_x[t].noalias() += d_pre[t] * params.residual.transpose();
    }
  }
  msg3d_backward(cache.input, tiled_adj, params.msg3d, d_pre, d_x,
                 d_params.msg3d);
}

GcnBlockParams zero_like(const GcnBlockParams& p) {
  GcnBlockParams z;
  for (const auto& w : p.msgcn.weights) {
    z.msgcn.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& w : p.msg3d.weights) {
    z.msg3d.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  z.msg3d.window = p.msg3d.window;
  z.identity_residual = p.identity_residual;
  if (!p.identity_residual) {
    z.residual = Eigen::MatrixXd::Zero(p.residual.rows(), p.residual.cols());
  }
  return z;
}

FeatureSeq zero_like(const FeatureSeq& x) {
  FeatureSeq z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = Eigen::MatrixXd::Zero(x[i].rows(), x[i].cols());
  }
  return z;
}

}  // namespace tepose
