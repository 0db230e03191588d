#include "tepose/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace tepose {

double gradcheck_rel_err(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / denom;
}

void probe_gradients(const GradProbe& probe, Rng& rng, int coords_per_tensor,
                     double step, double& max_rel_err, long& coords_checked) {
  if (probe.values.size() != probe.analytic.size()) {
    throw std::logic_error("probe_gradients: ref list mismatch");
  }
  for (std::size_t i = 0; i < probe.values.size(); ++i) {
    const auto& v = probe.values[i];
    const auto& a = probe.analytic[i];
    if (v.size != a.size) {
      throw std::logic_error("probe_gradients: shape mismatch at " + v.name);
    }
    const int n = static_cast<int>(
        std::min<std::ptrdiff_t>(coords_per_tensor, v.size));
    for (int c = 0; c < n; ++c) {
      const auto idx = rng.uniform_int(0, v.size - 1);
      const double orig = v.data[idx];
      v.data[idx] = orig + step;
      const double lp = probe.loss();
      v.data[idx] = orig - step;
      const double lm = probe.loss();
      v.data[idx] = orig;
      const double numeric = (lp - lm) / (2.0 * step);
      max_rel_err = std::max(max_rel_err,
                             gradcheck_rel_err(a.data[idx], numeric));
      ++coords_checked;
    }
  }
}

GradCheckResult run_instances(const std::string& name, int instances,
                              const InstanceFn& make, Rng& rng,
                              int coords_per_tensor, double step, double tol) {
  GradCheckResult r;
  r.name = name;
  for (int i = 0; i < instances; ++i) {
    GradProbe probe = make(rng);
    probe_gradients(probe, rng, coords_per_tensor, step, r.max_rel_err,
                    r.coords_checked);
  }
  r.pass = r.max_rel_err < tol;
  return r;
}

namespace {

SkeletonGraph random_tree(int n, Rng& rng) {
  SkeletonGraph g;
  g.num_joints = n;
  for (int i = 1; i < n; ++i) {
    g.edges.emplace_back(static_cast<int>(rng.uniform_int(0, i - 1)), i);
  }
  return g;
}

void fill(Eigen::MatrixXd& m, Rng& rng, double s = 1.0) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * rng.normal();
}
void fill(Eigen::VectorXd& v, Rng& rng, double s = 1.0) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = s * rng.normal();
}

void collect_block_refs(std::vector<TensorRef>& out, GcnBlockParams& b,
                        const std::string& prefix) {
  for (std::size_t k = 0; k < b.msgcn.weights.size(); ++k) {
    out.push_back({prefix + ".gcn" + std::to_string(k),
                   b.msgcn.weights[k].data(), b.msgcn.weights[k].size()});
  }
  for (std::size_t k = 0; k < b.msg3d.weights.size(); ++k) {
    out.push_back({prefix + ".g3d" + std::to_string(k),
                   b.msg3d.weights[k].data(), b.msg3d.weights[k].size()});
  }
  if (!b.identity_residual) {
    out.push_back({prefix + ".res", b.residual.data(), b.residual.size()});
  }
}

double min_abs_pre(const FeatureSeq& pre) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : pre) m = std::min(m, f.cwiseAbs().minCoeff());
  return m;
}

GradProbe make_msgcn(Rng& rng) {
  struct St {
    AdjacencySet adj;
    Eigen::MatrixXd x, c, d_x;
    MsGcnParams p, g;
  };
  auto st = std::make_shared<St>();
  const int n = 4 + static_cast<int>(rng.uniform_int(0, 3));
  st->adj = AdjacencySet::build(random_tree(n, rng), 2);
  st->p = make_msgcn_params(2, 3, 4, rng);
  st->x.resize(n, 3);
  st->c.resize(n, 4);
  fill(st->x, rng);
  fill(st->c, rng);
  st->g.weights.assign(st->p.weights.size(), Eigen::MatrixXd::Zero(3, 4));
  st->d_x = Eigen::MatrixXd::Zero(n, 3);
  msgcn_backward(st->x, st->adj.normalized, st->p, st->c, st->d_x, st->g);

  GradProbe probe;
  probe.loss = [st] {
    return (msgcn_forward(st->x, st->adj.normalized, st->p,
                          Activation::kIdentity)
                .cwiseProduct(st->c))
        .sum();
  };
  probe.values.push_back({"x", st->x.data(), st->x.size()});
  probe.analytic.push_back({"x", st->d_x.data(), st->d_x.size()});
  for (std::size_t k = 0; k < st->p.weights.size(); ++k) {
    probe.values.push_back({"w", st->p.weights[k].data(),
                            st->p.weights[k].size()});
    probe.analytic.push_back({"w", st->g.weights[k].data(),
                              st->g.weights[k].size()});
  }
  return probe;
}

GradProbe make_msg3d(Rng& rng) {
  struct St {
    SkeletonGraph graph;
    std::vector<Eigen::MatrixXd> tiled;
    FeatureSeq x, c, d_x;
    MsG3dParams p, g;
  };
  auto st = std::make_shared<St>();
  const int n = 4 + static_cast<int>(rng.uniform_int(0, 2));
  st->graph = random_tree(n, rng);
  const auto adj = AdjacencySet::build(st->graph, 2);
  for (const auto& a : adj.scales) {
    st->tiled.push_back(tile_adjacency(a, 3).matrix);
  }
  st->p = make_msg3d_params(2, 3, 4, 3, rng);
  for (int t = 0; t < 4; ++t) {
    Eigen::MatrixXd x(n, 3), c(n, 4);
    fill(x, rng);
    fill(c, rng);
    st->x.push_back(x);
    st->c.push_back(c);
  }
  st->g.weights.assign(st->p.weights.size(), Eigen::MatrixXd::Zero(3, 4));
  st->g.window = 3;
  st->d_x = zero_like(st->x);
  msg3d_backward(st->x, st->tiled, st->p, st->c, st->d_x, st->g);

  GradProbe probe;
  probe.loss = [st] {
    const auto y =
        msg3d_forward(st->x, st->tiled, st->p, Activation::kIdentity);
    double s = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      s += y[t].cwiseProduct(st->c[t]).sum();
    }
    return s;
  };
  for (std::size_t t = 0; t < st->x.size(); ++t) {
    probe.values.push_back({"x", st->x[t].data(), st->x[t].size()});
    probe.analytic.push_back({"x", st->d_x[t].data(), st->d_x[t].size()});
  }
  for (std::size_t k = 0; k < st->p.weights.size(); ++k) {
    probe.values.push_back({"w", st->p.weights[k].data(),
                            st->p.weights[k].size()});
    probe.analytic.push_back({"w", st->g.weights[k].data(),
                              st->g.weights[k].size()});
  }
  return probe;
}

GradProbe make_gcn_block(Rng& rng) {
  struct St {
    AdjacencySet adj;
    std::vector<Eigen::MatrixXd> tiled;
    FeatureSeq x, c, d_x;
    GcnBlockParams p, g;
    GcnBlockCache cache;
  };
  auto st = std::make_shared<St>();
  const int n = 5;
  const auto graph = random_tree(n, rng);
  st->adj = AdjacencySet::build(graph, 2);
  for (const auto& a : st->adj.scales) {
    st->tiled.push_back(tile_adjacency(a, 3).matrix);
  }
  st->p = make_gcn_block_params(2, 2, 3, 4, 3, rng);
  // resample the input until every ReLU pre-activation clears a margin,
  // keeping finite differences away from the kink
  for (int attempt = 0;; ++attempt) {
    st->x.clear();
    for (int t = 0; t < 3; ++t) {
      Eigen::MatrixXd x(n, 3);
      fill(x, rng);
      st->x.push_back(x);
    }
    st->cache = GcnBlockCache{};
    gcn_block_forward(st->x, st->adj.normalized, st->tiled, st->p,
                      Activation::kRelu, &st->cache);
    if (min_abs_pre(st->cache.pre) > 2e-3 || attempt > 200) break;
  }
  st->c.clear();
  for (int t = 0; t < 3; ++t) {
    Eigen::MatrixXd c(n, 4);
    fill(c, rng);
    st->c.push_back(c);
  }
  st->g = zero_like(st->p);
  st->d_x = zero_like(st->x);
  gcn_block_backward(st->adj.normalized, st->tiled, st->p, st->cache, st->c,
                     Activation::kRelu, st->d_x, st->g);

  GradProbe probe;
  probe.loss = [st] {
    const auto y = gcn_block_forward(st->x, st->adj.normalized, st->tiled,
                                     st->p, Activation::kRelu);
    double s = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      s += y[t].cwiseProduct(st->c[t]).sum();
    }
    return s;
  };
  for (std::size_t t = 0; t < st->x.size(); ++t) {
    probe.values.push_back({"x", st->x[t].data(), st->x[t].size()});
    probe.analytic.push_back({"x", st->d_x[t].data(), st->d_x[t].size()});
  }
  collect_block_refs(probe.values, st->p, "p");
  collect_block_refs(probe.analytic, st->g, "p");
  return probe;
}

GradProbe make_discriminator(Rng& rng) {
  struct St {
    DiscriminatorAdjacency adj;
    DiscriminatorParams p;
    DiscriminatorGrads g{};
    FeatureSeq x, d_x;
  };
  auto st = std::make_shared<St>();
  const int n = 6;
  const auto graph = random_tree(n, rng);
  st->adj = DiscriminatorAdjacency::build(graph, 2, 2, 3);
  st->p = make_discriminator_params({3, 4, 6, 8}, 2, 2, 3, 0, rng);
  DiscriminatorCache cache;
  for (int attempt = 0;; ++attempt) {
    st->x.clear();
    for (int t = 0; t < 4; ++t) {
      Eigen::MatrixXd x(n, 3);
      fill(x, rng);
      st->x.push_back(x);
    }
    cache = DiscriminatorCache{};
    discriminate(st->x, st->adj, st->p, &cache);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& b : cache.blocks) {
      margin = std::min(margin, min_abs_pre(b.pre));
    }
    if (margin > 2e-3 || attempt > 200) break;
  }
  st->g = DiscriminatorGrads::zero_like(st->p);
  discriminator_backward(st->adj, st->p, cache, 1.0, st->g, &st->d_x);

  GradProbe probe;
  probe.loss = [st] { return discriminate(st->x, st->adj, st->p); };
  for (std::size_t t = 0; t < st->x.size(); ++t) {
    probe.values.push_back({"x", st->x[t].data(), st->x[t].size()});
    probe.analytic.push_back({"x", st->d_x[t].data(), st->d_x[t].size()});
  }
  for (auto& r : collect_discriminator(st->p)) probe.values.push_back(r);
  for (auto& r : collect_discriminator_grads(st->g)) probe.analytic.push_back(r);
  return probe;
}

GradProbe make_gru_cell_probe(Rng& rng) {
  struct St {
    GruCellParams p, g;
    Eigen::VectorXd x, h, c, d_x, d_h;
  };
  auto st = std::make_shared<St>();
  st->p = make_gru_cell(5, 4, rng);
  st->x.resize(5);
  st->h.resize(4);
  st->c.resize(4);
  fill(st->x, rng);
  fill(st->h, rng);
  fill(st->c, rng);
  GruCellCache cache;
  gru_step(st->x, st->h, st->p, &cache);
  st->g = zero_like(st->p);
  st->d_x = Eigen::VectorXd::Zero(5);
  st->d_h = Eigen::VectorXd::Zero(4);
  gru_step_backward(st->p, cache, st->c, st->d_x, st->d_h, st->g);

  GradProbe probe;
  probe.loss = [st] { return gru_step(st->x, st->h, st->p).dot(st->c); };
  probe.values = {{"x", st->x.data(), st->x.size()},
                  {"h", st->h.data(), st->h.size()},
                  {"w", st->p.w.data(), st->p.w.size()},
                  {"u", st->p.u.data(), st->p.u.size()},
                  {"b", st->p.b.data(), st->p.b.size()}};
  probe.analytic = {{"x", st->d_x.data(), st->d_x.size()},
                    {"h", st->d_h.data(), st->d_h.size()},
                    {"w", st->g.w.data(), st->g.w.size()},
                    {"u", st->g.u.data(), st->g.u.size()},
                    {"b", st->g.b.data(), st->g.b.size()}};
  return probe;
}

GradProbe make_encoder(Rng& rng) {
  struct St {
    EncoderParams p;
    EncoderGrads g;
    std::vector<Eigen::VectorXd> feats, d_feats;
    Eigen::VectorXd cu, cb;
  };
  auto st = std::make_shared<St>();
  st->p = make_encoder_params(6, 4, 2, true, rng);
  for (int t = 0; t < 4; ++t) {
    Eigen::VectorXd f(6);
    fill(f, rng);
    st->feats.push_back(f);
  }
  st->cu.resize(4);
  st->cb.resize(4);
  fill(st->cu, rng);
  fill(st->cb, rng);
  EncoderCache cache;
  encode(st->feats, st->p, &cache);
  st->g = EncoderGrads::zero_like(st->p);
  encode_backward(st->p, cache, st->cu, st->cb, st->g, &st->d_feats);

  GradProbe probe;
  probe.loss = [st] {
    auto [gu, gb] = encode(st->feats, st->p);
    return gu.dot(st->cu) + gb.dot(st->cb);
  };
  for (std::size_t t = 0; t < st->feats.size(); ++t) {
    probe.values.push_back({"f", st->feats[t].data(), st->feats[t].size()});
    probe.analytic.push_back({"f", st->d_feats[t].data(),
                              st->d_feats[t].size()});
  }
  for (auto& r : collect_params(st->p.uni, "uni")) probe.values.push_back(r);
  for (auto& r : collect_params(st->p.bi_fwd, "bif")) probe.values.push_back(r);
  for (auto& r : collect_params(st->p.bi_bwd, "bib")) probe.values.push_back(r);
  for (auto& r : collect_params(st->g.uni, "uni")) probe.analytic.push_back(r);
  for (auto& r : collect_params(st->g.bi_fwd, "bif")) probe.analytic.push_back(r);
  for (auto& r : collect_params(st->g.bi_bwd, "bib")) probe.analytic.push_back(r);
  return probe;
}

GradProbe make_regressor(Rng& rng) {
  struct St {
    RegressorParams p;
    RegressorGrads g;
    Eigen::VectorXd x, c, d_g;
  };
  auto st = std::make_shared<St>();
  st->p = make_regressor_params(5, 6, rng);
  st->x.resize(5);
  st->c.resize(kParamDim);
  fill(st->x, rng);
  fill(st->c, rng);
  RegressorCache cache;
  regress(st->x, st->p, 2, &cache);
  st->g = RegressorGrads::zero_like(st->p);
  st->d_g = Eigen::VectorXd::Zero(5);
  regress_backward(st->p, cache, st->c, st->d_g, st->g);

  GradProbe probe;
  probe.loss = [st] { return regress(st->x, st->p, 2).dot(st->c); };
  probe.values = {{"g", st->x.data(), st->x.size()},
                  {"w1", st->p.w1.data(), st->p.w1.size()},
                  {"b1", st->p.b1.data(), st->p.b1.size()},
                  {"w2", st->p.w2.data(), st->p.w2.size()},
                  {"b2", st->p.b2.data(), st->p.b2.size()},
                  {"w3", st->p.w3.data(), st->p.w3.size()},
                  {"b3", st->p.b3.data(), st->p.b3.size()}};
  probe.analytic = {{"g", st->d_g.data(), st->d_g.size()},
                    {"w1", st->g.w1.data(), st->g.w1.size()},
                    {"b1", st->g.b1.data(), st->g.b1.size()},
                    {"w2", st->g.w2.data(), st->g.w2.size()},
                    {"b2", st->g.b2.data(), st->g.b2.size()},
                    {"w3", st->g.w3.data(), st->g.w3.size()},
                    {"b3", st->g.b3.data(), st->g.b3.size()}};
  return probe;
}

GradProbe make_fk_project(Rng& rng) {
  struct St {
    KinematicModel model = KinematicModel::default_model();
    Eigen::VectorXd theta, d_theta;
    Eigen::MatrixXd c_joints, c_proj;
  };
  auto st = std::make_shared<St>();
  st->theta.resize(kParamDim);
  fill(st->theta, rng, 0.4);
  st->theta[0] = 1.0 + 0.2 * rng.normal();  // camera scale away from zero
  const int n = st->model.num_joints();
  st->c_joints.resize(n, 3);
  st->c_proj.resize(n, 2);
  fill(st->c_joints, rng);
  fill(st->c_proj, rng);

  FkCache cache;
  const auto joints = fk_joints(param_pose(st->theta), param_shape(st->theta),
                                st->model, &cache);
  const Eigen::Vector3d cam = param_camera(st->theta);
  Eigen::MatrixXd d_joints = st->c_joints;
  Eigen::Vector3d d_cam = Eigen::Vector3d::Zero();
  Eigen::MatrixXd dj_from_proj = Eigen::MatrixXd::Zero(n, 3);
  project_2d_backward(joints, cam, st->c_proj, dj_from_proj, d_cam);
  d_joints += dj_from_proj;
  Eigen::VectorXd d_pose = Eigen::VectorXd::Zero(kPoseDim);
  Eigen::VectorXd d_shape = Eigen::VectorXd::Zero(kShapeDim);
  fk_backward(st->model, cache, d_joints, d_pose, d_shape);
  st->d_theta.resize(kParamDim);
  st->d_theta.head(kCameraDim) = d_cam;
  st->d_theta.segment(kCameraDim, kPoseDim) = d_pose;
  st->d_theta.tail(kShapeDim) = d_shape;

  GradProbe probe;
  probe.loss = [st] {
    const auto j = fk_joints(param_pose(st->theta), param_shape(st->theta),
                             st->model);
    const auto p = project_2d(j, param_camera(st->theta));
    return j.cwiseProduct(st->c_joints).sum() +
           p.cwiseProduct(st->c_proj).sum();
  };
  probe.values = {{"theta", st->theta.data(), st->theta.size()}};
  probe.analytic = {{"theta", st->d_theta.data(), st->d_theta.size()}};
  return probe;
}

GradProbe make_loss_mse(Rng& rng) {
  struct St {
    Eigen::MatrixXd pred, gt, grad;
  };
  auto st = std::make_shared<St>();
  st->pred.resize(6, 3);
  st->gt.resize(6, 3);
  fill(st->pred, rng);
  fill(st->gt, rng);
  st->grad = loss_mse_grad(st->pred, st->gt);

  GradProbe probe;
  probe.loss = [st] { return loss_mse(st->pred, st->gt); };
  probe.values = {{"pred", st->pred.data(), st->pred.size()}};
  probe.analytic = {{"pred", st->grad.data(), st->grad.size()}};
  return probe;
}

GradProbe make_loss_smpl(Rng& rng) {
  struct St {
    Eigen::VectorXd pred, gt, grad;
  };
  auto st = std::make_shared<St>();
  st->pred.resize(kParamDim);
  st->gt.resize(kParamDim);
  fill(st->pred, rng);
  fill(st->gt, rng);
  st->grad = loss_smpl_grad(st->pred, st->gt);

  GradProbe probe;
  probe.loss = [st] { return loss_smpl(st->pred, st->gt); };
  probe.values = {{"pred", st->pred.data(), st->pred.size()}};
  probe.analytic = {{"pred", st->grad.data(), st->grad.size()}};
  return probe;
}

GradProbe make_loss_adv(Rng& rng) {
  struct St {
    double score = 0.0, grad = 0.0;
  };
  auto st = std::make_shared<St>();
  st->score = rng.normal();
  st->grad = adversarial_loss_grad(st->score);

  GradProbe probe;
  probe.loss = [st] { return adversarial_loss(st->score); };
  probe.values = {{"score", &st->score, 1}};
  probe.analytic = {{"score", &st->grad, 1}};
  return probe;
}

GradProbe make_loss_disc(Rng& rng) {
  struct St {
    std::vector<double> real, fake, d_real, d_fake;
  };
  auto st = std::make_shared<St>();
  for (int i = 0; i < 3; ++i) st->real.push_back(rng.normal());
  for (int i = 0; i < 2; ++i) st->fake.push_back(rng.normal());
  discriminator_loss_grads(st->real, st->fake, st->d_real, st->d_fake);

  GradProbe probe;
  probe.loss = [st] { return discriminator_loss(st->real, st->fake); };
  probe.values = {
      {"real", st->real.data(), static_cast<std::ptrdiff_t>(st->real.size())},
      {"fake", st->fake.data(), static_cast<std::ptrdiff_t>(st->fake.size())}};
  probe.analytic = {{"real", st->d_real.data(),
                     static_cast<std::ptrdiff_t>(st->d_real.size())},
                    {"fake", st->d_fake.data(),
                     static_cast<std::ptrdiff_t>(st->d_fake.size())}};
  return probe;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suites(std::uint64_t seed,
                                                  int instances) {
  Rng rng(seed);
  std::vector<GradCheckResult> out;
  const std::vector<std::pair<std::string, InstanceFn>> suites = {
      {"msgcn", make_msgcn},
      {"msg3d", make_msg3d},
      {"gcn_block", make_gcn_block},
      {"discriminator", make_discriminator},
      {"gru_cell", make_gru_cell_probe},
      {"encoder", make_encoder},
      {"regressor", make_regressor},
      {"fk_project", make_fk_project},
      {"loss_mse", make_loss_mse},
      {"loss_smpl", make_loss_smpl},
      {"loss_adversarial", make_loss_adv},
      {"loss_discriminator", make_loss_disc},
  };
  for (const auto& [name, fn] : suites) {
    out.push_back(run_instances(name, instances, fn, rng));
  }
  return out;
}

}  // namespace tepose
