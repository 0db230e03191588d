#include "tepose/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace tepose {

namespace {

void add_ref(std::vector<TensorRef>& out, const std::string& name,
             Eigen::MatrixXd& m) {
  out.push_back({name, m.data(), m.size()});
}
void add_ref(std::vector<TensorRef>& out, const std::string& name,
             Eigen::VectorXd& v) {
  out.push_back({name, v.data(), v.size()});
}

void collect_block(std::vector<TensorRef>& out, GcnBlockParams& b,
                   const std::string& prefix) {
  for (std::size_t k = 0; k < b.msgcn.weights.size(); ++k) {
    add_ref(out, prefix + ".gcn.w" + std::to_string(k), b.msgcn.weights[k]);
  }
  for (std::size_t k = 0; k < b.msg3d.weights.size(); ++k) {
    add_ref(out, prefix + ".g3d.w" + std::to_string(k), b.msg3d.weights[k]);
  }
  if (!b.identity_residual) add_ref(out, prefix + ".res", b.residual);
}

}  // namespace

std::vector<TensorRef> collect_params(GruStackParams& s,
                                      const std::string& prefix) {
  std::vector<TensorRef> out;
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const std::string p = prefix + ".l" + std::to_string(l);
    add_ref(out, p + ".w", s.layers[l].w);
    add_ref(out, p + ".u", s.layers[l].u);
    add_ref(out, p + ".b", s.layers[l].b);
  }
  return out;
}

namespace {

template <class Enc, class Reg>
std::vector<TensorRef> collect_predictor_impl(Enc& enc, Reg& reg) {
  std::vector<TensorRef> out = collect_params(enc.uni, "enc.uni");
  auto append = [&](std::vector<TensorRef> more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  append(collect_params(enc.bi_fwd, "enc.bif"));
  append(collect_params(enc.bi_bwd, "enc.bib"));
  add_ref(out, "reg.w1", reg.w1);
  add_ref(out, "reg.b1", reg.b1);
  add_ref(out, "reg.w2", reg.w2);
  add_ref(out, "reg.b2", reg.b2);
  add_ref(out, "reg.w3", reg.w3);
  add_ref(out, "reg.b3", reg.b3);
  return out;
}

}  // namespace

std::vector<TensorRef> collect_predictor(EncoderParams& enc,
                                         RegressorParams& reg) {
  return collect_predictor_impl(enc, reg);
}

std::vector<TensorRef> collect_predictor_grads(EncoderGrads& enc,
                                               RegressorGrads& reg) {
  return collect_predictor_impl(enc, reg);
}

std::vector<TensorRef> collect_discriminator(DiscriminatorParams& p) {
  std::vector<TensorRef> out;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    collect_block(out, p.blocks[b], "disc.b" + std::to_string(b));
  }
  add_ref(out, "disc.head_w", p.head_w);
  out.push_back({"disc.head_b", &p.head_b, 1});
  return out;
}

std::vector<TensorRef> collect_discriminator_grads(DiscriminatorGrads& g) {
  std::vector<TensorRef> out;
  for (std::size_t b = 0; b < g.blocks.size(); ++b) {
    collect_block(out, g.blocks[b], "disc.b" + std::to_string(b));
  }
  add_ref(out, "disc.head_w", g.head_w);
  out.push_back({"disc.head_b", &g.head_b, 1});
  return out;
}

void Adam::step(const std::vector<TensorRef>& params,
                const std::vector<TensorRef>& grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("Adam: param/grad list mismatch");
  }
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].size, 0.0);
      v_[i].assign(params[i].size, 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != grads[i].size) {
      throw std::invalid_argument("Adam: tensor size mismatch at " +
                                  params[i].name);
    }
    double* p = params[i].data;
    const double* g = grads[i].data;
    for (std::ptrdiff_t j = 0; j < params[i].size; ++j) {
      if (!std::isfinite(g[j])) {
        throw NumericalError("non-finite gradient in " + params[i].name);
      }
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::save(TensorArchive& a, const std::string& prefix) const {
  a.put_scalar(prefix + ".lr", lr_);
  a.put_scalar(prefix + ".t", static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    Tensor tm, tv;
    tm.dims = {m_[i].size()};
    tm.data = m_[i];
    tv.dims = {v_[i].size()};
    tv.data = v_[i];
    a.tensors[prefix + ".m" + std::to_string(i)] = std::move(tm);
    a.tensors[prefix + ".v" + std::to_string(i)] = std::move(tv);
  }
  a.put_scalar(prefix + ".count", static_cast<double>(m_.size()));
}

void Adam::load(const TensorArchive& a, const std::string& prefix,
                const std::vector<TensorRef>& params) {
  lr_ = a.get_scalar(prefix + ".lr");
  t_ = static_cast<long>(a.get_scalar(prefix + ".t"));
  const auto count = static_cast<std::size_t>(a.get_scalar(prefix + ".count"));
  m_.resize(count);
  v_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    m_[i] = a.tensors.at(prefix + ".m" + std::to_string(i)).data;
    v_[i] = a.tensors.at(prefix + ".v" + std::to_string(i)).data;
    if (i < params.size() &&
        static_cast<std::ptrdiff_t>(m_[i].size()) != params[i].size) {
      throw std::runtime_error("Adam: checkpoint moment shape mismatch");
    }
  }
}

Model build_model(const RunConfig& cfg, Rng& rng) {
  cfg.validate();
  Model m;
  m.body = KinematicModel::default_model();
  const int in_dim = cfg.feature_dim + kParamDim;
  m.enc = make_encoder_params(in_dim, cfg.hidden, cfg.gru_layers,
                              cfg.bidirectional, rng);
  m.reg = make_regressor_params(cfg.hidden, cfg.regressor_hidden, rng);
  m.disc = make_discriminator_params(cfg.disc_channels, cfg.gcn_scales,
                                     cfg.g3d_scales, cfg.tau, m.body.root, rng);
  m.adj = DiscriminatorAdjacency::build(m.body.skeleton, cfg.gcn_scales,
                                        cfg.g3d_scales, cfg.tau);
  return m;
}

void save_checkpoint(const std::string& path, Model& model, const Adam& opt_p,
                     const Adam& opt_d, const Rng& rng, long iteration) {
  TensorArchive a;
  a.put_scalar("iteration", static_cast<double>(iteration));
  a.strings["rng"] = rng.save_state();
  for (const auto& ref : collect_predictor(model.enc, model.reg)) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(ref.size)};
    t.data.assign(ref.data, ref.data + ref.size);
    a.tensors["p." + ref.name] = std::move(t);
  }
  for (const auto& ref : collect_discriminator(model.disc)) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(ref.size)};
    t.data.assign(ref.data, ref.data + ref.size);
    a.tensors["p." + ref.name] = std::move(t);
  }
  opt_p.save(a, "opt_p");
  opt_d.save(a, "opt_d");
  a.save(path);
}

long load_checkpoint(const std::string& path, Model& model, Adam* opt_p,
                     Adam* opt_d, Rng* rng) {
  TensorArchive a = TensorArchive::load(path);
  auto restore = [&](const std::vector<TensorRef>& refs) {
    for (const auto& ref : refs) {
      const auto& t = a.tensors.at("p." + ref.name);
      if (static_cast<std::ptrdiff_t>(t.data.size()) != ref.size) {
        throw std::runtime_error("checkpoint: shape mismatch for " + ref.name);
      }
      std::copy(t.data.begin(), t.data.end(), ref.data);
    }
  };
  restore(collect_predictor(model.enc, model.reg));
  restore(collect_discriminator(model.disc));
  if (opt_p) opt_p->load(a, "opt_p", collect_predictor(model.enc, model.reg));
  if (opt_d) opt_d->load(a, "opt_d", collect_discriminator(model.disc));
  if (rng) rng->load_state(a.strings.at("rng"));
  return static_cast<long>(a.get_scalar("iteration"));
}

StreamPredictor::StreamPredictor(const EncoderParams& enc,
                                 const RegressorParams& reg, int past_frames,
                                 int n_iter, bool feedback)
    : enc_(enc),
      reg_(reg),
      past_frames_(past_frames),
      n_iter_(n_iter),
      feedback_(feedback) {}

void StreamPredictor::warm_start(const std::vector<Eigen::VectorXd>& params) {
  if (static_cast<int>(params.size()) != past_frames_) {
    throw std::invalid_argument("warm_start: need exactly T parameter sets");
  }
  params_.assign(params.begin(), params.end());
}

std::optional<Eigen::VectorXd> StreamPredictor::push_frame(
    const Eigen::VectorXd& static_feat) {
  feats_.push_back(static_feat);
  if (static_cast<int>(feats_.size()) > past_frames_ + 1) feats_.pop_front();
  const long t = next_frame_++;
  if (t < past_frames_) return std::nullopt;
  if (static_cast<int>(params_.size()) != past_frames_) {
    throw std::runtime_error("StreamPredictor: warm start missing");
  }
  std::vector<Eigen::VectorXd> window(feats_.begin(), feats_.end());
  std::vector<std::optional<Eigen::VectorXd>> hist(past_frames_);
  for (int f = 0; f < past_frames_; ++f) {
    hist[f] = feedback_ ? params_[f]
                        : Eigen::VectorXd::Zero(kParamDim).eval();
  }
  const auto feats = build_input_features(window, hist);
  const FramePrediction pred =
      predict_frame(feats, enc_, reg_, n_iter_, PredictMode::kEval);
  params_.push_back(pred.eval);
  params_.pop_front();
  return pred.eval;
}

std::vector<Eigen::VectorXd> predict_video(const Model& model,
                                           const RunConfig& cfg,
                                           const VideoRecord& video) {
  const int past = cfg.past_frames();
  StreamPredictor sp(model.enc, model.reg, past, cfg.n_iter, cfg.feedback);
  std::vector<Eigen::VectorXd> warm(past);
  for (int f = 0; f < past; ++f) {
    warm[f] = video.gt_params.empty() ? mean_param_vector()
                                      : video.gt_params[f];
  }
  sp.warm_start(warm);
  std::vector<Eigen::VectorXd> preds;
  for (int t = 0; t < video.length; ++t) {
    auto p = sp.push_frame(video.static_feats[t]);
    if (p) preds.push_back(std::move(*p));
  }
  return preds;
}

namespace {

constexpr double kMetersToMm = 1000.0;

EvalResult metrics_from_predictions(
    const Model& model, const RunConfig& cfg, const VideoRecord& video,
    const std::vector<Eigen::VectorXd>& preds, EvalResult& accum) {
  const int past = cfg.past_frames();
  JointSequence ps, gs;
  ps.root_joint = model.body.root;
  gs.root_joint = model.body.root;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int t = past + static_cast<int>(i);
    ps.frames.push_back(kMetersToMm *
                        fk_joints(param_pose(preds[i]), param_shape(preds[i]),
                                  model.body));
    gs.frames.push_back(kMetersToMm * video.gt_joints3d.at(t));
  }
  accum.mpjpe_mm += mpjpe(ps, gs);
  accum.pa_mpjpe_mm += pa_mpjpe(ps, gs);
  if (ps.num_frames() >= 3) accum.accel_mm += accel_error(ps, gs);
  accum.videos += 1;
  return accum;
}

void finish_eval(EvalResult& r) {
  if (r.videos > 0) {
    r.mpjpe_mm /= r.videos;
    r.pa_mpjpe_mm /= r.videos;
    r.accel_mm /= r.videos;
  }
}

}  // namespace

EvalResult evaluate_model(const Model& model, const RunConfig& cfg,
                          const std::vector<VideoRecord>& videos) {
  EvalResult r;
  for (const auto& v : videos) {
    if (v.gt_joints3d.empty()) continue;
    const auto preds = predict_video(model, cfg, v);
    metrics_from_predictions(model, cfg, v, preds, r);
  }
  finish_eval(r);
  return r;
}

EvalResult evaluate_mean_baseline(const Model& model, const RunConfig& cfg,
                                  const std::vector<VideoRecord>& videos) {
  EvalResult r;
  for (const auto& v : videos) {
    if (v.gt_joints3d.empty()) continue;
    std::vector<Eigen::VectorXd> preds(v.length - cfg.past_frames(),
                                       mean_param_vector());
    metrics_from_predictions(model, cfg, v, preds, r);
  }
  finish_eval(r);
  return r;
}

namespace {

struct PredictorGrads {
  EncoderGrads enc;
  RegressorGrads reg;
};

struct ItemOutcome {
  LossBreakdown sum;        // summed over branches
  Eigen::VectorXd eval_pred;
  FeatureSeq window_joints;  // past cached joints + eval-pred current frame
  bool has_window = false;
};

// Loss and gradients for one regression branch; accumulates d_g for the
// encoder backward pass.
LossBreakdown branch_losses(const Model& model, const RunConfig& cfg,
                            const VideoRecord& video, int frame,
                            const Eigen::VectorXd& g,
                            const FeatureSeq* past_joints,
                            PredictorGrads& grads, Eigen::VectorXd& d_g) {
  RegressorCache rc;
  const Eigen::VectorXd theta = regress(g, model.reg, cfg.n_iter, &rc);
  FkCache fk;
  const Eigen::MatrixXd joints =
      fk_joints(param_pose(theta), param_shape(theta), model.body, &fk);
  const Eigen::Vector3d camera = param_camera(theta);
  const Eigen::MatrixXd proj = project_2d(joints, camera);

  const bool use_adv = cfg.adversarial && !video.flags.has_smpl;
  std::optional<double> l3d, ltheta, ladv;
  const double l2d = loss_2d(proj, video.gt_joints2d.at(frame));
  if (video.flags.has_3d) l3d = loss_3d(joints, video.gt_joints3d.at(frame));
  if (video.flags.has_smpl) ltheta = loss_smpl(theta, video.gt_params.at(frame));

  Eigen::MatrixXd d_joints = Eigen::MatrixXd::Zero(joints.rows(), 3);
  Eigen::Vector3d d_camera = Eigen::Vector3d::Zero();
  Eigen::VectorXd d_theta = Eigen::VectorXd::Zero(kParamDim);

  project_2d_backward(joints, camera, loss_mse_grad(proj, video.gt_joints2d.at(frame)),
                      d_joints, d_camera);
  if (video.flags.has_3d) {
    d_joints += loss_mse_grad(joints, video.gt_joints3d.at(frame));
  }
  if (video.flags.has_smpl) {
    d_theta += loss_smpl_grad(theta, video.gt_params.at(frame));
  }
  if (use_adv) {
    if (!past_joints) {
      throw std::runtime_error("branch_losses: adversarial window missing");
    }
    FeatureSeq window = *past_joints;
    window.push_back(joints);
    DiscriminatorCache dc;
    const double score = discriminate(window, model.adj, model.disc, &dc);
    ladv = adversarial_loss(score);
    DiscriminatorGrads scratch = DiscriminatorGrads::zero_like(model.disc);
    FeatureSeq d_window;
    discriminator_backward(model.adj, model.disc, dc,
                           adversarial_loss_grad(score), scratch, &d_window);
    d_joints += d_window.back();
  } else if (!video.flags.has_smpl) {
    ladv = 0.0;  // adversarial disabled by config: gate contributes nothing
  }

  Eigen::VectorXd d_pose = Eigen::VectorXd::Zero(kPoseDim);
  Eigen::VectorXd d_shape = Eigen::VectorXd::Zero(kShapeDim);
  fk_backward(model.body, fk, d_joints, d_pose, d_shape);
  d_theta.segment(kCameraDim, kPoseDim) += d_pose;
  d_theta.tail(kShapeDim) += d_shape;
  d_theta.head(kCameraDim) += d_camera;

  regress_backward(model.reg, rc, d_theta, d_g, grads.reg);

  return total_loss(l2d, l3d, ltheta, ladv, video.flags);
}

ItemOutcome process_item(const Model& model, const RunConfig& cfg,
                         const VideoRecord& video, const BatchItem& item,
                         const PredictionCache& cache, PredictorGrads& grads) {
  const int past = cfg.past_frames();
  const int frame = item.current_frame;

  std::vector<Eigen::VectorXd> stat(past + 1);
  for (int f = 0; f <= past; ++f) {
    stat[f] = video.static_feats.at(frame - past + f);
  }
  std::vector<std::optional<Eigen::VectorXd>> hist(past);
  if (cfg.feedback) {
    hist = resolve_sources(video, item, past, cache);
  } else {
    for (auto& h : hist) h = Eigen::VectorXd::Zero(kParamDim);
  }
  const auto feats = build_input_features(stat, hist);

  EncoderCache ec;
  auto [g_uni, g_bi] = encode(feats, model.enc, &ec);

  // past-frame joints for the discriminator input, from cached predictions
  ItemOutcome out;
  const bool want_window = cfg.adversarial;
  FeatureSeq past_joints;
  if (want_window) {
    for (int f = 0; f < past; ++f) {
      auto cached = cache.get(video.id, frame - past + f);
      if (!cached) {
        throw std::runtime_error("process_item: cache miss for window");
      }
      past_joints.push_back(
          fk_joints(param_pose(*cached), param_shape(*cached), model.body));
    }
  }

  Eigen::VectorXd d_g_uni = Eigen::VectorXd::Zero(g_uni.size());
  Eigen::VectorXd d_g_bi;
  LossBreakdown sum;
  auto add = [&](const LossBreakdown& b) {
    sum.l2d += b.l2d;
    sum.l3d += b.l3d;
    sum.l_theta += b.l_theta;
    sum.l_adv += b.l_adv;
    sum.total += b.total;
  };
  add(branch_losses(model, cfg, video, frame, g_uni,
                    want_window ? &past_joints : nullptr, grads, d_g_uni));
  if (model.enc.use_bidirectional) {
    d_g_bi = Eigen::VectorXd::Zero(g_bi.size());
    add(branch_losses(model, cfg, video, frame, g_bi,
                      want_window ? &past_joints : nullptr, grads, d_g_bi));
  }
  encode_backward(model.enc, ec, d_g_uni, d_g_bi, grads.enc);

  // eval-mode prediction for the cache (and the discriminator fakes)
  const Eigen::VectorXd g_eval =
      model.enc.use_bidirectional ? (0.5 * (g_uni + g_bi)).eval() : g_uni;
  out.eval_pred = regress(g_eval, model.reg, cfg.n_iter);
  if (want_window) {
    out.window_joints = std::move(past_joints);
    out.window_joints.push_back(fk_joints(param_pose(out.eval_pred),
                                          param_shape(out.eval_pred),
                                          model.body));
    out.has_window = true;
  }
  out.sum = sum;
  return out;
}

// Fills the prediction cache for frames [T, upto] of a video, predicting
// sequentially where entries are missing.
void ensure_cache_through(const Model& model, const RunConfig& cfg,
                          const VideoRecord& video, int upto,
                          PredictionCache& cache, long iteration) {
  const int past = cfg.past_frames();
  if (!cache.contains(video.id, 0)) {
    warm_start(video, past, cache,
               video.gt_params.empty() ? WarmStartSource::kMeanParams
                                       : WarmStartSource::kGroundTruth,
               iteration);
  }
  for (int t = past; t <= upto && t < video.length; ++t) {
    if (cache.contains(video.id, t)) continue;
    std::vector<Eigen::VectorXd> stat(past + 1);
    std::vector<std::optional<Eigen::VectorXd>> hist(past);
    for (int f = 0; f <= past; ++f) stat[f] = video.static_feats.at(t - past + f);
    for (int f = 0; f < past; ++f) {
      if (cfg.feedback) {
        auto cached = cache.get(video.id, t - past + f);
        if (!cached) throw std::runtime_error("ensure_cache_through: gap");
        hist[f] = *cached;
      } else {
        hist[f] = Eigen::VectorXd::Zero(kParamDim);
      }
    }
    const auto feats = build_input_features(stat, hist);
    const FramePrediction pred = predict_frame(feats, model.enc, model.reg,
                                               cfg.n_iter, PredictMode::kEval);
    cache.put(video.id, t, pred.eval, iteration);
  }
}

void check_finite(const LossBreakdown& b) {
  if (!std::isfinite(b.total)) {
    throw NumericalError("non-finite training loss");
  }
}

}  // namespace

TrainOutcome train_model(const RunConfig& cfg, Model& model,
                         std::vector<VideoRecord>& train_videos,
                         const std::vector<int>& pool_3d,
                         const std::vector<int>& pool_2d,
                         const std::vector<FeatureSeq>& real_pool,
                         const std::vector<VideoRecord>& eval_videos,
                         std::ostream* log) {
  cfg.validate();
  Rng rng(cfg.seed + 1);

  Adam opt_p(cfg.lr_predictor, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  Adam opt_d(cfg.lr_discriminator, cfg.adam_beta1, cfg.adam_beta2,
             cfg.adam_eps);
  auto p_refs = collect_predictor(model.enc, model.reg);
  auto d_refs = collect_discriminator(model.disc);

  PredictionCache cache;
  for (const auto& v : train_videos) {
    warm_start(v, cfg.past_frames(), cache,
               v.gt_params.empty() ? WarmStartSource::kMeanParams
                                   : WarmStartSource::kGroundTruth,
               -1);
  }

  TrainOutcome outcome;
  double best_mpjpe = std::numeric_limits<double>::infinity();
  int since_best = 0;
  long j = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // per-epoch uniform subsample of the 3D pool
    std::vector<int> epoch_3d;
    for (int idx : pool_3d) {
      if (rng.uniform() < cfg.epoch_subsample) epoch_3d.push_back(idx);
    }
    if (epoch_3d.empty() && !pool_3d.empty()) {
      epoch_3d.push_back(pool_3d[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<long>(pool_3d.size()) - 1))]);
    }

    EpochLog el;
    el.epoch = epoch;
    long counted = 0;

    for (int it = 0; it < cfg.iterations_per_epoch; ++it, ++j) {
      const int t_sched = std::max(frame_position(j, cfg.max_video_length),
                                   cfg.past_frames());

      // keep the cache sequentially filled for every pool video still long
      // enough, so gamma-predicted sources and adversarial windows resolve
      for (const auto& pool : {std::cref(epoch_3d), std::cref(pool_2d)}) {
        for (int idx : pool.get()) {
          const VideoRecord& v = train_videos[idx];
          if (v.length > t_sched) {
            ensure_cache_through(model, cfg, v, t_sched - 1, cache, j);
          }
        }
      }

      auto [n3d, n2d] = mix_datasets(cfg.batch_size, cfg.ratio_3d,
                                     epoch_3d.empty(), pool_2d.empty());
      std::vector<BatchItem> items;
      auto assemble = [&](int n, const std::vector<int>& pool) {
        if (n <= 0 || pool.empty()) return;
        LoaderState state = cfg.loader_state(j);
        state.batch_size = n;
        BatchPlan plan = assemble_batch(state, train_videos, pool, cache, rng);
        items.insert(items.end(), plan.items.begin(), plan.items.end());
      };
      assemble(n3d, epoch_3d);
      assemble(n2d, pool_2d);
      if (items.empty()) continue;

      PredictorGrads grads{EncoderGrads::zero_like(model.enc),
                           RegressorGrads::zero_like(model.reg)};
      std::vector<ItemOutcome> outcomes;
      LossBreakdown batch_sum;
      for (const auto& item : items) {
        ItemOutcome o = process_item(model, cfg, train_videos[item.video_index],
                                     item, cache, grads);
        check_finite(o.sum);
        batch_sum.l2d += o.sum.l2d;
        batch_sum.l3d += o.sum.l3d;
        batch_sum.l_theta += o.sum.l_theta;
        batch_sum.l_adv += o.sum.l_adv;
        batch_sum.total += o.sum.total;
        outcomes.push_back(std::move(o));
      }
      const double inv = 1.0 / items.size();
      auto g_refs = collect_predictor_grads(grads.enc, grads.reg);
      for (auto& r : g_refs) {
        for (std::ptrdiff_t i = 0; i < r.size; ++i) r.data[i] *= inv;
      }
      opt_p.step(p_refs, g_refs);

      // feedback: store eval-mode predictions
      for (std::size_t i = 0; i < items.size(); ++i) {
        cache.put(train_videos[items[i].video_index].id,
                  items[i].current_frame, outcomes[i].eval_pred, j);
      }

      // discriminator step on real windows vs the batch's predictions
      double l_disc = 0.0;
      if (cfg.adversarial && !real_pool.empty()) {
        std::vector<FeatureSeq> fakes;
        for (auto& o : outcomes) {
          if (o.has_window) fakes.push_back(std::move(o.window_joints));
        }
        if (!fakes.empty()) {
          std::vector<const FeatureSeq*> reals;
          for (std::size_t i = 0; i < fakes.size(); ++i) {
            reals.push_back(&real_pool[static_cast<std::size_t>(rng.uniform_int(
                0, static_cast<long>(real_pool.size()) - 1))]);
          }
          std::vector<DiscriminatorCache> rc(reals.size()), fc(fakes.size());
          std::vector<double> rs(reals.size()), fs(fakes.size());
          for (std::size_t i = 0; i < reals.size(); ++i) {
            rs[i] = discriminate(*reals[i], model.adj, model.disc, &rc[i]);
          }
          for (std::size_t i = 0; i < fakes.size(); ++i) {
            fs[i] = discriminate(fakes[i], model.adj, model.disc, &fc[i]);
          }
          l_disc = discriminator_loss(rs, fs);
          if (!std::isfinite(l_disc)) {
            throw NumericalError("non-finite discriminator loss");
          }
          std::vector<double> d_rs, d_fs;
          discriminator_loss_grads(rs, fs, d_rs, d_fs);
          DiscriminatorGrads dg = DiscriminatorGrads::zero_like(model.disc);
          for (std::size_t i = 0; i < reals.size(); ++i) {
            discriminator_backward(model.adj, model.disc, rc[i], d_rs[i], dg);
          }
          for (std::size_t i = 0; i < fakes.size(); ++i) {
            discriminator_backward(model.adj, model.disc, fc[i], d_fs[i], dg);
          }
          auto dg_refs = collect_discriminator_grads(dg);
          opt_d.step(d_refs, dg_refs);
        }
      }

      const double branches = model.enc.use_bidirectional ? 2.0 : 1.0;
      el.mean_total += batch_sum.total * inv / branches;
      el.mean_l2d += batch_sum.l2d * inv / branches;
      el.mean_l3d += batch_sum.l3d * inv / branches;
      el.mean_ltheta += batch_sum.l_theta * inv / branches;
      el.mean_ladv += batch_sum.l_adv * inv / branches;
      el.mean_ldisc += l_disc;
      ++counted;
    }

    if (counted > 0) {
      el.mean_total /= counted;
      el.mean_l2d /= counted;
      el.mean_l3d /= counted;
      el.mean_ltheta /= counted;
      el.mean_ladv /= counted;
      el.mean_ldisc /= counted;
    }

    const EvalResult ev = evaluate_model(model, cfg, eval_videos);
    el.eval_mpjpe = ev.mpjpe_mm;
    el.eval_pa_mpjpe = ev.pa_mpjpe_mm;
    el.eval_accel = ev.accel_mm;
    el.lr_predictor = opt_p.learning_rate();
    outcome.epochs.push_back(el);
    if (log) {
      (*log) << "epoch " << epoch << " loss " << el.mean_total << " mpjpe "
             << el.eval_mpjpe << " lr " << el.lr_predictor << "\n";
    }

    // plateau LR decay on eval 3D accuracy
    if (ev.videos > 0) {
      if (ev.mpjpe_mm < best_mpjpe - 1e-9) {
        best_mpjpe = ev.mpjpe_mm;
        since_best = 0;
      } else if (++since_best >= cfg.plateau_patience) {
        opt_p.set_learning_rate(opt_p.learning_rate() * cfg.lr_decay);
        opt_d.set_learning_rate(opt_d.learning_rate() * cfg.lr_decay);
        since_best = 0;
      }
    }
  }

  outcome.final_eval = evaluate_model(model, cfg, eval_videos);
  outcome.iterations = j;
  return outcome;
}

void generate_synthetic_datasets(const RunConfig& cfg, const std::string& dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const KinematicModel body = KinematicModel::default_model();

  FeatureSimConfig fcfg;
  fcfg.seed = cfg.seed * 7919 + 17;
  fcfg.feature_dim = cfg.feature_dim;
  fcfg.noise_scale = cfg.feat_noise;
  fcfg.bias_scale = cfg.feat_bias;
  const FeatureSimulator sim(fcfg);

  auto make_video = [&](const std::string& id, std::uint64_t seed,
                        bool keep_3d) {
    MotionGenConfig mc;
    mc.seed = seed;
    mc.id = id;
    mc.length = cfg.synth_video_length;
    VideoRecord rec = generate_motion(mc, body);
    sim.simulate(rec);
    if (!keep_3d) {
      rec.gt_params.clear();
      rec.gt_joints3d.clear();
      rec.flags.has_3d = false;
      rec.flags.has_smpl = false;
    }
    return rec;
  };

  std::vector<VideoRecord> train;
  for (int i = 0; i < cfg.synth_train_3d; ++i) {
    train.push_back(make_video("v3d_" + std::to_string(i),
                               cfg.seed * 1000 + i, true));
  }
  for (int i = 0; i < cfg.synth_train_2d; ++i) {
    train.push_back(make_video("v2d_" + std::to_string(i),
                               cfg.seed * 1000 + 500 + i, false));
  }
  write_dataset(dir + "/train", train, body.num_joints());

  std::vector<VideoRecord> eval;
  for (int i = 0; i < cfg.synth_eval; ++i) {
    eval.push_back(make_video("ev_" + std::to_string(i),
                              cfg.seed * 1000 + 900 + i, true));
  }
  write_dataset(dir + "/eval", eval, body.num_joints());

  std::vector<MotionGenConfig> real_cfgs;
  for (int i = 0; i < cfg.synth_real_videos; ++i) {
    MotionGenConfig mc;
    mc.seed = cfg.seed * 1000 + 700 + i;
    mc.id = "real_" + std::to_string(i);
    mc.length = cfg.synth_video_length;
    real_cfgs.push_back(mc);
  }
  write_real_pool(dir + "/real_pool.bin",
                  generate_real_pool(real_cfgs, body, cfg.window_frames));

  std::ofstream sk(dir + "/skeleton.json");
  sk << body.skeleton.to_json() << "\n";
}

}  // namespace tepose
