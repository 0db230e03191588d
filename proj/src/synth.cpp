#include "tepose/synth.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace tepose {

namespace {

struct Sinusoid {
  double amp, freq, phase;
};

// FNV-1a, so per-video streams do not depend on the stdlib hash
std::uint64_t hash_id(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

VideoRecord generate_motion(const MotionGenConfig& cfg,
                            const KinematicModel& model,
                            double* joint_step_bound) {
  if (cfg.length < 2) throw std::invalid_argument("generate_motion: too short");
  Rng rng(cfg.seed);
  const int n = model.num_joints();

  // per-coordinate sinusoid banks
  std::vector<std::vector<Sinusoid>> banks(kPoseDim);
  for (int c = 0; c < kPoseDim; ++c) {
    const int count = static_cast<int>(rng.uniform_int(2, 4));
    for (int s = 0; s < count; ++s) {
      Sinusoid sin_c;
      sin_c.amp = rng.uniform(cfg.amp_low, cfg.amp_high) / count;
      sin_c.freq = rng.uniform(cfg.freq_low, cfg.freq_high);
      sin_c.phase = rng.uniform(0.0, 2.0 * M_PI);
      banks[c].push_back(sin_c);
    }
    if (cfg.smoothness == MotionClass::kJerky) {
      const int extra = static_cast<int>(rng.uniform_int(1, 2));
      for (int s = 0; s < extra; ++s) {
        Sinusoid sin_c;
        sin_c.amp = rng.uniform(cfg.amp_low, cfg.amp_high) / (extra + 1);
        sin_c.freq = rng.uniform(cfg.jerky_freq_low, cfg.jerky_freq_high);
        sin_c.phase = rng.uniform(0.0, 2.0 * M_PI);
        banks[c].push_back(sin_c);
      }
    }
  }

  Eigen::VectorXd shape(kShapeDim);
  for (int i = 0; i < kShapeDim; ++i) shape(i) = rng.uniform(-1.0, 1.0);
  Eigen::Vector3d camera(rng.uniform(0.8, 1.2), rng.uniform(-0.1, 0.1),
                         rng.uniform(-0.1, 0.1));

  VideoRecord rec;
  rec.id = cfg.id;
  rec.length = cfg.length;
  rec.flags.has_3d = true;
  rec.flags.has_smpl = true;
  rec.static_feats.resize(cfg.length);  // filled by the feature simulator
  for (int t = 0; t < cfg.length; ++t) {
    Eigen::VectorXd params = Eigen::VectorXd::Zero(kParamDim);
    params.head(kCameraDim) = camera;
    for (int c = 0; c < kPoseDim; ++c) {
      double v = 0.0;
      for (const auto& s : banks[c]) {
        v += s.amp * std::sin(2.0 * M_PI * s.freq * t + s.phase);
      }
      params(kCameraDim + c) = v;
    }
    params.tail(kShapeDim) = shape;
    const Eigen::MatrixXd joints =
        fk_joints(param_pose(params), param_shape(params), model);
    rec.gt_params.push_back(params);
    rec.gt_joints3d.push_back(joints);
    rec.gt_joints2d.push_back(project_2d(joints, camera));
  }
  for (auto& f : rec.static_feats) f = Eigen::VectorXd::Zero(1);

  if (joint_step_bound) {
    // per-frame angle change of coordinate c is at most sum_i a_i * 2 pi f_i;
    // a rotation by angle d moves a point at radius r by at most r * d, and
    // the axis-angle parameter distance bounds the rotation angle.
    double reach = 0.0;
    for (int j = 0; j < n; ++j) {
      reach += (model.rest_offsets[j] + model.shape_basis[j] * shape).norm();
    }
    double angle_sum = 0.0;
    for (int c = 0; c < kPoseDim; ++c) {
      double coord = 0.0;
      for (const auto& s : banks[c]) coord += s.amp * 2.0 * M_PI * s.freq;
      angle_sum += coord * std::sqrt(3.0);
    }
    *joint_step_bound = reach * angle_sum;
  }
  return rec;
}

FeatureSimulator::FeatureSimulator(const FeatureSimConfig& cfg) : cfg_(cfg) {
  if (cfg.feature_dim < 1) {
    throw std::invalid_argument("FeatureSimulator: feature_dim must be >= 1");
  }
  Rng rng(cfg.seed);
  const int label_dim = kPoseDim + kShapeDim;
  m_.resize(cfg.feature_dim, label_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(label_dim));
  for (int i = 0; i < cfg_.feature_dim; ++i) {
    for (int j = 0; j < label_dim; ++j) m_(i, j) = scale * rng.normal();
  }
}

void FeatureSimulator::simulate(VideoRecord& record) const {
  if (record.gt_params.empty()) {
    throw std::invalid_argument("FeatureSimulator: record has no labels");
  }
  Rng rng(cfg_.seed ^ hash_id(record.id));
  Eigen::VectorXd bias(cfg_.feature_dim);
  for (int i = 0; i < cfg_.feature_dim; ++i) {
    bias(i) = cfg_.bias_scale * rng.normal();
  }
  record.static_feats.resize(record.length);
  Eigen::VectorXd label(kPoseDim + kShapeDim);
  for (int t = 0; t < record.length; ++t) {
    label << param_pose(record.gt_params[t]), param_shape(record.gt_params[t]);
    Eigen::VectorXd f = m_ * label + bias;
    for (int i = 0; i < cfg_.feature_dim; ++i) {
      f(i) += cfg_.noise_scale * rng.normal();
    }
    record.static_feats[t] = f;
  }
}

std::vector<FeatureSeq> slice_windows(const VideoRecord& record,
                                      int window_frames, int root_joint) {
  std::vector<FeatureSeq> windows;
  for (int start = 0; start + window_frames <= record.length; ++start) {
    FeatureSeq w(window_frames);
    for (int f = 0; f < window_frames; ++f) {
      const Eigen::MatrixXd& joints = record.gt_joints3d.at(start + f);
      w[f] = joints.rowwise() - joints.row(root_joint);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<FeatureSeq> generate_real_pool(
    const std::vector<MotionGenConfig>& configs, const KinematicModel& model,
    int window_frames) {
  std::vector<FeatureSeq> pool;
  for (const auto& cfg : configs) {
    const VideoRecord rec = generate_motion(cfg, model);
    auto windows = slice_windows(rec, window_frames, model.root);
    pool.insert(pool.end(), windows.begin(), windows.end());
  }
  return pool;
}

}  // namespace tepose
