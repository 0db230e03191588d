#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tepose/gcn.hpp"
#include "tepose/kinematics.hpp"
#include "tepose/loader.hpp"
#include "tepose/rng.hpp"

namespace tepose {

enum class MotionClass { kSmooth, kJerky };

struct MotionGenConfig {
  std::uint64_t seed = 0;
  std::string id = "video";
  int length = 64;
  double freq_low = 0.005;   // cycles / frame
  double freq_high = 0.05;
  double amp_low = 0.1;      // radians
  double amp_high = 0.6;
  MotionClass smoothness = MotionClass::kSmooth;
  // extra band mixed in for the jerky class
  double jerky_freq_low = 0.15;
  double jerky_freq_high = 0.4;
};

// Sinusoidal pose synthesis with full labels: per-coordinate sums of 2-4
// band-limited sinusoids, one shape draw per video, joints from forward
// kinematics and 2D labels from a fixed per-video camera.
// pose_step_bound, when requested, receives a closed-form upper bound on
// any joint's per-frame displacement (meters).
VideoRecord generate_motion(const MotionGenConfig& cfg,
                            const KinematicModel& model,
                            double* joint_step_bound = nullptr);

struct FeatureSimConfig {
  std::uint64_t seed = 0;
  int feature_dim = 64;
  double noise_scale = 0.0;  // per-frame
  double bias_scale = 0.0;   // per-video
};

// Stands in for the image backbone: features are a fixed linear image of
// the pose/shape labels plus a per-video constant bias and per-frame noise.
class FeatureSimulator {
 public:
  explicit FeatureSimulator(const FeatureSimConfig& cfg);

  // Fills record.static_feats from record.gt_params.
  void simulate(VideoRecord& record) const;

  const Eigen::MatrixXd& mixing_matrix() const { return m_; }

 private:
  FeatureSimConfig cfg_;
  Eigen::MatrixXd m_;  // F x 82
};

// (T+1)-frame root-centered joint windows from smooth-class sequences.
std::vector<FeatureSeq> generate_real_pool(
    const std::vector<MotionGenConfig>& configs, const KinematicModel& model,
    int window_frames);

// Root-centered windows sliced from one labeled video's 3D joints.
std::vector<FeatureSeq> slice_windows(const VideoRecord& record,
                                      int window_frames, int root_joint);

}  // namespace tepose
