#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tepose {

// Frames x N x 3 joint positions in millimeters.
struct JointSequence {
  std::vector<Eigen::MatrixXd> frames;  // each N x 3
  int root_joint = 0;

  int num_frames() const { return static_cast<int>(frames.size()); }
  int num_joints() const {
    return frames.empty() ? 0 : static_cast<int>(frames[0].rows());
  }
};

// Mean per-joint position error after per-frame root alignment (mm).
double mpjpe(const JointSequence& pred, const JointSequence& gt);

// Per-frame optimal similarity alignment (scale, rotation, translation)
// followed by the mean joint distance (mm).
double pa_mpjpe(const JointSequence& pred, const JointSequence& gt);

// Closed-form Procrustes similarity alignment of one frame; returns the
// aligned prediction. Throws on rank-deficient configurations.
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& pred,
                                 const Eigen::MatrixXd& gt);

// Mean discrepancy of second finite differences (mm / frame^2).
double accel_error(const JointSequence& pred, const JointSequence& gt);

}  // namespace tepose
