#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "tepose/graph.hpp"

namespace tepose {

constexpr int kPoseDim = 72;    // 24 axis-angle triples
constexpr int kShapeDim = 10;
constexpr int kCameraDim = 3;   // (scale, tx, ty)
constexpr int kParamDim = kCameraDim + kPoseDim + kShapeDim;  // 85

// Parameter vector layout: [camera(3) | pose(72) | shape(10)].
inline Eigen::Ref<const Eigen::VectorXd> param_pose(const Eigen::VectorXd& p) {
  return p.segment(kCameraDim, kPoseDim);
}
inline Eigen::Ref<const Eigen::VectorXd> param_shape(const Eigen::VectorXd& p) {
  return p.segment(kCameraDim + kPoseDim, kShapeDim);
}
inline Eigen::Ref<const Eigen::VectorXd> param_camera(const Eigen::VectorXd& p) {
  return p.head(kCameraDim);
}

// Mean parameters: identity camera scale, rest pose, neutral shape.
Eigen::VectorXd mean_param_vector();

// Toy articulated chain standing in for a body model: a tree of joints,
// per-joint rest offsets from the parent, a linear shape basis scaling the
// offsets, and a map from pose triples to joints.
struct KinematicModel {
  SkeletonGraph skeleton;
  std::vector<int> parent;                    // -1 for the root
  std::vector<Eigen::Vector3d> rest_offsets;  // meters, unused for root
  std::vector<int> joint_map;                 // pose triple per joint
  std::vector<Eigen::Matrix<double, 3, 10>> shape_basis;
  int root = 0;

  int num_joints() const { return skeleton.num_joints; }
  void validate() const;

  // 14-joint default: pelvis root, spine/head chain, two 3-joint arms off
  // the chest, two 3-joint legs off the pelvis.
  static KinematicModel default_model();
};

// Axis-angle to rotation matrix (Rodrigues), with a series fallback for
// small angles.
Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w);

// Partial derivatives of the rotation matrix w.r.t. each axis-angle
// coordinate.
std::array<Eigen::Matrix3d, 3> rodrigues_jacobian(const Eigen::Vector3d& w);

struct FkCache {
  std::vector<Eigen::Matrix3d> local_rot;
  std::vector<std::array<Eigen::Matrix3d, 3>> local_jac;  // dR/dw per joint
  std::vector<Eigen::Matrix3d> cum_rot;
  std::vector<Eigen::Vector3d> offsets;  // shape-adjusted
  Eigen::MatrixXd joints;                // N x 3
};

// Forward kinematics: root at the origin carrying the global rotation from
// the root pose triple; children accumulate rotations down the tree.
Eigen::MatrixXd fk_joints(const Eigen::VectorXd& pose,
                          const Eigen::VectorXd& shape,
                          const KinematicModel& model,
                          FkCache* cache = nullptr);

// Adjoint of fk_joints. d_joints is N x 3; gradients are accumulated into
// d_pose (72) and d_shape (10), which must be pre-sized and zeroed by the
// caller if fresh gradients are wanted.
void fk_backward(const KinematicModel& model, const FkCache& cache,
                 const Eigen::MatrixXd& d_joints, Eigen::VectorXd& d_pose,
                 Eigen::VectorXd& d_shape);

// Weak-perspective projection: drop depth, scale, translate.
Eigen::MatrixXd project_2d(const Eigen::MatrixXd& joints,
                           const Eigen::Vector3d& camera);

void project_2d_backward(const Eigen::MatrixXd& joints,
                         const Eigen::Vector3d& camera,
                         const Eigen::MatrixXd& d_proj,
                         Eigen::MatrixXd& d_joints, Eigen::Vector3d& d_camera);

}  // namespace tepose
