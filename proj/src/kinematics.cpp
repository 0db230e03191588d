#include "tepose/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace tepose {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

constexpr double kSmallAngle = 1e-6;

}  // namespace

Eigen::VectorXd mean_param_vector() {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(kParamDim);
  p(0) = 1.0;  // camera scale
  return p;
}

void KinematicModel::validate() const {
  const int n = num_joints();
  if (static_cast<int>(parent.size()) != n ||
      static_cast<int>(rest_offsets.size()) != n ||
      static_cast<int>(joint_map.size()) != n ||
      static_cast<int>(shape_basis.size()) != n) {
    throw std::invalid_argument("KinematicModel: field sizes disagree");
  }
  if (root < 0 || root >= n || parent[root] != -1) {
    throw std::invalid_argument("KinematicModel: bad root");
  }
  for (int j = 0; j < n; ++j) {
    if (j == root) continue;
    // parents must precede children so one forward sweep suffices
    if (parent[j] < 0 || parent[j] >= j) {
      throw std::invalid_argument(
          "KinematicModel: joints must be topologically ordered (non-tree?)");
    }
    if (joint_map[j] < 0 || joint_map[j] >= kPoseDim / 3) {
      throw std::invalid_argument("KinematicModel: joint_map out of range");
    }
  }
}

KinematicModel KinematicModel::default_model() {
  KinematicModel m;
  const int n = 14;
  m.skeleton.num_joints = n;
  m.parent = {-1, 0, 1, 2, 3, 1, 5, 6, 0, 8, 9, 0, 11, 12};
  m.rest_offsets = {
      {0, 0, 0},            // 0 pelvis (root)
      {0, 0.50, 0},         // 1 chest (spine/head)
      {-0.18, 0.05, 0},     // 2 l_shoulder
      {-0.28, 0, 0},        // 3 l_elbow
      {-0.25, 0, 0},        // 4 l_wrist
      {0.18, 0.05, 0},      // 5 r_shoulder
      {0.28, 0, 0},         // 6 r_elbow
      {0.25, 0, 0},         // 7 r_wrist
      {-0.10, -0.05, 0},    // 8 l_hip
      {0, -0.45, 0},        // 9 l_knee
      {0, -0.45, 0},        // 10 l_ankle
      {0.10, -0.05, 0},     // 11 r_hip
      {0, -0.45, 0},        // 12 r_knee
      {0, -0.45, 0},        // 13 r_ankle
  };
  for (int j = 1; j < n; ++j) {
    m.skeleton.edges.emplace_back(m.parent[j], j);
  }
  m.joint_map.resize(n);
  for (int j = 0; j < n; ++j) m.joint_map[j] = j;
  // Shape basis scales each rest offset by one beta coordinate.
  m.shape_basis.resize(n);
  for (int j = 0; j < n; ++j) {
    m.shape_basis[j].setZero();
    m.shape_basis[j].col(j % kShapeDim) = 0.1 * m.rest_offsets[j];
  }
  m.validate();
  return m;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  const Eigen::Matrix3d wx = skew(w);
  double a, b;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * wx + b * wx * wx;
}

std::array<Eigen::Matrix3d, 3> rodrigues_jacobian(const Eigen::Vector3d& w) {
  std::array<Eigen::Matrix3d, 3> jac;
  const double theta = w.norm();
  if (theta < kSmallAngle) {
    // first-order expansion of R = I + [w]x + 0.5 [w]x^2
    const Eigen::Matrix3d wx = skew(w);
    for (int i = 0; i < 3; ++i) {
      Eigen::Matrix3d ex = skew(Eigen::Vector3d::Unit(i));
      jac[i] = ex + 0.5 * (ex * wx + wx * ex);
    }
    return jac;
  }
  const Eigen::Matrix3d r = rodrigues(w);
  const Eigen::Matrix3d wx = skew(w);
  const double t2 = theta * theta;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d ei = Eigen::Vector3d::Unit(i);
    const Eigen::Vector3d v = w.cross((Eigen::Matrix3d::Identity() - r) * ei);
    jac[i] = ((w(i) * wx + skew(v)) / t2) * r;
  }
  return jac;
}

Eigen::MatrixXd fk_joints(const Eigen::VectorXd& pose,
                          const Eigen::VectorXd& shape,
                          const KinematicModel& model, FkCache* cache) {
  model.validate();
  if (pose.size() != kPoseDim || shape.size() != kShapeDim) {
    throw std::invalid_argument("fk_joints: bad pose/shape size");
  }
  const int n = model.num_joints();
  FkCache local;
  FkCache& c = cache ? *cache : local;
  c.local_rot.resize(n);
  c.cum_rot.resize(n);
  c.offsets.resize(n);
  c.joints.resize(n, 3);
  if (cache) c.local_jac.resize(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d w = pose.segment<3>(3 * model.joint_map[j]);
    c.local_rot[j] = rodrigues(w);
    if (cache) c.local_jac[j] = rodrigues_jacobian(w);
    c.offsets[j] = model.rest_offsets[j] + model.shape_basis[j] * shape;
    if (j == model.root) {
      c.cum_rot[j] = c.local_rot[j];
      c.joints.row(j).setZero();
    } else {
      const int p = model.parent[j];
      c.cum_rot[j] = c.cum_rot[p] * c.local_rot[j];
      c.joints.row(j) =
          (c.joints.row(p).transpose() + c.cum_rot[p] * c.offsets[j])
              .transpose();
    }
  }
  return c.joints;
}

void fk_backward(const KinematicModel& model, const FkCache& cache,
                 const Eigen::MatrixXd& d_joints, Eigen::VectorXd& d_pose,
                 Eigen::VectorXd& d_shape) {
  const int n = model.num_joints();
  if (d_joints.rows() != n || d_joints.cols() != 3) {
    throw std::invalid_argument("fk_backward: d_joints shape mismatch");
  }
  if (d_pose.size() != kPoseDim) d_pose = Eigen::VectorXd::Zero(kPoseDim);
  if (d_shape.size() != kShapeDim) d_shape = Eigen::VectorXd::Zero(kShapeDim);

  std::vector<Eigen::Vector3d> d_pos(n);
  std::vector<Eigen::Matrix3d> d_cum(n, Eigen::Matrix3d::Zero());
  for (int j = 0; j < n; ++j) d_pos[j] = d_joints.row(j).transpose();

  // Reverse topological sweep: children first.
  for (int j = n - 1; j >= 0; --j) {
    if (j != model.root) {
      const int p = model.parent[j];
      // pos_j = pos_p + cum_p * offset_j
      d_pos[p] += d_pos[j];
      d_cum[p] += d_pos[j] * cache.offsets[j].transpose();
      const Eigen::Vector3d d_off =
          cache.cum_rot[p].transpose() * d_pos[j];
      d_shape += model.shape_basis[j].transpose() * d_off;
      // cum_j = cum_p * local_j
      d_cum[p] += d_cum[j] * cache.local_rot[j].transpose();
    }
    // local rotation gradient (root: cum_root = local_root)
    const Eigen::Matrix3d d_local =
        (j == model.root)
            ? d_cum[j]
            : cache.cum_rot[model.parent[j]].transpose() * d_cum[j];
    const int t = model.joint_map[j];
    for (int i = 0; i < 3; ++i) {
      d_pose(3 * t + i) +=
          (d_local.array() * cache.local_jac[j][i].array()).sum();
    }
  }
}

Eigen::MatrixXd project_2d(const Eigen::MatrixXd& joints,
                           const Eigen::Vector3d& camera) {
  if (joints.cols() != 3) {
    throw std::invalid_argument("project_2d: joints must be N x 3");
  }
  Eigen::MatrixXd out(joints.rows(), 2);
  out.col(0) = camera(0) * joints.col(0).array() + camera(1);
  out.col(1) = camera(0) * joints.col(1).array() + camera(2);
  return out;
}

void project_2d_backward(const Eigen::MatrixXd& joints,
                         const Eigen::Vector3d& camera,
                         const Eigen::MatrixXd& d_proj,
                         Eigen::MatrixXd& d_joints, Eigen::Vector3d& d_camera) {
  if (d_proj.rows() != joints.rows() || d_proj.cols() != 2) {
    throw std::invalid_argument("project_2d_backward: shape mismatch");
  }
  if (d_joints.rows() != joints.rows() || d_joints.cols() != 3) {
    d_joints = Eigen::MatrixXd::Zero(joints.rows(), 3);
  }
  d_joints.col(0) += camera(0) * d_proj.col(0);
  d_joints.col(1) += camera(0) * d_proj.col(1);
  d_camera(0) += (d_proj.col(0).array() * joints.col(0).array()).sum() +
                 (d_proj.col(1).array() * joints.col(1).array()).sum();
  d_camera(1) += d_proj.col(0).sum();
  d_camera(2) += d_proj.col(1).sum();
}

}  // namespace tepose
