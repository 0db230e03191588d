#include "tepose/metrics.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace tepose {

namespace {

void check_pair(const JointSequence& pred, const JointSequence& gt) {
  if (pred.num_frames() != gt.num_frames() || pred.num_frames() == 0) {
    throw std::invalid_argument("metrics: frame count mismatch");
  }
  for (int t = 0; t < pred.num_frames(); ++t) {
    if (pred.frames[t].rows() != gt.frames[t].rows() ||
        pred.frames[t].cols() != 3 || gt.frames[t].cols() != 3) {
      throw std::invalid_argument("metrics: joint shape mismatch");
    }
  }
}

double mean_joint_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).rowwise().norm().mean();
}

}  // namespace

double mpjpe(const JointSequence& pred, const JointSequence& gt) {
  check_pair(pred, gt);
  double sum = 0.0;
  for (int t = 0; t < pred.num_frames(); ++t) {
    const Eigen::MatrixXd p =
        pred.frames[t].rowwise() - pred.frames[t].row(pred.root_joint);
    const Eigen::MatrixXd g =
        gt.frames[t].rowwise() - gt.frames[t].row(gt.root_joint);
    sum += mean_joint_distance(p, g);
  }
  return sum / pred.num_frames();
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& pred,
                                 const Eigen::MatrixXd& gt) {
  const auto n = pred.rows();
  if (n < 3) throw std::invalid_argument("procrustes_align: need >= 3 joints");
  const Eigen::RowVector3d mu_p = pred.colwise().mean();
  const Eigen::RowVector3d mu_g = gt.colwise().mean();
  const Eigen::MatrixXd pc = pred.rowwise() - mu_p;
  const Eigen::MatrixXd gc = gt.rowwise() - mu_g;

  const double p_var = pc.array().square().sum();
  if (p_var <= 0.0) {
    throw std::invalid_argument("procrustes_align: degenerate prediction");
  }

  // cross-covariance, with reflection guarded by the determinant correction
  const Eigen::Matrix3d h = pc.transpose() * gc;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.rank() < 2) {
    throw std::invalid_argument("procrustes_align: rank-deficient configuration");
  }
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
    d(2, 2) = -1.0;
  }
  const Eigen::Matrix3d rot = svd.matrixV() * d * svd.matrixU().transpose();
  const double scale = (d * svd.singularValues().asDiagonal()).trace() / p_var;

  Eigen::MatrixXd aligned = scale * (pc * rot.transpose());
  aligned.rowwise() += mu_g;
  return aligned;
}

double pa_mpjpe(const JointSequence& pred, const JointSequence& gt) {
  check_pair(pred, gt);
  double sum = 0.0;
  for (int t = 0; t < pred.num_frames(); ++t) {
    const Eigen::MatrixXd aligned = procrustes_align(pred.frames[t], gt.frames[t]);
    sum += mean_joint_distance(aligned, gt.frames[t]);
  }
  return sum / pred.num_frames();
}

double accel_error(const JointSequence& pred, const JointSequence& gt) {
  check_pair(pred, gt);
  const int frames = pred.num_frames();
  if (frames < 3) {
    throw std::invalid_argument("accel_error: need at least 3 frames");
  }
  double sum = 0.0;
  for (int t = 1; t + 1 < frames; ++t) {
    const Eigen::MatrixXd a_pred =
        pred.frames[t + 1] - 2.0 * pred.frames[t] + pred.frames[t - 1];
    const Eigen::MatrixXd a_gt =
        gt.frames[t + 1] - 2.0 * gt.frames[t] + gt.frames[t - 1];
    sum += mean_joint_distance(a_pred, a_gt);
  }
  return sum / (frames - 2);
}

}  // namespace tepose
