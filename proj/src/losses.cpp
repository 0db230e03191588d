#include "tepose/losses.hpp"

#include <stdexcept>

namespace tepose {

double loss_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw std::invalid_argument("loss_mse: shape mismatch");
  }
  return (pred - gt).array().square().mean();
}

Eigen::MatrixXd loss_mse_grad(const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw std::invalid_argument("loss_mse_grad: shape mismatch");
  }
  return 2.0 / static_cast<double>(pred.size()) * (pred - gt);
}

double loss_smpl(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt) {
  if (pred.size() != kParamDim || gt.size() != kParamDim) {
    throw std::invalid_argument("loss_smpl: parameters must have 85 entries");
  }
  const double pose =
      (param_pose(pred) - param_pose(gt)).array().square().mean();
  const double shape =
      (param_shape(pred) - param_shape(gt)).array().square().mean();
  return pose + shape;
}

Eigen::VectorXd loss_smpl_grad(const Eigen::VectorXd& pred,
                               const Eigen::VectorXd& gt) {
  if (pred.size() != kParamDim || gt.size() != kParamDim) {
    throw std::invalid_argument("loss_smpl_grad: bad size");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(kParamDim);
  g.segment(kCameraDim, kPoseDim) =
      2.0 / kPoseDim * (param_pose(pred) - param_pose(gt));
  g.segment(kCameraDim + kPoseDim, kShapeDim) =
      2.0 / kShapeDim * (param_shape(pred) - param_shape(gt));
  return g;
}

double adversarial_loss(double score) {
  const double d = score - 1.0;
  return d * d;
}

double adversarial_loss_grad(double score) { return 2.0 * (score - 1.0); }

double discriminator_loss(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw std::invalid_argument("discriminator_loss: empty batch");
  }
  double real = 0.0;
  for (double s : real_scores) real += (s - 1.0) * (s - 1.0);
  double fake = 0.0;
  for (double s : fake_scores) fake += s * s;
  return real / real_scores.size() + fake / fake_scores.size();
}

void discriminator_loss_grads(const std::vector<double>& real_scores,
                              const std::vector<double>& fake_scores,
                              std::vector<double>& d_real,
                              std::vector<double>& d_fake) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw std::invalid_argument("discriminator_loss_grads: empty batch");
  }
  d_real.resize(real_scores.size());
  d_fake.resize(fake_scores.size());
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    d_real[i] = 2.0 * (real_scores[i] - 1.0) / real_scores.size();
  }
  for (std::size_t i = 0; i < fake_scores.size(); ++i) {
    d_fake[i] = 2.0 * fake_scores[i] / fake_scores.size();
  }
}

LossBreakdown total_loss(double l2d, std::optional<double> l3d,
                         std::optional<double> l_theta,
                         std::optional<double> l_adv,
                         const SupervisionFlags& flags) {
  LossBreakdown b;
  b.l2d = l2d;
  if (flags.has_3d) {
    if (!l3d) throw std::invalid_argument("total_loss: 3D flag set, no L_3D");
    b.l3d = *l3d;
  }
  if (flags.has_smpl) {
    if (!l_theta) {
      throw std::invalid_argument("total_loss: SMPL flag set, no L_Theta");
    }
    b.l_theta = *l_theta;
  } else {
    if (!l_adv) {
      throw std::invalid_argument("total_loss: SMPL flag clear, no L_adv");
    }
    b.l_adv = *l_adv;
  }
  b.total = b.l2d + (flags.has_3d ? b.l3d : 0.0) +
            (flags.has_smpl ? b.l_theta : 0.0) +
            (flags.has_smpl ? 0.0 : b.l_adv);
  return b;
}

}  // namespace tepose
