#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tepose/kinematics.hpp"

namespace tepose {

struct SupervisionFlags {
  bool has_3d = false;
  bool has_smpl = false;
};

struct LossBreakdown {
  double l2d = 0.0;
  double l3d = 0.0;
  double l_theta = 0.0;
  double l_adv = 0.0;
  double total = 0.0;
};

// Mean of squared coordinate differences. Works for N x 3 and N x 2.
double loss_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt);
Eigen::MatrixXd loss_mse_grad(const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& gt);

inline double loss_3d(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt) {
  return loss_mse(pred, gt);
}
inline double loss_2d(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& gt) {
  return loss_mse(pred, gt);
}

// Mean of squares over pose plus mean of squares over shape; the camera
// block is unsupervised.
double loss_smpl(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt);
Eigen::VectorXd loss_smpl_grad(const Eigen::VectorXd& pred,
                               const Eigen::VectorXd& gt);

// (score - 1)^2
double adversarial_loss(double score);
double adversarial_loss_grad(double score);

// mean over real of (s - 1)^2 plus mean over fake of s^2
double discriminator_loss(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores);
void discriminator_loss_grads(const std::vector<double>& real_scores,
                              const std::vector<double>& fake_scores,
                              std::vector<double>& d_real,
                              std::vector<double>& d_fake);

// L = L_2D + 1_3D L_3D + 1_T L_T + (1 - 1_T) L_adv. Components gated off
// by the flags may be absent; an active indicator with a missing component
// is an error.
LossBreakdown total_loss(double l2d, std::optional<double> l3d,
                         std::optional<double> l_theta,
                         std::optional<double> l_adv,
                         const SupervisionFlags& flags);

}  // namespace tepose
