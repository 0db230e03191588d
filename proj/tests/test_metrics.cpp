#include <doctest.h>

#include "tepose/metrics.hpp"
#include "tepose/rng.hpp"

using namespace tepose;

namespace {

JointSequence random_sequence(int frames, int joints, Rng& rng, double s = 1.0) {
  JointSequence seq;
  for (int t = 0; t < frames; ++t) {
    Eigen::MatrixXd f(joints, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = s * rng.normal();
    seq.frames.push_back(f);
  }
  return seq;
}

}  // namespace

TEST_CASE("mpjpe worked values") {
  JointSequence gt = {{Eigen::MatrixXd::Zero(2, 3)}, 0};
  CHECK(mpjpe(gt, gt) == 0.0);

  JointSequence pred = gt;
  pred.frames[0](1, 0) = 3.0;
  pred.frames[0](1, 1) = 4.0;
  CHECK(mpjpe(pred, gt) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("mpjpe cancels common translations") {
  Rng rng(1);
  JointSequence gt = random_sequence(3, 5, rng);
  JointSequence pred = gt;
  for (auto& f : pred.frames) f.rowwise() += Eigen::RowVector3d(10, -3, 7);
  CHECK(mpjpe(pred, gt) < 1e-12);
}

TEST_CASE("pa_mpjpe recovers exact similarity transforms") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    JointSequence gt = random_sequence(2, 6, rng);
    JointSequence pred = gt;
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    const double angle = rng.uniform(0.0, 3.0);
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    const double s = rng.uniform(0.5, 2.0);
    const Eigen::RowVector3d c(rng.normal(), rng.normal(), rng.normal());
    for (auto& f : pred.frames) {
      f = (s * (f * r.transpose())).rowwise() + c;
    }
    CHECK(pa_mpjpe(pred, gt) < 1e-8);
  }
}

TEST_CASE("pa_mpjpe never exceeds mpjpe") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int joints = 4 + static_cast<int>(rng.uniform_int(0, 8));
    JointSequence gt = random_sequence(2, joints, rng);
    JointSequence pred = random_sequence(2, joints, rng);
    CHECK(pa_mpjpe(pred, gt) <= mpjpe(pred, gt) + 1e-9);
  }
}

TEST_CASE("pa_mpjpe matches a numerical minimization oracle") {
  Rng rng(4);
  JointSequence gt = random_sequence(1, 6, rng);
  JointSequence pred = gt;
  for (auto& f : pred.frames) {
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] += 0.1 * rng.normal();
  }
  // Procrustes minimizes the summed squared distance, so the oracle
  // searches that objective.
  const double closed =
      (procrustes_align(pred.frames[0], gt.frames[0]) - gt.frames[0])
          .rowwise()
          .squaredNorm()
          .mean();

  // crude coordinate search over (s, axis-angle r, c) seeded at identity
  const auto cost = [&](double s, const Eigen::Vector3d& w,
                        const Eigen::RowVector3d& c) {
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(w.norm() < 1e-12 ? 0.0 : w.norm(),
                          w.norm() < 1e-12 ? Eigen::Vector3d::UnitX()
                                           : w.normalized())
            .toRotationMatrix();
    const Eigen::MatrixXd aligned =
        ((s * (pred.frames[0] * r.transpose())).rowwise() + c);
    return (aligned - gt.frames[0]).rowwise().squaredNorm().mean();
  };
  double s = 1.0;
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Eigen::RowVector3d c = Eigen::RowVector3d::Zero();
  double best = cost(s, w, c);
  double step = 0.25;
  for (int pass = 0; pass < 60; ++pass) {
    bool improved = false;
    for (int dim = 0; dim < 7; ++dim) {
      for (double sign : {1.0, -1.0}) {
        double s2 = s;
        Eigen::Vector3d w2 = w;
        Eigen::RowVector3d c2 = c;
        if (dim == 0) s2 += sign * step;
        else if (dim <= 3) w2[dim - 1] += sign * step;
        else c2[dim - 4] += sign * step;
        const double v = cost(s2, w2, c2);
        if (v < best) {
          best = v;
          s = s2;
          w = w2;
          c = c2;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  CHECK(closed <= best + 1e-4);
}

TEST_CASE("accel error worked values") {
  Rng rng(5);
  JointSequence gt = random_sequence(5, 4, rng);
  CHECK(accel_error(gt, gt) == 0.0);

  // constant-velocity sequences have zero acceleration error
  JointSequence a, b;
  for (int t = 0; t < 4; ++t) {
    a.frames.push_back(Eigen::MatrixXd::Constant(2, 3, 1.0 * t));
    b.frames.push_back(Eigen::MatrixXd::Constant(2, 3, -2.5 * t + 4.0));
  }
  CHECK(accel_error(a, b) < 1e-12);

  // 3 frames, 1 joint: prediction acceleration (1,0,0) against zero
  JointSequence pred, zero;
  for (int t = 0; t < 3; ++t) {
    pred.frames.push_back(Eigen::MatrixXd::Zero(1, 3));
    zero.frames.push_back(Eigen::MatrixXd::Zero(1, 3));
  }
  pred.frames[2](0, 0) = 1.0;
  CHECK(accel_error(pred, zero) == doctest::Approx(1.0).epsilon(1e-15));

  JointSequence two = random_sequence(2, 2, rng);
  CHECK_THROWS(accel_error(two, two));
}

TEST_CASE("metrics are invariant to consistent joint relabeling") {
  Rng rng(6);
  JointSequence gt = random_sequence(2, 5, rng);
  JointSequence pred = random_sequence(2, 5, rng);
  const double base_m = mpjpe(pred, gt);
  const double base_pa = pa_mpjpe(pred, gt);

  std::vector<int> perm = {3, 0, 4, 1, 2};
  JointSequence gt2 = gt, pred2 = pred;
  for (int t = 0; t < 2; ++t) {
    for (int j = 0; j < 5; ++j) {
      gt2.frames[t].row(j) = gt.frames[t].row(perm[j]);
      pred2.frames[t].row(j) = pred.frames[t].row(perm[j]);
    }
  }
  gt2.root_joint = pred2.root_joint = 1;  // perm[1] == 0
  CHECK(mpjpe(pred2, gt2) == doctest::Approx(base_m).epsilon(1e-12));
  CHECK(pa_mpjpe(pred2, gt2) == doctest::Approx(base_pa).epsilon(1e-9));
}

TEST_CASE("degenerate procrustes configurations are rejected") {
  Eigen::MatrixXd flat(3, 3);
  flat.setZero();  // all points coincide
  Eigen::MatrixXd gt(3, 3);
  gt << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  CHECK_THROWS(procrustes_align(flat, gt));
  CHECK_THROWS(procrustes_align(gt.topRows(2), gt.topRows(2)));
}
