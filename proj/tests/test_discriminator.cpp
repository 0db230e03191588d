#include <doctest.h>

#include "tepose/discriminator.hpp"
#include "tepose/kinematics.hpp"

using namespace tepose;

namespace {

FeatureSeq random_motion(int frames, int joints, Rng& rng) {
  FeatureSeq seq;
  for (int t = 0; t < frames; ++t) {
    Eigen::MatrixXd f(joints, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = rng.normal();
    seq.push_back(f);
  }
  return seq;
}

}  // namespace

TEST_CASE("discriminator is invariant to per-frame translation") {
  const auto model = KinematicModel::default_model();
  const auto adj = DiscriminatorAdjacency::build(model.skeleton, 3, 2, 3);
  Rng rng(1);
  const auto params =
      make_discriminator_params({3, 6, 8, 10}, 3, 2, 3, model.root, rng);
  auto seq = random_motion(4, model.num_joints(), rng);
  const double base = discriminate(seq, adj, params);
  for (auto& f : seq) {
    f.rowwise() += Eigen::RowVector3d(0.7, -1.2, 3.4);
  }
  CHECK(discriminate(seq, adj, params) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("zero input scores the head bias") {
  const auto model = KinematicModel::default_model();
  const auto adj = DiscriminatorAdjacency::build(model.skeleton, 2, 2, 3);
  Rng rng(2);
  const auto params =
      make_discriminator_params({3, 4, 5, 6}, 2, 2, 3, model.root, rng);
  FeatureSeq zeros(3, Eigen::MatrixXd::Zero(model.num_joints(), 3));
  CHECK(discriminate(zeros, adj, params) ==
        doctest::Approx(params.head_b).epsilon(1e-12));
}

TEST_CASE("adjacency families have the configured sizes") {
  const auto model = KinematicModel::default_model();
  const auto adj = DiscriminatorAdjacency::build(model.skeleton, 4, 2, 3);
  CHECK(adj.gcn_norm.size() == 5);
  CHECK(adj.g3d_tiled.size() == 3);
  CHECK(adj.g3d_tiled[0].rows() == 3 * model.num_joints());
}

TEST_CASE("grad accumulation helpers") {
  const auto model = KinematicModel::default_model();
  Rng rng(3);
  const auto params =
      make_discriminator_params({3, 4, 5, 6}, 2, 2, 3, model.root, rng);
  auto a = DiscriminatorGrads::zero_like(params);
  auto b = DiscriminatorGrads::zero_like(params);
  a.head_b = 1.0;
  b.head_b = 2.0;
  a.accumulate(b);
  CHECK(a.head_b == 3.0);
  a.scale(0.5);
  CHECK(a.head_b == 1.5);
}

TEST_CASE("score is deterministic") {
  const auto model = KinematicModel::default_model();
  const auto adj = DiscriminatorAdjacency::build(model.skeleton, 2, 2, 3);
  Rng rng(4);
  const auto params =
      make_discriminator_params({3, 4, 5, 6}, 2, 2, 3, model.root, rng);
  const auto seq = random_motion(5, model.num_joints(), rng);
  CHECK(discriminate(seq, adj, params) == discriminate(seq, adj, params));
}
