#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "tepose/gradcheck.hpp"
#include "tepose/train.hpp"

namespace py = pybind11;
using namespace tepose;

namespace {

SkeletonGraph make_graph(int num_joints,
                         const std::vector<std::pair<int, int>>& edges) {
  SkeletonGraph g;
  g.num_joints = num_joints;
  g.edges = edges;
  g.validate();
  return g;
}

JointSequence make_sequence(const std::vector<Eigen::MatrixXd>& frames) {
  JointSequence s;
  s.frames = frames;
  return s;
}

// Bundles the discriminator with its adjacency family so Python callers
// hold one object.
struct PyDiscriminator {
  DiscriminatorAdjacency adj;
  DiscriminatorParams params;

  PyDiscriminator(const std::vector<int>& channels, int gcn_scales,
                  int g3d_scales, int tau, std::uint64_t seed) {
    const auto model = KinematicModel::default_model();
    adj = DiscriminatorAdjacency::build(model.skeleton, gcn_scales, g3d_scales,
                                        tau);
    Rng rng(seed);
    params = make_discriminator_params(channels, gcn_scales, g3d_scales, tau,
                                       model.root, rng);
  }

  double score(const std::vector<Eigen::MatrixXd>& window) const {
    return discriminate(window, adj, params);
  }
};

// Config-driven model wrapper around the streaming predictor.
struct PyPredictor {
  RunConfig cfg;
  Model model;

  explicit PyPredictor(const std::string& config_text) {
    cfg = parse_config_text(config_text);
    cfg.validate();
    Rng rng(cfg.seed);
    model = build_model(cfg, rng);
  }

  void load(const std::string& checkpoint_path) {
    load_checkpoint(checkpoint_path, model, nullptr, nullptr, nullptr);
  }

  std::vector<Eigen::VectorXd> predict(
      const std::vector<Eigen::VectorXd>& features,
      const std::optional<std::vector<Eigen::VectorXd>>& warm_params) const {
    VideoRecord video;
    video.id = "stream";
    video.length = static_cast<int>(features.size());
    video.static_feats = features;
    for (int t = 0; t < video.length; ++t) {
      video.gt_joints2d.push_back(
          Eigen::MatrixXd::Zero(model.body.num_joints(), 2));
    }
    if (warm_params) {
      video.gt_params = *warm_params;
      video.gt_params.resize(features.size(), mean_param_vector());
      video.flags.has_smpl = true;
    }
    return predict_video(model, cfg, video);
  }
};

py::dict motion_dict(const VideoRecord& rec) {
  py::dict d;
  d["id"] = rec.id;
  d["params"] = rec.gt_params;
  d["joints3d"] = rec.gt_joints3d;
  d["joints2d"] = rec.gt_joints2d;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Temporally embedded pose estimation core operations";

  m.attr("PARAM_DIM") = kParamDim;
  m.attr("POSE_DIM") = kPoseDim;
  m.attr("SHAPE_DIM") = kShapeDim;
  m.attr("CAMERA_DIM") = kCameraDim;

  // graph
  m.def(
      "hop_distance",
      [](int num_joints, const std::vector<std::pair<int, int>>& edges) {
        return hop_distance(make_graph(num_joints, edges));
      },
      py::arg("num_joints"), py::arg("edges"),
      "All-pairs hop counts; -1 marks unreachable pairs.");
  m.def("k_adjacency", &k_adjacency, py::arg("dist"), py::arg("k"));
  m.def("normalize_adjacency", &normalize_adjacency, py::arg("a"));
  m.def(
      "adjacency_scales",
      [](int num_joints, const std::vector<std::pair<int, int>>& edges,
         int max_scale) {
        return AdjacencySet::build(make_graph(num_joints, edges), max_scale)
            .normalized;
      },
      py::arg("num_joints"), py::arg("edges"), py::arg("max_scale"),
      "Normalized k-adjacency family for k = 0..max_scale.");

  // kinematics
  m.def("mean_params", &mean_param_vector);
  m.def("rodrigues", &rodrigues, py::arg("axis_angle"));
  m.def(
      "fk_joints",
      [](const Eigen::VectorXd& pose, const Eigen::VectorXd& shape) {
        return fk_joints(pose, shape, KinematicModel::default_model());
      },
      py::arg("pose"), py::arg("shape"),
      "Joint positions of the default 14-joint model.");
  m.def("project_2d", &project_2d, py::arg("joints"), py::arg("camera"));
  m.def("default_skeleton_edges", [] {
    return KinematicModel::default_model().skeleton.edges;
  });
  m.def("num_joints",
        [] { return KinematicModel::default_model().num_joints(); });

  // losses
  m.def("loss_mse", &loss_mse, py::arg("pred"), py::arg("gt"));
  m.def("loss_smpl", &loss_smpl, py::arg("pred"), py::arg("gt"));
  m.def("adversarial_loss", &adversarial_loss, py::arg("score"));
  m.def("discriminator_loss", &discriminator_loss, py::arg("real_scores"),
        py::arg("fake_scores"));
  m.def(
      "total_loss",
      [](double l2d, std::optional<double> l3d, std::optional<double> l_theta,
         std::optional<double> l_adv, bool has_3d, bool has_smpl) {
        SupervisionFlags flags;
        flags.has_3d = has_3d;
        flags.has_smpl = has_smpl;
        const auto b = total_loss(l2d, l3d, l_theta, l_adv, flags);
        py::dict d;
        d["l2d"] = b.l2d;
        d["l3d"] = b.l3d;
        d["l_theta"] = b.l_theta;
        d["l_adv"] = b.l_adv;
        d["total"] = b.total;
        return d;
      },
      py::arg("l2d"), py::arg("l3d") = std::nullopt,
      py::arg("l_theta") = std::nullopt, py::arg("l_adv") = std::nullopt,
      py::arg("has_3d") = false, py::arg("has_smpl") = false);

  // metrics (sequences as lists of N x 3 frames, millimeters)
  m.def(
      "mpjpe",
      [](const std::vector<Eigen::MatrixXd>& pred,
         const std::vector<Eigen::MatrixXd>& gt) {
        return mpjpe(make_sequence(pred), make_sequence(gt));
      },
      py::arg("pred"), py::arg("gt"));
  m.def(
      "pa_mpjpe",
      [](const std::vector<Eigen::MatrixXd>& pred,
         const std::vector<Eigen::MatrixXd>& gt) {
        return pa_mpjpe(make_sequence(pred), make_sequence(gt));
      },
      py::arg("pred"), py::arg("gt"));
  m.def(
      "accel_error",
      [](const std::vector<Eigen::MatrixXd>& pred,
         const std::vector<Eigen::MatrixXd>& gt) {
        return accel_error(make_sequence(pred), make_sequence(gt));
      },
      py::arg("pred"), py::arg("gt"));
  m.def("procrustes_align", &procrustes_align, py::arg("pred"), py::arg("gt"));

  // synthetic data
  m.def(
      "generate_motion",
      [](std::uint64_t seed, int length, bool jerky, double amp_low,
         double amp_high, const std::string& id) {
        MotionGenConfig mc;
        mc.seed = seed;
        mc.length = length;
        mc.id = id;
        mc.amp_low = amp_low;
        mc.amp_high = amp_high;
        mc.smoothness = jerky ? MotionClass::kJerky : MotionClass::kSmooth;
        return motion_dict(
            generate_motion(mc, KinematicModel::default_model()));
      },
      py::arg("seed"), py::arg("length"), py::arg("jerky") = false,
      py::arg("amp_low") = 0.1, py::arg("amp_high") = 0.6,
      py::arg("id") = "video");

  m.def("run_gradcheck", [](std::uint64_t seed, int instances) {
    py::list out;
    for (const auto& r : run_gradcheck_suites(seed, instances)) {
      py::dict d;
      d["name"] = r.name;
      d["max_rel_err"] = r.max_rel_err;
      d["coords"] = r.coords_checked;
      d["pass"] = r.pass;
      out.append(d);
    }
    return out;
  }, py::arg("seed") = 0, py::arg("instances") = 3);

  py::class_<PyDiscriminator>(m, "Discriminator")
      .def(py::init<const std::vector<int>&, int, int, int, std::uint64_t>(),
           py::arg("channels"), py::arg("gcn_scales") = 4,
           py::arg("g3d_scales") = 3, py::arg("tau") = 3, py::arg("seed") = 0)
      .def("score", &PyDiscriminator::score, py::arg("window"),
           "Raw realism score of a window of N x 3 joint frames.");

  py::class_<PyPredictor>(m, "Predictor")
      .def(py::init<const std::string&>(), py::arg("config_text"))
      .def("load", &PyPredictor::load, py::arg("checkpoint_path"))
      .def("predict", &PyPredictor::predict, py::arg("features"),
           py::arg("warm_params") = std::nullopt,
           "Streaming predictions; entry i is the parameter vector for "
           "frame past_frames + i.");
}
