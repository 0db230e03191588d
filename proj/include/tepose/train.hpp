#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tepose/config.hpp"
#include "tepose/discriminator.hpp"
#include "tepose/encoder.hpp"
#include "tepose/io.hpp"
#include "tepose/kinematics.hpp"
#include "tepose/loader.hpp"
#include "tepose/metrics.hpp"
#include "tepose/synth.hpp"

namespace tepose {

// Raised when a loss or gradient goes non-finite; the CLI maps it to
// exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TensorRef {
  std::string name;
  double* data = nullptr;
  std::ptrdiff_t size = 0;
};

std::vector<TensorRef> collect_params(GruStackParams& s,
                                      const std::string& prefix);
std::vector<TensorRef> collect_predictor(EncoderParams& enc,
                                         RegressorParams& reg);
std::vector<TensorRef> collect_predictor_grads(EncoderGrads& enc,
                                               RegressorGrads& reg);
std::vector<TensorRef> collect_discriminator(DiscriminatorParams& p);
std::vector<TensorRef> collect_discriminator_grads(DiscriminatorGrads& g);

class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<TensorRef>& params,
            const std::vector<TensorRef>& grads);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void save(TensorArchive& a, const std::string& prefix) const;
  void load(const TensorArchive& a, const std::string& prefix,
            const std::vector<TensorRef>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct Model {
  EncoderParams enc;
  RegressorParams reg;
  DiscriminatorParams disc;
  KinematicModel body;
  DiscriminatorAdjacency adj;
};

Model build_model(const RunConfig& cfg, Rng& rng);

void save_checkpoint(const std::string& path, Model& model, const Adam& opt_p,
                     const Adam& opt_d, const Rng& rng, long iteration);
// Parameter shapes must already match (build the model from the same
// config first).
long load_checkpoint(const std::string& path, Model& model, Adam* opt_p,
                     Adam* opt_d, Rng* rng);

// Causal frame-by-frame predictor shared by offline evaluation and
// streaming inference, so the two paths are bitwise identical.
class StreamPredictor {
 public:
  StreamPredictor(const EncoderParams& enc, const RegressorParams& reg,
                  int past_frames, int n_iter, bool feedback);

  // Parameters for frames 0..T-1, consumed before predictions start.
  void warm_start(const std::vector<Eigen::VectorXd>& params);

  // Returns the prediction for this frame, or nullopt during the
  // warm-start window.
  std::optional<Eigen::VectorXd> push_frame(const Eigen::VectorXd& static_feat);

 private:
  const EncoderParams& enc_;
  const RegressorParams& reg_;
  int past_frames_;
  int n_iter_;
  bool feedback_;
  long next_frame_ = 0;
  std::deque<Eigen::VectorXd> feats_;   // trailing window, at most T+1
  std::deque<Eigen::VectorXd> params_;  // parameters for the past frames
};

// Frame-by-frame eval-mode predictions for a stored video; entry i holds
// the prediction for frame T + i.
std::vector<Eigen::VectorXd> predict_video(const Model& model,
                                           const RunConfig& cfg,
                                           const VideoRecord& video);

struct EvalResult {
  double mpjpe_mm = 0.0;
  double pa_mpjpe_mm = 0.0;
  double accel_mm = 0.0;
  int videos = 0;
};

EvalResult evaluate_model(const Model& model, const RunConfig& cfg,
                          const std::vector<VideoRecord>& videos);

// Metrics of the untrained-style constant prediction (mean parameters),
// the baseline the toy training is measured against.
EvalResult evaluate_mean_baseline(const Model& model, const RunConfig& cfg,
                                  const std::vector<VideoRecord>& videos);

struct EpochLog {
  int epoch = 0;
  double mean_total = 0.0;
  double mean_l2d = 0.0;
  double mean_l3d = 0.0;
  double mean_ltheta = 0.0;
  double mean_ladv = 0.0;
  double mean_ldisc = 0.0;
  double eval_mpjpe = 0.0;
  double eval_pa_mpjpe = 0.0;
  double eval_accel = 0.0;
  double lr_predictor = 0.0;
};

struct TrainOutcome {
  std::vector<EpochLog> epochs;
  EvalResult final_eval;
  long iterations = 0;
};

// Alternating generator/discriminator training with the sequential
// loading schedule. eval_videos drive the plateau-based LR decay.
TrainOutcome train_model(const RunConfig& cfg, Model& model,
                         std::vector<VideoRecord>& train_videos,
                         const std::vector<int>& pool_3d,
                         const std::vector<int>& pool_2d,
                         const std::vector<FeatureSeq>& real_pool,
                         const std::vector<VideoRecord>& eval_videos,
                         std::ostream* log = nullptr);

// Writes train/, eval/ dataset directories and real_pool.bin.
void generate_synthetic_datasets(const RunConfig& cfg, const std::string& dir);

}  // namespace tepose
