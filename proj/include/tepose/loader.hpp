#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tepose/losses.hpp"
#include "tepose/rng.hpp"

namespace tepose {

// One training/eval video: per-frame static features, optional labels.
struct VideoRecord {
  std::string id;
  int length = 0;
  std::vector<Eigen::VectorXd> static_feats;          // length entries
  std::vector<Eigen::VectorXd> gt_params;             // empty or length
  std::vector<Eigen::MatrixXd> gt_joints3d;           // empty or length, N x 3
  std::vector<Eigen::MatrixXd> gt_joints2d;           // length entries, N x 2
  SupervisionFlags flags;

  void validate() const;
};

// Per-(video, frame) store of previously predicted parameters with the
// iteration stamp of the write.
class PredictionCache {
 public:
  void put(const std::string& video_id, int frame, const Eigen::VectorXd& params,
           long iteration);
  std::optional<Eigen::VectorXd> get(const std::string& video_id,
                                     int frame) const;
  bool contains(const std::string& video_id, int frame) const;
  long stamp(const std::string& video_id, int frame) const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    Eigen::VectorXd params;
    long iteration = -1;
  };
  std::map<std::pair<std::string, int>, Entry> entries_;
};

enum class ParamSource { kPredicted, kGroundTruth };
enum class GammaScope { kPerFrame, kPerSample };

struct LoaderState {
  long iteration = 0;
  int max_video_length = 505;  // H
  int past_frames = 5;         // T
  double gamma = 0.9;
  int batch_size = 32;
  GammaScope gamma_scope = GammaScope::kPerFrame;

  void validate() const;
};

// t = mod(j, H)
int frame_position(long iteration, int max_video_length);

struct BatchItem {
  int video_index = 0;
  int current_frame = 0;                  // t' = max(mod(j, H), T)
  std::vector<ParamSource> sources;       // T entries for the past frames
};

struct BatchPlan {
  std::vector<BatchItem> items;
  int sampled = 0;  // before squeezing
};

// Samples batch_size videos with replacement, drops those too short for
// the current frame position (squeezing), and draws each past frame's
// parameter source from the gamma mixture.
BatchPlan assemble_batch(const LoaderState& state,
                         const std::vector<VideoRecord>& videos,
                         const std::vector<int>& pool,
                         const PredictionCache& cache, Rng& rng);

enum class WarmStartSource { kGroundTruth, kMeanParams };

// Writes parameters for frames 0..T-1 of a video into the cache.
void warm_start(const VideoRecord& video, int past_frames,
                PredictionCache& cache, WarmStartSource source,
                long iteration = -1);

// round(ratio_3d * B) samples from the 3D pool, remainder from the 2D pool.
std::pair<int, int> mix_datasets(int batch_size, double ratio_3d,
                                 bool pool_3d_empty, bool pool_2d_empty);

// Resolves a batch item's past-frame parameter vectors from cache or
// ground truth. Throws on a cache miss.
std::vector<std::optional<Eigen::VectorXd>> resolve_sources(
    const VideoRecord& video, const BatchItem& item, int past_frames,
    const PredictionCache& cache);

}  // namespace tepose
