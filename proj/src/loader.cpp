#include "tepose/loader.hpp"

#include <stdexcept>

namespace tepose {

void VideoRecord::validate() const {
  if (length <= 0) throw std::invalid_argument("VideoRecord: empty video");
  if (static_cast<int>(static_feats.size()) != length ||
      static_cast<int>(gt_joints2d.size()) != length) {
    throw std::invalid_argument("VideoRecord: per-frame array length mismatch");
  }
  if (!gt_params.empty() && static_cast<int>(gt_params.size()) != length) {
    throw std::invalid_argument("VideoRecord: gt_params length mismatch");
  }
  if (!gt_joints3d.empty() && static_cast<int>(gt_joints3d.size()) != length) {
    throw std::invalid_argument("VideoRecord: gt_joints3d length mismatch");
  }
  if (flags.has_smpl && gt_params.empty()) {
    throw std::invalid_argument("VideoRecord: SMPL flag set without labels");
  }
  if (flags.has_3d && gt_joints3d.empty()) {
    throw std::invalid_argument("VideoRecord: 3D flag set without labels");
  }
}

void PredictionCache::put(const std::string& video_id, int frame,
                          const Eigen::VectorXd& params, long iteration) {
  entries_[{video_id, frame}] = Entry{params, iteration};
}

std::optional<Eigen::VectorXd> PredictionCache::get(const std::string& video_id,
                                                    int frame) const {
  auto it = entries_.find({video_id, frame});
  if (it == entries_.end()) return std::nullopt;
  return it->second.params;
}

bool PredictionCache::contains(const std::string& video_id, int frame) const {
  return entries_.count({video_id, frame}) > 0;
}

long PredictionCache::stamp(const std::string& video_id, int frame) const {
  auto it = entries_.find({video_id, frame});
  if (it == entries_.end()) {
    throw std::out_of_range("PredictionCache: no entry");
  }
  return it->second.iteration;
}

void LoaderState::validate() const {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("LoaderState: gamma must be in [0, 1]");
  }
  if (max_video_length < past_frames + 1) {
    throw std::invalid_argument("LoaderState: H must be >= T + 1");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("LoaderState: batch size must be >= 1");
  }
}

int frame_position(long iteration, int max_video_length) {
  if (max_video_length < 1) {
    throw std::invalid_argument("frame_position: H must be >= 1");
  }
  return static_cast<int>(iteration % max_video_length);
}

BatchPlan assemble_batch(const LoaderState& state,
                         const std::vector<VideoRecord>& videos,
                         const std::vector<int>& pool,
                         const PredictionCache& cache, Rng& rng) {
  state.validate();
  if (pool.empty()) {
    throw std::invalid_argument("assemble_batch: empty eligible pool");
  }
  const int t = std::max(frame_position(state.iteration, state.max_video_length),
                         state.past_frames);
  BatchPlan plan;
  plan.sampled = state.batch_size;
  for (int b = 0; b < state.batch_size; ++b) {
    const int vi = pool[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<long>(pool.size()) - 1))];
    const VideoRecord& video = videos.at(vi);
    if (video.length <= t) continue;  // squeeze
    BatchItem item;
    item.video_index = vi;
    item.current_frame = t;
    bool sample_predicted = false;
    if (state.gamma_scope == GammaScope::kPerSample) {
      sample_predicted = rng.bernoulli(state.gamma);
    }
    for (int f = 0; f < state.past_frames; ++f) {
      bool predicted = state.gamma_scope == GammaScope::kPerFrame
                           ? rng.bernoulli(state.gamma)
                           : sample_predicted;
      if (!predicted && video.gt_params.empty()) predicted = true;
      item.sources.push_back(predicted ? ParamSource::kPredicted
                                       : ParamSource::kGroundTruth);
    }
    // every predicted source must already be cached
    for (int f = 0; f < state.past_frames; ++f) {
      const int frame = item.current_frame - state.past_frames + f;
      if (item.sources[f] == ParamSource::kPredicted &&
          !cache.contains(video.id, frame)) {
        throw std::runtime_error("assemble_batch: cache miss for video " +
                                 video.id + " frame " + std::to_string(frame));
      }
    }
    plan.items.push_back(std::move(item));
  }
  return plan;
}

void warm_start(const VideoRecord& video, int past_frames,
                PredictionCache& cache, WarmStartSource source,
                long iteration) {
  if (video.length < past_frames + 1) {
    throw std::invalid_argument("warm_start: video too short");
  }
  for (int f = 0; f < past_frames; ++f) {
    if (source == WarmStartSource::kGroundTruth && !video.gt_params.empty()) {
      cache.put(video.id, f, video.gt_params[f], iteration);
    } else {
      cache.put(video.id, f, mean_param_vector(), iteration);
    }
  }
}

std::pair<int, int> mix_datasets(int batch_size, double ratio_3d,
                                 bool pool_3d_empty, bool pool_2d_empty) {
  if (pool_3d_empty && pool_2d_empty) {
    throw std::invalid_argument("mix_datasets: both pools empty");
  }
  if (pool_2d_empty) return {batch_size, 0};
  if (pool_3d_empty) return {0, batch_size};
  const int n3d = static_cast<int>(std::lround(ratio_3d * batch_size));
  return {n3d, batch_size - n3d};
}

std::vector<std::optional<Eigen::VectorXd>> resolve_sources(
    const VideoRecord& video, const BatchItem& item, int past_frames,
    const PredictionCache& cache) {
  std::vector<std::optional<Eigen::VectorXd>> out(past_frames);
  for (int f = 0; f < past_frames; ++f) {
    const int frame = item.current_frame - past_frames + f;
    if (item.sources[f] == ParamSource::kGroundTruth) {
      out[f] = video.gt_params.at(frame);
    } else {
      auto cached = cache.get(video.id, frame);
      if (!cached) {
        throw std::runtime_error("resolve_sources: cache miss for video " +
                                 video.id + " frame " + std::to_string(frame));
      }
      out[f] = *cached;
    }
  }
  return out;
}

}  // namespace tepose
