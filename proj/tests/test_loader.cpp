#include <doctest.h>

#include "tepose/loader.hpp"
#include "tepose/kinematics.hpp"

using namespace tepose;

namespace {

VideoRecord make_video(const std::string& id, int length, bool with_params) {
  VideoRecord v;
  v.id = id;
  v.length = length;
  for (int t = 0; t < length; ++t) {
    v.static_feats.push_back(Eigen::VectorXd::Constant(4, t));
    v.gt_joints2d.push_back(Eigen::MatrixXd::Zero(3, 2));
    if (with_params) {
      v.gt_params.push_back(Eigen::VectorXd::Constant(kParamDim, t));
    }
  }
  v.flags.has_smpl = with_params;
  v.validate();
  return v;
}

}  // namespace

TEST_CASE("frame position wraps at the maximum length") {
  CHECK(frame_position(0, 505) == 0);
  CHECK(frame_position(504, 505) == 504);
  CHECK(frame_position(505, 505) == 0);
  CHECK(frame_position(1011, 505) == 1);
  CHECK_THROWS(frame_position(3, 0));
}

TEST_CASE("current frame clamps to the warm-start window") {
  std::vector<VideoRecord> videos = {make_video("a", 50, true)};
  std::vector<int> pool = {0};
  PredictionCache cache;
  Rng rng(1);
  LoaderState state;
  state.max_video_length = 20;
  state.past_frames = 5;
  state.gamma = 0.0;  // ground-truth sources only: no cache needed
  state.batch_size = 4;

  for (long j = 0; j <= 40; ++j) {
    state.iteration = j;
    const auto plan = assemble_batch(state, videos, pool, cache, rng);
    const int expect = std::max(static_cast<int>(j % 20), 5);
    for (const auto& item : plan.items) {
      CHECK(item.current_frame == expect);
      CHECK(item.sources.size() == 5);
    }
  }
}

TEST_CASE("squeezing drops exactly the too-short selections") {
  std::vector<VideoRecord> videos = {make_video("long", 40, true),
                                     make_video("short", 8, true)};
  std::vector<int> pool = {0, 1};
  PredictionCache cache;
  Rng rng(2);
  LoaderState state;
  state.max_video_length = 40;
  state.past_frames = 5;
  state.gamma = 0.0;
  state.batch_size = 64;
  state.iteration = 20;  // t' = 20: the short video is ineligible

  const auto plan = assemble_batch(state, videos, pool, cache, rng);
  CHECK(plan.sampled == 64);
  CHECK(plan.items.size() < 64);
  int short_count = 0;
  for (const auto& item : plan.items) {
    CHECK(item.video_index == 0);
  }
  // every dropped selection must have been the short video
  short_count = 64 - static_cast<int>(plan.items.size());
  CHECK(short_count > 0);
}

TEST_CASE("gamma mixture rate over many draws") {
  std::vector<VideoRecord> videos = {make_video("a", 30, true)};
  std::vector<int> pool = {0};
  PredictionCache cache;
  for (int f = 0; f < 30; ++f) {
    cache.put("a", f, mean_param_vector(), -1);
  }
  Rng rng(3);
  LoaderState state;
  state.max_video_length = 30;
  state.past_frames = 5;
  state.gamma = 0.9;
  state.batch_size = 10;
  state.iteration = 10;

  long predicted = 0, total = 0;
  while (total < 10000) {
    const auto plan = assemble_batch(state, videos, pool, cache, rng);
    for (const auto& item : plan.items) {
      for (auto s : item.sources) {
        predicted += (s == ParamSource::kPredicted);
        ++total;
      }
    }
  }
  const double rate = static_cast<double>(predicted) / total;
  CHECK(rate == doctest::Approx(0.9).epsilon(0.0223));  // +-0.02 absolute
}

TEST_CASE("unlabeled videos always use predicted sources") {
  std::vector<VideoRecord> videos = {make_video("a", 30, false)};
  std::vector<int> pool = {0};
  PredictionCache cache;
  for (int f = 0; f < 30; ++f) cache.put("a", f, mean_param_vector(), -1);
  Rng rng(4);
  LoaderState state;
  state.max_video_length = 30;
  state.past_frames = 5;
  state.gamma = 0.1;  // would mostly pick ground truth if it existed
  state.batch_size = 8;
  state.iteration = 12;
  const auto plan = assemble_batch(state, videos, pool, cache, rng);
  for (const auto& item : plan.items) {
    for (auto s : item.sources) CHECK(s == ParamSource::kPredicted);
  }
}

TEST_CASE("per-sample gamma scope draws one source per item") {
  std::vector<VideoRecord> videos = {make_video("a", 30, true)};
  std::vector<int> pool = {0};
  PredictionCache cache;
  for (int f = 0; f < 30; ++f) cache.put("a", f, mean_param_vector(), -1);
  Rng rng(5);
  LoaderState state;
  state.max_video_length = 30;
  state.past_frames = 5;
  state.gamma = 0.5;
  state.batch_size = 32;
  state.iteration = 10;
  state.gamma_scope = GammaScope::kPerSample;
  const auto plan = assemble_batch(state, videos, pool, cache, rng);
  for (const auto& item : plan.items) {
    for (auto s : item.sources) CHECK(s == item.sources[0]);
  }
}

TEST_CASE("cache misses are loud") {
  std::vector<VideoRecord> videos = {make_video("a", 30, true)};
  std::vector<int> pool = {0};
  PredictionCache cache;  // empty: no warm start
  Rng rng(6);
  LoaderState state;
  state.max_video_length = 30;
  state.past_frames = 5;
  state.gamma = 1.0;  // always predicted
  state.batch_size = 2;
  state.iteration = 10;
  CHECK_THROWS(assemble_batch(state, videos, pool, cache, rng));
  CHECK_THROWS(assemble_batch(state, videos, {}, cache, rng));
}

TEST_CASE("warm start fills the first frames") {
  const auto v = make_video("a", 12, true);
  PredictionCache cache;
  warm_start(v, 5, cache, WarmStartSource::kGroundTruth, -1);
  for (int f = 0; f < 5; ++f) {
    REQUIRE(cache.contains("a", f));
    CHECK(*cache.get("a", f) == v.gt_params[f]);
    CHECK(cache.stamp("a", f) == -1);
  }
  CHECK(!cache.contains("a", 5));

  PredictionCache mean_cache;
  warm_start(v, 5, mean_cache, WarmStartSource::kMeanParams, 3);
  CHECK(*mean_cache.get("a", 0) == mean_param_vector());
  CHECK(mean_cache.stamp("a", 0) == 3);
}

TEST_CASE("dataset mixing ratios") {
  CHECK(mix_datasets(32, 0.4, false, false) == std::pair<int, int>(13, 19));
  CHECK(mix_datasets(16, 0.4, false, false) == std::pair<int, int>(6, 10));
  CHECK(mix_datasets(16, 0.4, true, false) == std::pair<int, int>(0, 16));
  CHECK(mix_datasets(16, 0.4, false, true) == std::pair<int, int>(16, 0));
  CHECK_THROWS(mix_datasets(16, 0.4, true, true));
}

TEST_CASE("resolve_sources reads the requested mixture") {
  const auto v = make_video("a", 20, true);
  PredictionCache cache;
  cache.put("a", 5, Eigen::VectorXd::Constant(kParamDim, -7.0), 0);
  BatchItem item;
  item.video_index = 0;
  item.current_frame = 7;
  item.sources = {ParamSource::kPredicted, ParamSource::kGroundTruth};
  const auto out = resolve_sources(v, item, 2, cache);
  REQUIRE(out.size() == 2);
  CHECK((*out[0])[0] == -7.0);            // frame 5 from the cache
  CHECK(*out[1] == v.gt_params[6]);       // frame 6 from ground truth

  item.sources = {ParamSource::kPredicted, ParamSource::kPredicted};
  CHECK_THROWS(resolve_sources(v, item, 2, cache));  // frame 6 not cached
}
