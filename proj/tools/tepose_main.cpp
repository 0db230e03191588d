#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tepose/gradcheck.hpp"
#include "tepose/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tepose;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "key = value config file");
  cmd->add_option("--out", a.out_dir, "output directory");
  cmd->add_option("--checkpoint", a.checkpoint, "checkpoint path");
  cmd->add_option("--seed", a.seed, "rng seed")
      ->each([&a](const std::string&) { a.seed_set = true; });
  cmd->add_option("overrides", a.overrides, "key=value config overrides");
}

RunConfig build_config(const CommonArgs& a) {
  RunConfig cfg;
  if (!a.config_path.empty()) cfg = parse_config_file(a.config_path, cfg);
  if (a.seed_set) cfg.seed = a.seed;
  for (const auto& ov : a.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("override is not key=value: " + ov);
    }
    apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  cfg.out_dir = a.out_dir;
  if (!a.checkpoint.empty()) cfg.checkpoint_path = a.checkpoint;
  cfg.validate();
  return cfg;
}

void write_run_json(const RunConfig& cfg, const std::string& command,
                    const json& extra) {
  json j;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["config"] = config_to_string(cfg);
  j["status"] = "ok";
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = *it;
  std::ofstream os(cfg.out_dir + "/run.json");
  os << j.dump(2) << "\n";
}

void write_metrics_csv(const std::string& path, const std::string& run,
                       const std::string& dataset, const EvalResult& r) {
  const bool fresh = !fs::exists(path);
  std::ofstream os(path, std::ios::app);
  if (fresh) os << "run,dataset,mpjpe,pa_mpjpe,accel,mpvpe\n";
  os << run << "," << dataset << "," << r.mpjpe_mm << "," << r.pa_mpjpe_mm
     << "," << r.accel_mm << ",n/a\n";
}

struct LoadedData {
  DatasetOnDisk train;
  std::vector<VideoRecord> eval_videos;
  std::vector<FeatureSeq> real_pool;
};

LoadedData load_data(RunConfig& cfg, bool need_train) {
  LoadedData d;
  if (cfg.dataset_dir.empty() && need_train) {
    // no dataset configured: generate the synthetic corpus in-place
    const std::string data_dir = cfg.out_dir + "/data";
    generate_synthetic_datasets(cfg, data_dir);
    cfg.dataset_dir = data_dir + "/train";
    cfg.eval_dataset_dir = data_dir + "/eval";
    cfg.real_pool_path = data_dir + "/real_pool.bin";
  }
  if (need_train) {
    d.train = read_dataset(cfg.dataset_dir);
    if (!cfg.real_pool_path.empty() && fs::exists(cfg.real_pool_path)) {
      d.real_pool = read_real_pool(cfg.real_pool_path);
    }
  }
  const std::string eval_dir =
      cfg.eval_dataset_dir.empty() ? cfg.dataset_dir : cfg.eval_dataset_dir;
  if (!eval_dir.empty()) d.eval_videos = read_dataset(eval_dir).videos;
  return d;
}

void write_predictions(const RunConfig& cfg, const std::string& id,
                       const std::vector<Eigen::VectorXd>& preds) {
  write_tensor_file(cfg.out_dir + "/pred_" + id + ".bin",
                    tensor_from_vectors(preds));
}

int cmd_train(CommonArgs& a) {
  RunConfig cfg = build_config(a);
  fs::create_directories(cfg.out_dir);
  LoadedData data = load_data(cfg, true);

  Rng rng(cfg.seed);
  Model model = build_model(cfg, rng);
  Adam opt_p(cfg.lr_predictor, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  Adam opt_d(cfg.lr_discriminator, cfg.adam_beta1, cfg.adam_beta2,
             cfg.adam_eps);
  if (!cfg.checkpoint_path.empty() && fs::exists(cfg.checkpoint_path)) {
    load_checkpoint(cfg.checkpoint_path, model, &opt_p, &opt_d, &rng);
  }

  TrainOutcome outcome =
      train_model(cfg, model, data.train.videos, data.train.pool_3d,
                  data.train.pool_2d, data.real_pool, data.eval_videos,
                  &std::cout);

  const std::string ckpt = cfg.checkpoint_path.empty()
                               ? cfg.out_dir + "/final.ckpt"
                               : cfg.checkpoint_path;
  save_checkpoint(ckpt, model, opt_p, opt_d, rng, outcome.iterations);
  write_metrics_csv(cfg.out_dir + "/metrics.csv", "train", "eval",
                    outcome.final_eval);
  {
    std::ofstream hs(cfg.out_dir + "/history.csv");
    hs << "epoch,total,l2d,l3d,ltheta,ladv,ldisc,mpjpe,pa_mpjpe,accel,lr\n";
    for (const auto& e : outcome.epochs) {
      hs << e.epoch << "," << e.mean_total << "," << e.mean_l2d << ","
         << e.mean_l3d << "," << e.mean_ltheta << "," << e.mean_ladv << ","
         << e.mean_ldisc << "," << e.eval_mpjpe << "," << e.eval_pa_mpjpe
         << "," << e.eval_accel << "," << e.lr_predictor << "\n";
    }
  }
  write_run_json(cfg, "train",
                 {{"iterations", outcome.iterations},
                  {"checkpoint", ckpt},
                  {"final_mpjpe_mm", outcome.final_eval.mpjpe_mm},
                  {"final_pa_mpjpe_mm", outcome.final_eval.pa_mpjpe_mm},
                  {"final_accel_mm", outcome.final_eval.accel_mm}});
  return 0;
}

int cmd_eval(CommonArgs& a) {
  RunConfig cfg = build_config(a);
  fs::create_directories(cfg.out_dir);
  LoadedData data = load_data(cfg, false);
  if (data.eval_videos.empty()) {
    throw std::invalid_argument("eval: no dataset configured");
  }
  Rng rng(cfg.seed);
  Model model = build_model(cfg, rng);
  if (cfg.checkpoint_path.empty()) {
    throw std::invalid_argument("eval: --checkpoint is required");
  }
  load_checkpoint(cfg.checkpoint_path, model, nullptr, nullptr, nullptr);
  for (const auto& v : data.eval_videos) {
    write_predictions(cfg, v.id, predict_video(model, cfg, v));
  }
  const EvalResult r = evaluate_model(model, cfg, data.eval_videos);
  write_metrics_csv(cfg.out_dir + "/metrics.csv", "eval", "eval", r);
  write_run_json(cfg, "eval",
                 {{"mpjpe_mm", r.mpjpe_mm},
                  {"pa_mpjpe_mm", r.pa_mpjpe_mm},
                  {"accel_mm", r.accel_mm},
                  {"videos", r.videos}});
  std::cout << "mpjpe " << r.mpjpe_mm << " pa_mpjpe " << r.pa_mpjpe_mm
            << " accel " << r.accel_mm << "\n";
  return 0;
}

int cmd_infer(CommonArgs& a) {
  RunConfig cfg = build_config(a);
  fs::create_directories(cfg.out_dir);
  LoadedData data = load_data(cfg, false);
  if (data.eval_videos.empty()) {
    throw std::invalid_argument("infer: no dataset configured");
  }
  Rng rng(cfg.seed);
  Model model = build_model(cfg, rng);
  if (cfg.checkpoint_path.empty()) {
    throw std::invalid_argument("infer: --checkpoint is required");
  }
  load_checkpoint(cfg.checkpoint_path, model, nullptr, nullptr, nullptr);
  // explicit frame-by-frame streaming: each prediction is emitted before
  // the next frame is read
  for (const auto& v : data.eval_videos) {
    StreamPredictor sp(model.enc, model.reg, cfg.past_frames(), cfg.n_iter,
                       cfg.feedback);
    std::vector<Eigen::VectorXd> warm(cfg.past_frames());
    for (int f = 0; f < cfg.past_frames(); ++f) {
      warm[f] = v.gt_params.empty() ? mean_param_vector() : v.gt_params[f];
    }
    sp.warm_start(warm);
    std::vector<Eigen::VectorXd> preds;
    for (int t = 0; t < v.length; ++t) {
      auto p = sp.push_frame(v.static_feats[t]);
      if (p) preds.push_back(std::move(*p));
    }
    write_predictions(cfg, v.id, preds);
    std::cout << v.id << ": " << preds.size() << " frames\n";
  }
  write_run_json(cfg, "infer",
                 {{"videos", static_cast<int>(data.eval_videos.size())}});
  return 0;
}

int cmd_gradcheck(CommonArgs& a) {
  RunConfig cfg = build_config(a);
  fs::create_directories(cfg.out_dir);
  const auto results = run_gradcheck_suites(cfg.seed, 20);
  bool all_pass = true;
  json jr = json::array();
  for (const auto& r : results) {
    std::cout << "gradcheck " << r.name << ": max_rel_err=" << r.max_rel_err
              << " coords=" << r.coords_checked << " "
              << (r.pass ? "PASS" : "FAIL") << "\n";
    jr.push_back({{"name", r.name},
                  {"max_rel_err", r.max_rel_err},
                  {"coords", r.coords_checked},
                  {"pass", r.pass}});
    all_pass = all_pass && r.pass;
  }
  write_run_json(cfg, "gradcheck", {{"suites", jr}, {"all_pass", all_pass}});
  if (!all_pass) throw NumericalError("gradient check failed");
  return 0;
}

int cmd_synth(CommonArgs& a) {
  RunConfig cfg = build_config(a);
  fs::create_directories(cfg.out_dir);
  generate_synthetic_datasets(cfg, cfg.out_dir);
  write_run_json(cfg, "synth",
                 {{"train_dir", cfg.out_dir + "/train"},
                  {"eval_dir", cfg.out_dir + "/eval"},
                  {"real_pool", cfg.out_dir + "/real_pool.bin"}});
  std::cout << "dataset written to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporally embedded 3d pose and shape estimation"};
  app.require_subcommand(1);

  CommonArgs args[5];
  auto* train = app.add_subcommand("train", "train a model");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* infer = app.add_subcommand("infer", "streaming inference");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference suite");
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(train, args[0]);
  add_common(eval, args[1]);
  add_common(infer, args[2]);
  add_common(gradcheck, args[3]);
  add_common(synth, args[4]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return cmd_train(args[0]);
    if (eval->parsed()) return cmd_eval(args[1]);
    if (infer->parsed()) return cmd_infer(args[2]);
    if (gradcheck->parsed()) return cmd_gradcheck(args[3]);
    if (synth->parsed()) return cmd_synth(args[4]);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
