#include "tepose/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tepose {

void RunConfig::validate() const {
  if (window_frames < 2) {
    throw std::invalid_argument("config: window_frames must be >= 2");
  }
  if (max_video_length < window_frames) {
    throw std::invalid_argument("config: max_video_length must be >= window");
  }
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("config: gamma must be in [0, 1]");
  }
  if (gamma_scope != "per_frame" && gamma_scope != "per_sample") {
    throw std::invalid_argument("config: gamma_scope must be per_frame|per_sample");
  }
  if (batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
  if (ratio_3d < 0.0 || ratio_3d > 1.0) {
    throw std::invalid_argument("config: ratio_3d must be in [0, 1]");
  }
  if (feature_dim < 1 || hidden < 1 || regressor_hidden < 1) {
    throw std::invalid_argument("config: dimensions must be positive");
  }
  if (gru_layers < 1) throw std::invalid_argument("config: gru_layers >= 1");
  if (n_iter < 1) throw std::invalid_argument("config: n_iter >= 1");
  if (disc_channels.size() != 4) {
    throw std::invalid_argument("config: disc_channels needs 4 entries");
  }
  if (tau < 1 || tau % 2 == 0) {
    throw std::invalid_argument("config: tau must be odd and >= 1");
  }
  if (gcn_scales < 0 || g3d_scales < 0) {
    throw std::invalid_argument("config: scale counts must be >= 0");
  }
  if (lr_predictor <= 0.0 || lr_discriminator <= 0.0) {
    throw std::invalid_argument("config: learning rates must be positive");
  }
  if (epochs < 1 || iterations_per_epoch < 1) {
    throw std::invalid_argument("config: epochs/iterations must be >= 1");
  }
  if (synth_video_length < window_frames) {
    throw std::invalid_argument("config: synth videos shorter than window");
  }
}

LoaderState RunConfig::loader_state(long iteration) const {
  LoaderState s;
  s.iteration = iteration;
  s.max_video_length = max_video_length;
  s.past_frames = past_frames();
  s.gamma = gamma;
  s.batch_size = batch_size;
  s.gamma_scope = gamma_scope == "per_sample" ? GammaScope::kPerSample
                                              : GammaScope::kPerFrame;
  return s;
}

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
  auto as_int = [&] { return std::stoi(value); };
  auto as_double = [&] { return std::stod(value); };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key);
  };
  if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "window_frames") cfg.window_frames = as_int();
  else if (key == "max_video_length") cfg.max_video_length = as_int();
  else if (key == "gamma") cfg.gamma = as_double();
  else if (key == "gamma_scope") cfg.gamma_scope = value;
  else if (key == "batch_size") cfg.batch_size = as_int();
  else if (key == "ratio_3d") cfg.ratio_3d = as_double();
  else if (key == "epoch_subsample") cfg.epoch_subsample = as_double();
  else if (key == "feature_dim") cfg.feature_dim = as_int();
  else if (key == "hidden") cfg.hidden = as_int();
  else if (key == "regressor_hidden") cfg.regressor_hidden = as_int();
  else if (key == "gru_layers") cfg.gru_layers = as_int();
  else if (key == "n_iter") cfg.n_iter = as_int();
  else if (key == "bidirectional") cfg.bidirectional = as_bool();
  else if (key == "feedback") cfg.feedback = as_bool();
  else if (key == "adversarial") cfg.adversarial = as_bool();
  else if (key == "disc_channels") {
    std::vector<int> ch;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) ch.push_back(std::stoi(tok));
    cfg.disc_channels = ch;
  }
  else if (key == "gcn_scales") cfg.gcn_scales = as_int();
  else if (key == "g3d_scales") cfg.g3d_scales = as_int();
  else if (key == "tau") cfg.tau = as_int();
  else if (key == "lr_predictor") cfg.lr_predictor = as_double();
  else if (key == "lr_discriminator") cfg.lr_discriminator = as_double();
  else if (key == "adam_beta1") cfg.adam_beta1 = as_double();
  else if (key == "adam_beta2") cfg.adam_beta2 = as_double();
  else if (key == "adam_eps") cfg.adam_eps = as_double();
  else if (key == "epochs") cfg.epochs = as_int();
  else if (key == "iterations_per_epoch") cfg.iterations_per_epoch = as_int();
  else if (key == "plateau_patience") cfg.plateau_patience = as_int();
  else if (key == "lr_decay") cfg.lr_decay = as_double();
  else if (key == "synth_train_3d") cfg.synth_train_3d = as_int();
  else if (key == "synth_train_2d") cfg.synth_train_2d = as_int();
  else if (key == "synth_eval") cfg.synth_eval = as_int();
  else if (key == "synth_video_length") cfg.synth_video_length = as_int();
  else if (key == "synth_real_videos") cfg.synth_real_videos = as_int();
  else if (key == "feat_noise") cfg.feat_noise = as_double();
  else if (key == "feat_bias") cfg.feat_bias = as_double();
  else if (key == "dataset_dir") cfg.dataset_dir = value;
  else if (key == "eval_dataset_dir") cfg.eval_dataset_dir = value;
  else if (key == "real_pool_path") cfg.real_pool_path = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "checkpoint_path") cfg.checkpoint_path = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key = value");
    }
    apply_override(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig parse_config_file(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text, base);
}

std::string config_to_string(const RunConfig& cfg) {
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n";
  os << "window_frames = " << cfg.window_frames << "\n";
  os << "max_video_length = " << cfg.max_video_length << "\n";
  os << "gamma = " << cfg.gamma << "\n";
  os << "gamma_scope = " << cfg.gamma_scope << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "ratio_3d = " << cfg.ratio_3d << "\n";
  os << "epoch_subsample = " << cfg.epoch_subsample << "\n";
  os << "feature_dim = " << cfg.feature_dim << "\n";
  os << "hidden = " << cfg.hidden << "\n";
  os << "regressor_hidden = " << cfg.regressor_hidden << "\n";
  os << "gru_layers = " << cfg.gru_layers << "\n";
  os << "n_iter = " << cfg.n_iter << "\n";
  os << "bidirectional = " << (cfg.bidirectional ? "true" : "false") << "\n";
  os << "feedback = " << (cfg.feedback ? "true" : "false") << "\n";
  os << "adversarial = " << (cfg.adversarial ? "true" : "false") << "\n";
  os << "disc_channels = " << cfg.disc_channels[0] << ","
     << cfg.disc_channels[1] << "," << cfg.disc_channels[2] << ","
     << cfg.disc_channels[3] << "\n";
  os << "gcn_scales = " << cfg.gcn_scales << "\n";
  os << "g3d_scales = " << cfg.g3d_scales << "\n";
  os << "tau = " << cfg.tau << "\n";
  os << "lr_predictor = " << cfg.lr_predictor << "\n";
  os << "lr_discriminator = " << cfg.lr_discriminator << "\n";
  os << "epochs = " << cfg.epochs << "\n";
  os << "iterations_per_epoch = " << cfg.iterations_per_epoch << "\n";
  os << "plateau_patience = " << cfg.plateau_patience << "\n";
  os << "lr_decay = " << cfg.lr_decay << "\n";
  return os.str();
}

}  // namespace tepose
