#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "trn/data.hpp"
#include "trn/error.hpp"
#include "trn/model.hpp"
#include "trn/training.hpp"

namespace trn {

// Merged run configuration. Sources, lowest precedence first: documented
// defaults, a `key = value` config file, command-line overrides. Unknown
// keys are errors.
struct RunConfig {
  // model
  std::size_t feature_dim = 16;
  std::size_t num_actions = 4;
  std::size_t hidden_dim = 32;
  std::size_t score_embed_dim = 16;
  std::size_t decoder_steps = 8;
  std::size_t sequence_len = 90;
  double alpha = 1.0;
  // training
  double lr = 0.0005;
  double weight_decay = 0.0005;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::string precision = "f64";  // f64 | f32 (training throughput switch)
  // generator
  std::size_t num_videos = 10;
  std::size_t frames_per_video = 600;
  double mean_segment_len = 24;
  double noise_sigma = 0.4;
  double precursor_strength = 0.0;
  std::size_t precursor_len = 0;
  double bg_self = 0.5;
  double act_to_bg = 0.8;
  double action_skew = 1.0;
  double mean_scale = 1.0;
  std::uint64_t world_seed = 7;  // fixes class means and chain across runs

  TrnConfig model_config() const {
    TrnConfig c;
    c.feature_dim = feature_dim;
    c.num_actions = num_actions;
    c.hidden_dim = hidden_dim;
    c.decoder_steps = decoder_steps;
    c.sequence_len = sequence_len;
    c.alpha = alpha;
    c.score_embed_dim = score_embed_dim;
    return c;
  }

  TrainConfig train_config() const {
    TrainConfig c;
    c.lr = lr;
    c.weight_decay = weight_decay;
    c.batch_size = batch_size;
    c.epochs = epochs;
    c.alpha = alpha;
    c.seed = seed;
    c.sequence_len = sequence_len;
    return c;
  }

  GeneratorConfig generator_config() const {
    GeneratorConfig g;
    g.num_videos = num_videos;
    g.frames_per_video = frames_per_video;
    g.num_actions = num_actions;
    g.feature_dim = feature_dim;
    g.transition = make_default_transition(num_actions, bg_self, act_to_bg, action_skew);
    g.mean_segment_len = mean_segment_len;
    g.class_means = make_class_means(num_actions, feature_dim, world_seed, mean_scale);
    g.noise_sigma = noise_sigma;
    g.precursor_strength = precursor_strength;
    g.precursor_len = precursor_len;
    g.seed = seed;
    return g;
  }
};

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  try {
    long long n = std::stoll(v);
    if (n < 0) throw ConfigError("config: " + key + " must be >= 0, got " + v);
    return static_cast<std::size_t>(n);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("config: " + key + " out of range: '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an unsigned integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Apply one key=value pair; the schema is this function.
inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_count;
  using detail::parse_real;
  using detail::parse_u64;
  if (key == "feature_dim") cfg.feature_dim = parse_count(key, value);
  else if (key == "num_actions") cfg.num_actions = parse_count(key, value);
  else if (key == "hidden_dim") cfg.hidden_dim = parse_count(key, value);
  else if (key == "score_embed_dim") cfg.score_embed_dim = parse_count(key, value);
  else if (key == "decoder_steps") cfg.decoder_steps = parse_count(key, value);
  else if (key == "sequence_len") cfg.sequence_len = parse_count(key, value);
  else if (key == "alpha") cfg.alpha = parse_real(key, value);
  else if (key == "lr") cfg.lr = parse_real(key, value);
  else if (key == "weight_decay") cfg.weight_decay = parse_real(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_count(key, value);
  else if (key == "epochs") cfg.epochs = parse_count(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "precision") {
    if (value != "f32" && value != "f64")
      throw ConfigError("config: precision must be f32 or f64, got '" + value + "'");
    cfg.precision = value;
  }
  else if (key == "num_videos") cfg.num_videos = parse_count(key, value);
  else if (key == "frames_per_video") cfg.frames_per_video = parse_count(key, value);
  else if (key == "mean_segment_len") cfg.mean_segment_len = parse_real(key, value);
  else if (key == "noise_sigma") cfg.noise_sigma = parse_real(key, value);
  else if (key == "precursor_strength") cfg.precursor_strength = parse_real(key, value);
  else if (key == "precursor_len") cfg.precursor_len = parse_count(key, value);
  else if (key == "bg_self") cfg.bg_self = parse_real(key, value);
  else if (key == "act_to_bg") cfg.act_to_bg = parse_real(key, value);
  else if (key == "action_skew") cfg.action_skew = parse_real(key, value);
  else if (key == "mean_scale") cfg.mean_scale = parse_real(key, value);
  else if (key == "world_seed") cfg.world_seed = parse_u64(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

// `key = value` lines, `#` comments, blank lines allowed.
inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config:" + std::to_string(lineno) + ": expected 'key = value', got '" +
                        line + "'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config:" + std::to_string(lineno) + ": empty key or value");
    try {
      apply_config_key(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
}

}  // namespace trn
