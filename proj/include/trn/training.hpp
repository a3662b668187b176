#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "trn/adam.hpp"
#include "trn/any_model.hpp"
#include "trn/data.hpp"
#include "trn/error.hpp"
#include "trn/metrics.hpp"
#include "trn/model.hpp"
#include "trn/ops.hpp"
#include "trn/rng.hpp"

namespace trn {

struct TrainConfig {
  double lr = 0.0005;
  double weight_decay = 0.0005;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  double alpha = 1.0;
  std::uint64_t seed = 1;
  std::size_t sequence_len = 90;  // le

  // lr 0 is allowed as a degenerate no-op run (useful for harness tests).
  void validate() const {
    if (lr < 0.0) throw ConfigError("train: lr must be >= 0");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (sequence_len < 2) throw ConfigError("train: sequence_len must be >= 2");
  }
};

// One training window. ext_labels/ext_valid run over the window plus ld
// lookahead positions; the mask marks exactly the positions that fall
// beyond the end of the source video.
template <typename S>
struct TrainingSample {
  std::vector<Vector<S>> frames;
  std::vector<int> ext_labels;
  std::vector<unsigned char> ext_valid;
};

// Chop augmentation: drop a random prefix of length delta in [1, le], then
// split the rest into non-overlapping windows of exactly le frames.
// Videos no longer than le yield no windows.
inline std::vector<std::pair<std::size_t, std::size_t>> chop_windows(std::size_t video_len,
                                                                     std::size_t le,
                                                                     std::size_t delta) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (video_len <= le) return out;
  const std::size_t n = (video_len - delta) / le;
  for (std::size_t k = 0; k < n; ++k)
    out.emplace_back(delta + k * le, delta + (k + 1) * le);
  return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> chop_augment(std::size_t video_len,
                                                                     std::size_t le, Rng& rng) {
  const std::size_t delta =
      static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(le)));
  return chop_windows(video_len, le, delta);
}

// Eq-style joint loss over one window of outputs: current cross-entropy
// plus alpha times the masked anticipation cross-entropies.
template <typename S>
double sequence_loss(const std::vector<StepOutput<S>>& outputs,
                     const std::vector<int>& ext_labels,
                     const std::vector<unsigned char>& ext_valid, double alpha) {
  const std::size_t T = outputs.size();
  if (ext_labels.size() < T || ext_valid.size() != ext_labels.size())
    throw ContractError("sequence_loss: " + std::to_string(T) + " outputs but " +
                        std::to_string(ext_labels.size()) + " labels and " +
                        std::to_string(ext_valid.size()) + " validity flags");
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    loss += cross_entropy(outputs[t].p, static_cast<std::size_t>(ext_labels[t]));
    const std::size_t ld = outputs[t].anticipated.size();
    for (std::size_t i = 1; i <= ld; ++i) {
      if (t + i < ext_labels.size() && ext_valid[t + i])
        loss += alpha * cross_entropy(outputs[t].anticipated[i - 1],
                                      static_cast<std::size_t>(ext_labels[t + i]));
    }
  }
  return loss;
}

// Build the sample for window [begin, end) of a video. Anticipation
// targets come from the source video's labels even past the window; only
// positions past the video's end are masked.
template <typename S>
TrainingSample<S> make_sample(const Video& video, std::size_t begin, std::size_t end,
                              std::size_t ld) {
  TrainingSample<S> s;
  const std::size_t T = end - begin;
  s.frames.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    s.frames[t].resize(video.dim);
    const float* row = video.frame(begin + t);
    for (std::size_t d = 0; d < video.dim; ++d) s.frames[t][d] = static_cast<S>(row[d]);
  }
  s.ext_labels.assign(T + ld, 0);
  s.ext_valid.assign(T + ld, 0);
  for (std::size_t k = 0; k < T + ld; ++k) {
    const std::size_t src = begin + k;
    if (src < video.frames) {
      s.ext_labels[k] = video.labels[src];
      s.ext_valid[k] = 1;
    }
  }
  return s;
}

struct TrainResult {
  std::vector<double> epoch_loss;
};

// Full training run: re-chop with a fresh delta per video each epoch,
// shuffle, average gradients over each batch, Adam update. Deterministic
// given the seed. Loss lines go to `log` as `epoch <n> loss <value>`.
template <typename S>
TrainResult train(AnyModel<S>& model, const StreamDataset& data, const TrainConfig& cfg,
                  std::ostream* log = nullptr) {
  cfg.validate();
  if (data.videos.empty()) throw ContractError("train: empty dataset");
  if (data.feature_dim != model.config().feature_dim)
    throw ConfigError("train: dataset features are " + std::to_string(data.feature_dim) +
                      "-dimensional but model expects " +
                      std::to_string(model.config().feature_dim));
  if (data.num_actions != model.config().num_actions)
    throw ConfigError("train: dataset has K=" + std::to_string(data.num_actions) +
                      " but model expects K=" + std::to_string(model.config().num_actions));

  Rng chop_rng = Rng::stream(cfg.seed, "chop");
  Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
  const std::size_t ld = model.config().decoder_steps;

  AdamHyper hyper;
  hyper.lr = cfg.lr;
  hyper.weight_decay = cfg.weight_decay;
  AdamOptimizer<S> opt(hyper);
  AnyModel<S> grad = model.zeros_like();

  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fresh chop per video per epoch.
    std::vector<TrainingSample<S>> samples;
    for (const auto& video : data.videos) {
      auto windows = chop_augment(video.frames, cfg.sequence_len, chop_rng);
      if (windows.empty() && log)
        *log << "# video " << video.id << " shorter than sequence_len, skipped\n";
      for (auto [b, e] : windows) samples.push_back(make_sample<S>(video, b, e, ld));
    }
    if (samples.empty())
      throw ContractError("train: no training windows (all videos shorter than le=" +
                          std::to_string(cfg.sequence_len) + ")");

    // Fisher-Yates shuffle.
    for (std::size_t i = samples.size(); i > 1; --i) {
      std::size_t j = shuffle_rng.below(i);
      std::swap(samples[i - 1], samples[j]);
    }

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < samples.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, samples.size());
      const S inv = S(1) / static_cast<S>(end - begin);
      for (auto& b : grad.blocks())
        for (std::size_t i = 0; i < b.size(); ++i) b.data[i] = S(0);
      double batch_loss = 0.0;
      for (std::size_t s = begin; s < end; ++s)
        batch_loss += model.loss_and_grad(samples[s].frames, samples[s].ext_labels,
                                          samples[s].ext_valid, cfg.alpha, grad);
      if (!std::isfinite(batch_loss))
        throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(begin / cfg.batch_size));
      // Batch loss is the mean over samples, so lr does not scale with
      // batch size.
      for (auto& b : grad.blocks())
        for (std::size_t i = 0; i < b.size(); ++i) b.data[i] *= inv;
      opt.step(model.blocks(), grad.blocks());
      epoch_loss += batch_loss;
    }
    epoch_loss /= static_cast<double>(samples.size());
    result.epoch_loss.push_back(epoch_loss);
    if (log) {
      char line[64];
      std::snprintf(line, sizeof(line), "epoch %zu loss %.9f\n", epoch, epoch_loss);
      *log << line;
    }
  }
  return result;
}

// Stream every test video causally through the model from the zero state
// and collect per-frame current and anticipated scores.
template <typename S>
ScoreTable evaluate(const AnyModel<S>& model, const StreamDataset& data) {
  if (data.feature_dim != model.config().feature_dim)
    throw ConfigError("evaluate: dataset features are " + std::to_string(data.feature_dim) +
                      "-dimensional but model expects " +
                      std::to_string(model.config().feature_dim));
  ScoreTable table;
  table.num_actions = model.config().num_actions;
  table.anticipation_steps = model.anticipation_steps();
  for (const auto& video : data.videos) {
    if (video.frames == 0) continue;
    auto outputs = model.forward(frames_as<S>(video));
    for (std::size_t t = 0; t < outputs.size(); ++t) {
      ScoreRow row;
      row.video = video.id;
      row.frame = t;
      row.label = video.labels[t];
      row.cur.assign(outputs[t].p.begin(), outputs[t].p.end());
      row.ant.resize(table.anticipation_steps);
      for (std::size_t i = 0; i < table.anticipation_steps; ++i)
        row.ant[i].assign(outputs[t].anticipated[i].begin(), outputs[t].anticipated[i].end());
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace trn
