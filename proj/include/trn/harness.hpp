#pragma once

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "trn/any_model.hpp"
#include "trn/checkpoint.hpp"
#include "trn/config.hpp"
#include "trn/data.hpp"
#include "trn/gradcheck.hpp"
#include "trn/metrics.hpp"
#include "trn/training.hpp"

namespace trn {

// Orchestration shared by the command-line tool and the test suites; each
// function is one subcommand's engine.

inline StreamDataset load_dataset_any(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return load_dataset_csv(path);
  return load_dataset(path);
}

// Initialize from the "init" stream and train on the "chop"/"shuffle"
// streams, all derived from cfg.seed.
template <typename S>
AnyModel<S> train_model(const RunConfig& cfg, ModelKind kind, const StreamDataset& data,
                        std::ostream* log = nullptr) {
  TrnConfig mc = cfg.model_config();
  if (data.feature_dim != mc.feature_dim || data.num_actions != mc.num_actions)
    throw ConfigError("train: dataset has D=" + std::to_string(data.feature_dim) + ", K=" +
                      std::to_string(data.num_actions) + " but config says D=" +
                      std::to_string(mc.feature_dim) + ", K=" + std::to_string(mc.num_actions));
  Rng init_rng = Rng::stream(cfg.seed, "init");
  AnyModel<S> model = AnyModel<S>::init(kind, mc, init_rng);
  train(model, data, cfg.train_config(), log);
  return model;
}

template <typename S>
MetricReport evaluate_report(const AnyModel<S>& model, const StreamDataset& data,
                             bool with_deciles, bool with_anticipation) {
  ScoreTable table = evaluate(model, data);
  MetricReport rep = per_frame_map(table);
  if (with_deciles) rep.decile_cap = decile_cap(table, &rep.warnings);
  if (with_anticipation && table.anticipation_steps > 0) {
    AnticipationReport ant = anticipation_report(table, &rep.warnings);
    rep.ant_map = ant.map;
    rep.ant_cap = ant.cap;
    rep.ant_map_avg = ant.map_avg;
    rep.ant_cap_avg = ant.cap_avg;
  }
  return rep;
}

// One Table-7-style ablation: a fresh model per (ld, seed) cell, detection
// mAP and horizon-averaged anticipation mAP per ld, means over seeds.
struct AblationTable {
  std::vector<std::size_t> ld_values;
  std::vector<double> detection_map;      // mean over seeds, per ld
  std::vector<double> anticipation_map;   // mean over seeds of the offset-avg, per ld
};

template <typename S>
AblationTable run_ablation(const RunConfig& base, const StreamDataset& train_ds,
                           const StreamDataset& test_ds,
                           const std::vector<std::size_t>& ld_values,
                           const std::vector<std::uint64_t>& seeds,
                           std::ostream* log = nullptr) {
  if (ld_values.empty()) throw ConfigError("ablate: empty ld list");
  if (seeds.empty()) throw ConfigError("ablate: empty seed list");
  AblationTable table;
  table.ld_values = ld_values;
  for (std::size_t ld : ld_values) {
    double det_sum = 0.0, ant_sum = 0.0;
    for (std::uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.decoder_steps = ld;
      cfg.seed = seed;
      AnyModel<S> model = train_model<S>(cfg, ModelKind::trn, train_ds, log);
      MetricReport rep = evaluate_report(model, test_ds, false, true);
      det_sum += rep.map;
      ant_sum += rep.ant_map_avg;
      if (log)
        *log << "# ablate ld " << ld << " seed " << seed << " map " << rep.map
             << " anticipation " << rep.ant_map_avg << "\n";
    }
    table.detection_map.push_back(det_sum / static_cast<double>(seeds.size()));
    table.anticipation_map.push_back(ant_sum / static_cast<double>(seeds.size()));
  }
  return table;
}

inline std::string render_ablation_text(const AblationTable& t) {
  std::string out = "task              ";
  char buf[64];
  for (std::size_t ld : t.ld_values) {
    std::snprintf(buf, sizeof(buf), " ld=%-6zu", ld);
    out += buf;
  }
  out += "\ndetection mAP     ";
  for (double v : t.detection_map) {
    std::snprintf(buf, sizeof(buf), " %8.4f", 100.0 * v);
    out += buf;
  }
  out += "\nanticipation mAP  ";
  for (double v : t.anticipation_map) {
    std::snprintf(buf, sizeof(buf), " %8.4f", 100.0 * v);
    out += buf;
  }
  out += "\n";
  return out;
}

inline std::string render_ablation_kv(const AblationTable& t) {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < t.ld_values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "ablate.detection.map.ld%zu %.12g\n", t.ld_values[i],
                  100.0 * t.detection_map[i]);
    out += buf;
    std::snprintf(buf, sizeof(buf), "ablate.anticipation.map.ld%zu %.12g\n", t.ld_values[i],
                  100.0 * t.anticipation_map[i]);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check over every model kind at tiny dimensions, reporting the
// max relative error per parameter block. `corrupt` is a test hook that
// injects an error into one analytic entry, which the check must catch.
// ---------------------------------------------------------------------------
struct GradCheckLine {
  std::string model;
  std::string block;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  std::vector<GradCheckLine> lines;
  bool ok = true;
};

inline GradCheckReport run_gradcheck(std::uint64_t seed, double tolerance = 1e-4,
                                     bool corrupt = false) {
  TrnConfig cfg;
  cfg.feature_dim = 3;
  cfg.num_actions = 2;
  cfg.hidden_dim = 3;
  cfg.decoder_steps = 2;
  cfg.sequence_len = 4;
  cfg.alpha = 1.0;
  cfg.score_embed_dim = 2;
  const std::size_t T = 4;

  GradCheckReport report;
  for (ModelKind kind : {ModelKind::trn, ModelKind::lstm, ModelKind::ed,
                         ModelKind::framewise, ModelKind::rnn_offline}) {
    Rng init_rng = Rng::stream(seed, "init");
    AnyModel<double> model = AnyModel<double>::init(kind, cfg, init_rng);

    Rng data_rng = Rng::stream(seed, "datagen");
    std::vector<Vector<double>> frames(T, Vector<double>(cfg.feature_dim));
    for (auto& f : frames)
      for (double& v : f) v = data_rng.uniform(-1, 1);
    std::vector<int> ext_labels(T + cfg.decoder_steps);
    std::vector<unsigned char> ext_valid(T + cfg.decoder_steps, 1);
    for (auto& l : ext_labels) l = static_cast<int>(data_rng.below(cfg.num_actions + 1));
    ext_valid.back() = 0;  // behave like a video end

    AnyModel<double> grad = model.zeros_like();
    model.loss_and_grad(frames, ext_labels, ext_valid, cfg.alpha, grad);
    auto analytic = grad.blocks();
    if (corrupt && !analytic.empty() && analytic[0].size() > 0)
      analytic[0].data[0] += 0.5;

    auto f = [&] {
      return sequence_loss(model.forward(frames), ext_labels, ext_valid, cfg.alpha);
    };
    auto fd = finite_diff_grad(f, model.blocks());
    for (std::size_t b = 0; b < analytic.size(); ++b) {
      GradCheckLine line;
      line.model = to_string(kind);
      line.block = analytic[b].name;
      line.max_rel_err = max_rel_err(analytic[b].data, fd[b].data(), analytic[b].size());
      line.pass = line.max_rel_err < tolerance;
      report.ok = report.ok && line.pass;
      report.lines.push_back(line);
    }
  }
  return report;
}

}  // namespace trn
