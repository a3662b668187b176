#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "trn/error.hpp"

namespace trn {

// Per-frame scores for one evaluation run. Rows are grouped by video with
// contiguous frame indices; `ant` holds the ld anticipated score vectors.
struct ScoreRow {
  std::string video;
  std::size_t frame = 0;
  int label = 0;
  std::vector<double> cur;                // K+1 scores
  std::vector<std::vector<double>> ant;   // ld x (K+1)
};

struct ScoreTable {
  std::size_t num_actions = 0;       // K
  std::size_t anticipation_steps = 0;  // ld
  std::vector<ScoreRow> rows;
};

// Ranking shared by AP and cAP: descending score, ties broken by the
// original (ascending frame) order via stable sort.
inline std::vector<std::size_t> rank_descending(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

// AP = (1/P) sum over positive ranks k of precision@k.
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<bool>& is_positive) {
  if (scores.size() != is_positive.size())
    throw ContractError("average_precision: " + std::to_string(scores.size()) +
                        " scores vs " + std::to_string(is_positive.size()) + " flags");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(is_positive.begin(), is_positive.end(), true));
  if (positives == 0) throw ContractError("average_precision: no positive samples");
  std::vector<std::size_t> order = rank_descending(scores);
  double sum = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (is_positive[order[k]]) {
      tp += 1;
      sum += static_cast<double>(tp) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

// cAP from calibrated precision cPrec = TP / (TP + FP/w), w = #neg/#pos.
// With no negatives, cPrec is 1 at every rank.
inline double calibrated_ap(const std::vector<double>& scores,
                            const std::vector<bool>& is_positive) {
  if (scores.size() != is_positive.size())
    throw ContractError("calibrated_ap: " + std::to_string(scores.size()) + " scores vs " +
                        std::to_string(is_positive.size()) + " flags");
  const std::size_t positives =
      static_cast<std::size_t>(std::count(is_positive.begin(), is_positive.end(), true));
  if (positives == 0) throw ContractError("calibrated_ap: no positive samples");
  const std::size_t negatives = scores.size() - positives;
  const double w = static_cast<double>(negatives) / static_cast<double>(positives);
  std::vector<std::size_t> order = rank_descending(scores);
  double sum = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (is_positive[order[k]]) {
      tp += 1;
      sum += (w == 0.0) ? 1.0
                        : static_cast<double>(tp) /
                              (static_cast<double>(tp) + static_cast<double>(fp) / w);
    } else {
      fp += 1;
    }
  }
  return sum / static_cast<double>(positives);
}

// Detection and anticipation metrics for one run. Values are fractions in
// [0, 1]; rendering converts to percentages.
struct MetricReport {
  std::size_t num_actions = 0;
  std::vector<int> classes;        // action classes with >= 1 positive frame
  std::vector<double> ap, cap;     // aligned with `classes`
  double map = 0.0, mcap = 0.0;
  std::vector<double> decile_cap;  // 10 entries when computed
  std::vector<double> ant_map, ant_cap;  // one entry per offset
  double ant_map_avg = 0.0, ant_cap_avg = 0.0;
  std::vector<std::string> warnings;
};

// Per-class AP/cAP over current-frame scores; mean over classes that have
// at least one positive frame. Background never contributes a class.
inline MetricReport per_frame_map(const ScoreTable& table) {
  if (table.rows.empty()) throw ContractError("per_frame_map: empty score table");
  MetricReport rep;
  rep.num_actions = table.num_actions;
  for (int cls = 1; cls <= static_cast<int>(table.num_actions); ++cls) {
    std::vector<double> scores(table.rows.size());
    std::vector<bool> pos(table.rows.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      scores[i] = table.rows[i].cur[static_cast<std::size_t>(cls)];
      pos[i] = table.rows[i].label == cls;
      positives += pos[i] ? 1u : 0u;
    }
    if (positives == 0) {
      rep.warnings.push_back("class " + std::to_string(cls) +
                             " has no positive frames; skipped");
      continue;
    }
    rep.classes.push_back(cls);
    rep.ap.push_back(average_precision(scores, pos));
    rep.cap.push_back(calibrated_ap(scores, pos));
  }
  if (rep.classes.empty()) throw ContractError("per_frame_map: no class has positive frames");
  rep.map = std::accumulate(rep.ap.begin(), rep.ap.end(), 0.0) / rep.ap.size();
  rep.mcap = std::accumulate(rep.cap.begin(), rep.cap.end(), 0.0) / rep.cap.size();
  return rep;
}

namespace detail {

// Maximal runs of identical non-background labels within one video.
struct Instance {
  std::size_t begin = 0, end = 0;  // row-index range, half open
  int cls = 0;
};

inline std::vector<Instance> find_instances(const ScoreTable& table) {
  std::vector<Instance> out;
  std::size_t i = 0;
  while (i < table.rows.size()) {
    const auto& row = table.rows[i];
    std::size_t j = i + 1;
    while (j < table.rows.size() && table.rows[j].video == row.video &&
           table.rows[j].label == row.label)
      ++j;
    if (row.label != 0) out.push_back({i, j, row.label});
    i = j;
  }
  return out;
}

}  // namespace detail

// cAP per decile of each action instance: frame k of an instance of length
// len lands in bin floor(10k/len); bin j of class c is scored over the
// bin-j frames of class-c instances plus every frame not labeled c
// (negatives pooled globally), then bins are averaged over classes.
inline std::vector<double> decile_cap(const ScoreTable& table,
                                      std::vector<std::string>* warnings = nullptr) {
  std::vector<detail::Instance> instances = detail::find_instances(table);
  // bin index per row, -1 for background rows
  std::vector<int> bin(table.rows.size(), -1);
  for (const auto& inst : instances) {
    const std::size_t len = inst.end - inst.begin;
    for (std::size_t k = 0; k < len; ++k)
      bin[inst.begin + k] = static_cast<int>((10 * k) / len);
  }
  std::vector<double> result(10, 0.0);
  for (int j = 0; j < 10; ++j) {
    double sum = 0.0;
    std::size_t n_classes = 0;
    for (int cls = 1; cls <= static_cast<int>(table.num_actions); ++cls) {
      std::vector<double> scores;
      std::vector<bool> pos;
      std::size_t positives = 0;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const bool is_cls = table.rows[i].label == cls;
        if (is_cls && bin[i] != j) continue;  // same class, other bin: excluded
        scores.push_back(table.rows[i].cur[static_cast<std::size_t>(cls)]);
        pos.push_back(is_cls);
        positives += is_cls ? 1u : 0u;
      }
      if (positives == 0) continue;
      sum += calibrated_ap(scores, pos);
      n_classes += 1;
    }
    if (n_classes == 0) {
      if (warnings)
        warnings->push_back("decile " + std::to_string(j) + " has no positives in any class");
      result[static_cast<std::size_t>(j)] = 0.0;
    } else {
      result[static_cast<std::size_t>(j)] = sum / static_cast<double>(n_classes);
    }
  }
  return result;
}

// Anticipation: offset i scores frame t's i-step-ahead prediction against
// the label at t+i; frames with no such label are excluded.
struct AnticipationReport {
  std::vector<double> map, cap;  // per offset
  double map_avg = 0.0, cap_avg = 0.0;
};

inline AnticipationReport anticipation_report(const ScoreTable& table,
                                              std::vector<std::string>* warnings = nullptr) {
  AnticipationReport rep;
  const std::size_t ld = table.anticipation_steps;
  if (ld == 0) return rep;

  // Row index of (video, frame+i) is row+i while the video id matches.
  for (std::size_t off = 1; off <= ld; ++off) {
    std::vector<double> sum_ap, sum_cap;
    double map_sum = 0.0, cap_sum = 0.0;
    std::size_t n_classes = 0;
    for (int cls = 1; cls <= static_cast<int>(table.num_actions); ++cls) {
      std::vector<double> scores;
      std::vector<bool> pos;
      std::size_t positives = 0;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const std::size_t j = i + off;
        if (j >= table.rows.size() || table.rows[j].video != table.rows[i].video) continue;
        scores.push_back(table.rows[i].ant[off - 1][static_cast<std::size_t>(cls)]);
        pos.push_back(table.rows[j].label == cls);
        positives += pos.back() ? 1u : 0u;
      }
      if (positives == 0) {
        if (warnings)
          warnings->push_back("anticipation offset " + std::to_string(off) + " class " +
                              std::to_string(cls) + " has no positives; skipped");
        continue;
      }
      map_sum += average_precision(scores, pos);
      cap_sum += calibrated_ap(scores, pos);
      n_classes += 1;
    }
    rep.map.push_back(n_classes ? map_sum / static_cast<double>(n_classes) : 0.0);
    rep.cap.push_back(n_classes ? cap_sum / static_cast<double>(n_classes) : 0.0);
  }
  rep.map_avg = std::accumulate(rep.map.begin(), rep.map.end(), 0.0) /
                static_cast<double>(rep.map.size());
  rep.cap_avg = std::accumulate(rep.cap.begin(), rep.cap.end(), 0.0) /
                static_cast<double>(rep.cap.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Report rendering: an aligned plain-text table and `key value` lines for
// golden-file tests. Values are percentages.
// ---------------------------------------------------------------------------
namespace detail {
inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", 100.0 * v);
  return buf;
}
}  // namespace detail

inline std::string render_report_text(const MetricReport& rep) {
  std::string out;
  char line[128];
  out += "class        AP       cAP\n";
  for (std::size_t i = 0; i < rep.classes.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-8d %8s %9s\n", rep.classes[i],
                  detail::pct(rep.ap[i]).c_str(), detail::pct(rep.cap[i]).c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-8s %8s %9s\n", "mean", detail::pct(rep.map).c_str(),
                detail::pct(rep.mcap).c_str());
  out += line;
  if (!rep.decile_cap.empty()) {
    out += "\ndecile cAP (first 10% .. last 10% of each instance)\n";
    for (std::size_t j = 0; j < rep.decile_cap.size(); ++j) {
      std::snprintf(line, sizeof(line), "%zu0%%-%zu0%% %9s\n", j, j + 1,
                    detail::pct(rep.decile_cap[j]).c_str());
      out += line;
    }
  }
  if (!rep.ant_map.empty()) {
    out += "\nanticipation   mAP      mcAP\n";
    for (std::size_t i = 0; i < rep.ant_map.size(); ++i) {
      std::snprintf(line, sizeof(line), "offset %-6zu %8s %9s\n", i + 1,
                    detail::pct(rep.ant_map[i]).c_str(), detail::pct(rep.ant_cap[i]).c_str());
      out += line;
    }
    std::snprintf(line, sizeof(line), "avg          %8s %9s\n",
                  detail::pct(rep.ant_map_avg).c_str(), detail::pct(rep.ant_cap_avg).c_str());
    out += line;
  }
  for (const auto& w : rep.warnings) out += "# warning: " + w + "\n";
  return out;
}

inline std::string render_report_kv(const MetricReport& rep) {
  std::string out;
  char line[128];
  auto kv = [&](const std::string& key, double v) {
    std::snprintf(line, sizeof(line), "%s %.12g\n", key.c_str(), 100.0 * v);
    out += line;
  };
  for (std::size_t i = 0; i < rep.classes.size(); ++i) {
    kv("ap.class" + std::to_string(rep.classes[i]), rep.ap[i]);
    kv("cap.class" + std::to_string(rep.classes[i]), rep.cap[i]);
  }
  kv("map.overall", rep.map);
  kv("mcap.overall", rep.mcap);
  for (std::size_t j = 0; j < rep.decile_cap.size(); ++j)
    kv("decile.cap." + std::to_string(j + 1), rep.decile_cap[j]);
  for (std::size_t i = 0; i < rep.ant_map.size(); ++i) {
    kv("anticipation.map.offset" + std::to_string(i + 1), rep.ant_map[i]);
    kv("anticipation.cap.offset" + std::to_string(i + 1), rep.ant_cap[i]);
  }
  if (!rep.ant_map.empty()) {
    kv("anticipation.map.avg", rep.ant_map_avg);
    kv("anticipation.cap.avg", rep.ant_cap_avg);
  }
  return out;
}

}  // namespace trn
