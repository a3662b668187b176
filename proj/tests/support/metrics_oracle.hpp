#pragma once

// Brute-force transcriptions of the ranking metrics, kept deliberately
// naive and independent of the library implementation: ranks come from
// pairwise comparisons instead of sorting, and every pool is rebuilt from
// the raw definition.

#include <cstddef>
#include <string>
#include <vector>

#include "trn/metrics.hpp"

namespace oracle {

// rank of item i (1-based): 1 + number of items strictly ahead of it,
// where "ahead" means higher score, or equal score and earlier position.
inline std::size_t rank_of(const std::vector<double>& scores, std::size_t i) {
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (j == i) continue;
    if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++ahead;
  }
  return ahead + 1;
}

inline double average_precision(const std::vector<double>& scores,
                                const std::vector<bool>& pos) {
  std::size_t P = 0;
  for (bool b : pos) P += b ? 1 : 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!pos[i]) continue;
    const std::size_t k = rank_of(scores, i);
    std::size_t tp = 0;
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (pos[j] && rank_of(scores, j) <= k) ++tp;
    sum += static_cast<double>(tp) / static_cast<double>(k);
  }
  return sum / static_cast<double>(P);
}

inline double calibrated_ap(const std::vector<double>& scores, const std::vector<bool>& pos) {
  std::size_t P = 0;
  for (bool b : pos) P += b ? 1 : 0;
  const std::size_t N = scores.size() - P;
  const double w = static_cast<double>(N) / static_cast<double>(P);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!pos[i]) continue;
    const std::size_t k = rank_of(scores, i);
    std::size_t tp = 0;
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (pos[j] && rank_of(scores, j) <= k) ++tp;
    const std::size_t fp = k - tp;
    sum += (w == 0.0) ? 1.0
                      : static_cast<double>(tp) /
                            (static_cast<double>(tp) + static_cast<double>(fp) / w);
  }
  return sum / static_cast<double>(P);
}

// Per-class current-frame metrics straight from the table.
inline void per_frame(const trn::ScoreTable& table, int cls, double& ap, double& cap,
                      bool& has_positives) {
  std::vector<double> scores;
  std::vector<bool> pos;
  std::size_t P = 0;
  for (const auto& row : table.rows) {
    scores.push_back(row.cur[static_cast<std::size_t>(cls)]);
    pos.push_back(row.label == cls);
    P += pos.back() ? 1 : 0;
  }
  has_positives = P > 0;
  if (!has_positives) return;
  ap = average_precision(scores, pos);
  cap = calibrated_ap(scores, pos);
}

inline double mean_ap(const trn::ScoreTable& table, bool calibrated) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int cls = 1; cls <= static_cast<int>(table.num_actions); ++cls) {
    double ap = 0, cap = 0;
    bool ok = false;
    per_frame(table, cls, ap, cap, ok);
    if (!ok) continue;
    sum += calibrated ? cap : ap;
    n += 1;
  }
  return sum / static_cast<double>(n);
}

// Decile pools rebuilt from the definition: instance = maximal same-label
// non-background run within one video; frame k of a length-len instance
// falls in bin floor(10k/len).
inline std::vector<double> decile_cap(const trn::ScoreTable& table) {
  const std::size_t n = table.rows.size();
  std::vector<int> bin(n, -1);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && table.rows[j].video == table.rows[i].video &&
           table.rows[j].label == table.rows[i].label)
      ++j;
    if (table.rows[i].label != 0) {
      const std::size_t len = j - i;
      for (std::size_t k = 0; k < len; ++k)
        bin[i + k] = static_cast<int>((10 * k) / len);
    }
    i = j;
  }
  std::vector<double> out(10, 0.0);
  for (int d = 0; d < 10; ++d) {
    double sum = 0.0;
    std::size_t classes = 0;
    for (int cls = 1; cls <= static_cast<int>(table.num_actions); ++cls) {
      std::vector<double> scores;
      std::vector<bool> pos;
      std::size_t P = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const bool is_cls = table.rows[r].label == cls;
        if (is_cls && bin[r] != d) continue;
        scores.push_back(table.rows[r].cur[static_cast<std::size_t>(cls)]);
        pos.push_back(is_cls);
        P += is_cls ? 1 : 0;
      }
      if (P == 0) continue;
      sum += calibrated_ap(scores, pos);
      classes += 1;
    }
    out[static_cast<std::size_t>(d)] = classes ? sum / static_cast<double>(classes) : 0.0;
  }
  return out;
}

// Anticipation metrics per offset, rebuilt from the definition.
inline void anticipation(const trn::ScoreTable& table, std::size_t offset, double& map_out,
                         double& cap_out) {
  double ap_sum = 0.0, cap_sum = 0.0;
  std::size_t classes = 0;
  for (int cls = 1; cls <= static_cast<int>(table.num_actions); ++cls) {
    std::vector<double> scores;
    std::vector<bool> pos;
    std::size_t P = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::size_t j = r + offset;
      if (j >= table.rows.size() || table.rows[j].video != table.rows[r].video) continue;
      scores.push_back(table.rows[r].ant[offset - 1][static_cast<std::size_t>(cls)]);
      pos.push_back(table.rows[j].label == cls);
      P += pos.back() ? 1 : 0;
    }
    if (P == 0) continue;
    ap_sum += average_precision(scores, pos);
    cap_sum += calibrated_ap(scores, pos);
    classes += 1;
  }
  map_out = classes ? ap_sum / static_cast<double>(classes) : 0.0;
  cap_out = classes ? cap_sum / static_cast<double>(classes) : 0.0;
}

}  // namespace oracle
