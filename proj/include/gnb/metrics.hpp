#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gnb/error.hpp"

namespace gnb {

/// ROC AUC as the Mann-Whitney statistic: the fraction of (positive,
/// negative) pairs ranked correctly, ties counting one half.
inline double roc_auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw MetricError("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw MetricError("roc_auc: NaN score");
    if (labels[i] != 0.0 && labels[i] != 1.0) throw MetricError("roc_auc: labels must be 0 or 1");
    if (labels[i] == 1.0) ++pos;
  }
  const std::uint64_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("roc_auc: both classes must be present");
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Twice the rank sum of positives, with tied groups sharing their mean rank.
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    std::uint64_t group_pos = 0;
    for (std::size_t k = i; k < j; ++k) group_pos += labels[order[k]] == 1.0;
    rank_sum2 += group_pos * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t u2 = rank_sum2 - pos * (pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

template <typename T>
double accuracy(std::span<const T> predicted, std::span<const T> labels) {
  if (predicted.size() != labels.size()) throw MetricError("accuracy: length mismatch");
  if (labels.empty()) throw MetricError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

struct MetricSummary {
  std::vector<double> values;  // per-trial, in trial order
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  std::size_t n_trials = 0;
};

/// Mean and sample std; values are sorted before reduction so the result does
/// not depend on trial completion order.
inline MetricSummary summarize(std::vector<double> values) {
  if (values.empty()) throw MetricError("summarize: no trials");
  MetricSummary s;
  s.values = values;
  s.n_trials = values.size();
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace gnb
