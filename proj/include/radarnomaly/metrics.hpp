#pragma once

// Threshold-free and thresholded detection metrics over labelled scores.

#include <algorithm>
#include <span>
#include <vector>

#include "radarnomaly/error.hpp"

namespace radarnomaly {

struct LabeledScore {
  double score = 0.0;
  int label = 0;  // 1 = anomaly
};

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

inline ClassCounts count_classes(std::span<const LabeledScore> scores) {
  ClassCounts c;
  for (const auto& s : scores) (s.label == 1 ? c.positives : c.negatives)++;
  return c;
}

namespace detail {

/// Indices ordered by descending score.
inline std::vector<std::size_t> descending_order(std::span<const LabeledScore> scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].score > scores[b].score; });
  return order;
}

}  // namespace detail

/// Area under the ROC curve via the rank-sum (Mann-Whitney) statistic; tied
/// scores receive their average rank, i.e. half credit per tied pair.
inline double roc_auc(std::span<const LabeledScore> scores) {
  const auto counts = count_classes(scores);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw Error(ErrorKind::one_class_only, "AUC needs both classes");
  }
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });
  // Work with doubled ranks so tie averages stay integral.
  double positive_rank_sum2 = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
    const double rank2 = static_cast<double>(i + 1 + j);  // 2 * average 1-based rank
    for (std::size_t k = i; k < j; ++k) {
      if (scores[order[k]].label == 1) positive_rank_sum2 += rank2;
    }
    i = j;
  }
  const double p = static_cast<double>(counts.positives);
  const double n = static_cast<double>(counts.negatives);
  return (positive_rank_sum2 / 2.0 - p * (p + 1.0) / 2.0) / (p * n);
}

/// Step-wise average precision, sum over distinct descending thresholds of
/// (R_n - R_{n-1}) * P_n.
inline double average_precision(std::span<const LabeledScore> scores) {
  const auto counts = count_classes(scores);
  if (counts.positives == 0) throw Error(ErrorKind::no_positives, "AP needs at least one positive");
  const auto order = detail::descending_order(scores);
  const double p = static_cast<double>(counts.positives);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) {
      (scores[order[j]].label == 1 ? tp : fp)++;
      ++j;
    }
    const double recall = static_cast<double>(tp) / p;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

struct CurvePoint {
  double threshold = 0.0;  // positive call: score >= threshold
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct CurveReport {
  std::vector<CurvePoint> points;  // descending threshold
  double auc = 0.0;
  double ap = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  bool defined = false;  // false when a class is missing; auc/ap then stay 0
};

inline CurveReport build_curve(std::span<const LabeledScore> scores) {
  CurveReport report;
  const auto counts = count_classes(scores);
  report.positives = counts.positives;
  report.negatives = counts.negatives;
  const auto order = detail::descending_order(scores);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) {
      (scores[order[j]].label == 1 ? tp : fp)++;
      ++j;
    }
    CurvePoint pt;
    pt.threshold = scores[order[i]].score;
    pt.tpr = counts.positives ? static_cast<double>(tp) / static_cast<double>(counts.positives) : 0.0;
    pt.fpr = counts.negatives ? static_cast<double>(fp) / static_cast<double>(counts.negatives) : 0.0;
    pt.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    pt.recall = pt.tpr;
    report.points.push_back(pt);
    i = j;
  }
  if (counts.positives > 0 && counts.negatives > 0) {
    report.auc = roc_auc(scores);
    report.ap = average_precision(scores);
    report.defined = true;
  }
  return report;
}

struct RateSummary {
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  bool no_positives = false;
  bool no_negatives = false;
  bool no_predicted_positives = false;
};

/// Confusion-derived rates for the strict rule score > threshold. A rate whose
/// denominator is empty is reported as 0 with its flag set.
inline RateSummary rate_at_threshold(std::span<const LabeledScore> scores, double threshold) {
  RateSummary r;
  for (const auto& s : scores) {
    const bool called = s.score > threshold;
    if (s.label == 1) {
      (called ? r.tp : r.fn)++;
    } else {
      (called ? r.fp : r.tn)++;
    }
  }
  r.no_positives = r.tp + r.fn == 0;
  r.no_negatives = r.fp + r.tn == 0;
  r.no_predicted_positives = r.tp + r.fp == 0;
  if (!r.no_positives) r.tpr = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  if (!r.no_negatives) r.fpr = static_cast<double>(r.fp) / static_cast<double>(r.fp + r.tn);
  if (!r.no_predicted_positives) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  return r;
}

}  // namespace radarnomaly
