#include "stabsel/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "stabsel/errors.hpp"

namespace stabsel {

std::string_view to_string(AveragingMode mode) noexcept {
  return mode == AveragingMode::Binary ? "binary" : "weighted";
}

std::optional<AveragingMode> parse_averaging_mode(std::string_view name) noexcept {
  if (name == "binary") return AveragingMode::Binary;
  if (name == "weighted") return AveragingMode::Weighted;
  return std::nullopt;
}

ClassStats class_stats(std::span<const int> y_true, std::span<const int> y_pred, int cls) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] == cls;
    const bool predicted = y_pred[i] == cls;
    tp += static_cast<std::size_t>(actual && predicted);
    fp += static_cast<std::size_t>(!actual && predicted);
    fn += static_cast<std::size_t>(actual && !predicted);
  }
  ClassStats s;
  s.support = tp + fn;
  s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = 2 * tp + fp + fn == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  return s;
}

std::optional<double> roc_auc(std::span<const int> y_true, std::span<const double> y_score) {
  if (y_true.size() != y_score.size()) throw InvalidArgument("roc_auc: length mismatch");
  std::vector<std::size_t> order(y_true.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y_score[a] < y_score[b]; });

  // Walk groups of tied scores in ascending order; each positive beats every
  // negative seen in earlier groups and half-beats the negatives in its own.
  double wins = 0.0;
  std::size_t neg_below = 0;
  std::size_t pos_total = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos = 0;
    std::size_t neg = 0;
    while (j < order.size() && y_score[order[j]] == y_score[order[i]]) {
      (y_true[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    wins += static_cast<double>(pos * neg_below) + 0.5 * static_cast<double>(pos * neg);
    neg_below += neg;
    pos_total += pos;
    i = j;
  }
  if (pos_total == 0 || neg_below == 0) return std::nullopt;
  return wins / (static_cast<double>(pos_total) * static_cast<double>(neg_below));
}

MetricVector compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                             std::span<const double> y_score, AveragingMode mode) {
  if (y_true.size() != y_pred.size() || y_true.size() != y_score.size()) {
    throw InvalidArgument(fmt::format("compute_metrics: length mismatch ({}, {}, {})", y_true.size(), y_pred.size(),
                                      y_score.size()));
  }
  if (y_true.empty()) throw InvalidArgument("compute_metrics: empty input");

  MetricVector out;
  out.mode = mode;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) correct += static_cast<std::size_t>(y_true[i] == y_pred[i]);
  out.metrics[Metric::Accuracy] = static_cast<double>(correct) / static_cast<double>(y_true.size());

  const ClassStats pos = class_stats(y_true, y_pred, 1);
  if (mode == AveragingMode::Binary) {
    out.metrics[Metric::Precision] = pos.precision;
    out.metrics[Metric::Recall] = pos.recall;
    out.metrics[Metric::F1] = pos.f1;
  } else {
    const ClassStats neg = class_stats(y_true, y_pred, 0);
    const double n = static_cast<double>(y_true.size());
    const double w1 = static_cast<double>(pos.support) / n;
    const double w0 = static_cast<double>(neg.support) / n;
    out.metrics[Metric::Precision] = w0 * neg.precision + w1 * pos.precision;
    out.metrics[Metric::Recall] = w0 * neg.recall + w1 * pos.recall;
    out.metrics[Metric::F1] = w0 * neg.f1 + w1 * pos.f1;
  }

  const auto auc = roc_auc(y_true, y_score);
  out.auc_undefined = !auc.has_value();
  out.metrics[Metric::RocAuc] = auc.value_or(0.5);
  return out;
}

}  // namespace stabsel
