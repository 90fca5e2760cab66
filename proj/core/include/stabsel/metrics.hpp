#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "stabsel/data_model.hpp"

namespace stabsel {

/// How precision, recall and F1 are averaged over the two classes.
enum class AveragingMode {
  Binary,    // class-1 values only
  Weighted,  // support-weighted mean over classes 0 and 1
};

std::string_view to_string(AveragingMode mode) noexcept;
std::optional<AveragingMode> parse_averaging_mode(std::string_view name) noexcept;

struct MetricVector {
  FoldMetrics metrics;
  AveragingMode mode = AveragingMode::Weighted;
  /// y_true held a single class; roc_auc was set to 0.5.
  bool auc_undefined = false;
};

struct ClassStats {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Per-class precision/recall/F1 for class `cls`, with 0/0 taken as 0.
ClassStats class_stats(std::span<const int> y_true, std::span<const int> y_pred, int cls);

/// Mann-Whitney AUC: (#{s+ > s-} + 0.5 #{s+ = s-}) / (n+ n-), computed by a
/// single sort. Empty optional when y_true lacks either class.
std::optional<double> roc_auc(std::span<const int> y_true, std::span<const double> y_score);

/// Accuracy, F1, precision, recall and ROC-AUC. Throws InvalidArgument on
/// length mismatch or empty input.
MetricVector compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                             std::span<const double> y_score, AveragingMode mode = AveragingMode::Weighted);

}  // namespace stabsel
