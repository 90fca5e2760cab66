#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stabsel/data_model.hpp"

namespace stabsel {

/// Per-feature min/max learned from training rows only.
struct MinMaxModel {
  std::vector<std::string> feature_names;
  Vector min;
  Vector max;
  /// Table rows the model was fitted on, ascending.
  RowIndices fitted_rows;
  /// FNV-1a over (subject id, feature values) of the fitted rows in subject-id
  /// order. Changes iff the training rows or their contents change.
  std::uint64_t fingerprint = 0;

  std::string fingerprint_hex() const;
};

/// Throws InvalidArgument if train_rows is empty or holds an invalid index.
MinMaxModel fit_minmax(const FeatureTable& table, std::span<const std::size_t> train_rows);

/// x' = (x - min) / (max - min); zero-range features map to 0. Values outside
/// the training range are not clamped. Throws InvalidArgument when the table's
/// feature names differ from the model's.
Matrix transform_minmax(const MinMaxModel& model, const FeatureTable& table,
                        std::span<const std::size_t> rows);

}  // namespace stabsel
