#include "stabsel/preprocessing.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"

namespace stabsel {

std::string MinMaxModel::fingerprint_hex() const { return fmt::format("{:016x}", fingerprint); }

MinMaxModel fit_minmax(const FeatureTable& table, std::span<const std::size_t> train_rows) {
  if (train_rows.empty()) throw InvalidArgument("fit_minmax: train_rows is empty");
  const std::size_t n = table.n_subjects();
  for (auto r : train_rows) {
    if (r >= n) throw InvalidArgument(fmt::format("fit_minmax: row {} out of range ({} subjects)", r, n));
  }

  MinMaxModel model;
  model.feature_names = table.feature_names;
  model.fitted_rows.assign(train_rows.begin(), train_rows.end());
  std::sort(model.fitted_rows.begin(), model.fitted_rows.end());
  model.fitted_rows.erase(std::unique(model.fitted_rows.begin(), model.fitted_rows.end()),
                          model.fitted_rows.end());

  const auto p = table.values.cols();
  model.min = Vector::Constant(p, std::numeric_limits<double>::infinity());
  model.max = Vector::Constant(p, -std::numeric_limits<double>::infinity());
  for (auto r : model.fitted_rows) {
    const auto row = table.values.row(static_cast<Eigen::Index>(r));
    model.min = model.min.cwiseMin(row.transpose());
    model.max = model.max.cwiseMax(row.transpose());
  }

  RowIndices by_id = model.fitted_rows;
  std::sort(by_id.begin(), by_id.end(),
            [&](std::size_t a, std::size_t b) { return table.subject_ids[a] < table.subject_ids[b]; });
  std::uint64_t h = fnv1a("minmax");
  for (auto r : by_id) {
    h = fnv1a(table.subject_ids[r], h);
    for (Eigen::Index j = 0; j < p; ++j) h = fnv1a_double(table.values(static_cast<Eigen::Index>(r), j), h);
  }
  model.fingerprint = h == 0 ? 1 : h;
  return model;
}

Matrix transform_minmax(const MinMaxModel& model, const FeatureTable& table,
                        std::span<const std::size_t> rows) {
  if (table.feature_names != model.feature_names) {
    throw InvalidArgument("transform_minmax: feature names do not match the fitted model");
  }
  for (auto r : rows) {
    if (r >= table.n_subjects()) throw InvalidArgument(fmt::format("transform_minmax: row {} out of range", r));
  }
  const auto p = static_cast<Eigen::Index>(model.feature_names.size());
  Matrix out(static_cast<Eigen::Index>(rows.size()), p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double lo = model.min[j];
    const double range = model.max[j] - lo;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double x = table.values(static_cast<Eigen::Index>(rows[i]), j);
      out(static_cast<Eigen::Index>(i), j) = range > 0.0 ? (x - lo) / range : 0.0;
    }
  }
  return out;
}

}  // namespace stabsel
