#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stabsel/data_model.hpp"

namespace stabsel {

enum class ReducerKind { Selector, Projection };

ReducerKind reducer_kind(ReducerId id) noexcept;
/// True for reducers that need class labels (and therefore both classes).
bool is_supervised(ReducerId id) noexcept;

/// Fitted dimensionality reduction.
///
/// Selectors keep `selected` (original column indices, best first). Projections
/// map x to loadings * (x - mean); `mean` is zero for TSVD and SRP.
struct ReducerModel {
  ReducerId id = ReducerId::MI;
  ReducerKind kind = ReducerKind::Selector;
  std::size_t input_dim = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> selected;
  /// Per-feature score used for ranking (selectors only; empty otherwise).
  Vector scores;

  Vector mean;
  Matrix loadings;  // k x input_dim
  /// Variance captured by each component (PCA/TSVD), same order as loadings.
  Vector explained_variance;

  std::vector<std::string> warnings;

  std::uint64_t digest() const;
};

/// Fits spec.reducer on normalized training features. k = min(target_dim, p);
/// a warning is recorded when target_dim is clamped.
///
/// Throws InvalidArgument when a supervised reducer sees a single class, when
/// chi-square sees a negative value, or when X has fewer than two rows.
///
/// Params (reducer_params): MI max_bins=10; ETIm/FIRF/RFE n_trees=100;
/// RFE step=0.1; SRP density=1/sqrt(p).
ReducerModel fit_reducer(const PipelineSpec& spec, const Matrix& X, std::span<const int> y);

/// Selector: column gather. Projection: (X - mean) * loadings^T.
/// Throws InvalidArgument when X.cols() != model.input_dim.
Matrix apply_reducer(const ReducerModel& model, const Matrix& X);

/// Indices of the k largest scores; ties go to the lower feature index.
std::vector<std::size_t> top_k(const Vector& scores, std::size_t k);

/// Univariate feature scores. All take X (n x p) and binary labels y.
namespace feature_scores {

/// Plug-in mutual information (nats) between y and the feature discretized
/// into min(max_bins, #distinct) equal-frequency bins.
Vector mutual_information(const Matrix& X, std::span<const int> y, std::size_t max_bins = 10);
/// One-way ANOVA F across the two classes; within-group mean square floored at 1e-12.
Vector anova_f(const Matrix& X, std::span<const int> y);
/// Upper-tail p-value of anova_f under F(1, max(n - 2, 1)).
Vector anova_p(const Matrix& X, std::span<const int> y);
/// Population variance per column.
Vector variance(const Matrix& X);
/// |Pearson r| between the column and y; 0 for constant columns.
Vector abs_correlation(const Matrix& X, std::span<const int> y);
/// Chi-square statistic of per-class feature totals against class frequencies.
/// Requires non-negative X.
Vector chi_square(const Matrix& X, std::span<const int> y);

}  // namespace feature_scores

}  // namespace stabsel
