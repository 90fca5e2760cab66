#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "stabsel/data_model.hpp"

namespace stabsel {

/// A fitted binary classifier. Scores are evidence for class 1 in [0, 1];
/// the predicted label is 1 iff the score is >= 0.5.
class ClassifierModel {
 public:
  virtual ~ClassifierModel() = default;

  ClassifierId id() const noexcept { return id_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  /// Fraction of class-1 labels in the training data.
  double class_prior() const noexcept { return prior_; }

  /// Throws InvalidArgument if X.cols() differs from the training width.
  Vector predict_score(const Matrix& X) const;
  Labels predict_label(const Matrix& X) const;

  /// Hash of every learned parameter; equal digests mean identical models.
  virtual std::uint64_t digest() const = 0;
  /// Effective hyperparameters (defaults filled in), for reports.
  virtual Params hyperparameters() const = 0;

 protected:
  ClassifierModel(ClassifierId id, std::uint64_t seed, std::size_t input_dim, double prior)
      : id_(id), seed_(seed), input_dim_(input_dim), prior_(prior) {}

  virtual Vector score_rows(const Matrix& X) const = 0;

 private:
  ClassifierId id_;
  std::uint64_t seed_;
  std::size_t input_dim_;
  double prior_;
};

using ClassifierPtr = std::shared_ptr<const ClassifierModel>;

/// Fits the classifier named by spec.classifier with spec.classifier_params
/// and spec.seed. Throws InvalidArgument on single-class labels, non-finite
/// inputs or size mismatches.
///
/// Registry and recognised params:
///   ETr    extra trees; n_trees=100, max_depth=-1, min_samples_leaf=1
///   RandF  random forest (bootstrap, best split over sqrt(p)); same params
///   DT     CART with Gini; max_depth=-1 (unlimited), min_samples_leaf=1
///   GB     logistic-loss gradient boosting; n_trees=100, max_depth=3, learning_rate=0.1
///   KNN    k=5, Euclidean; score = fraction of positive neighbours
///   GNB    Gaussian naive Bayes; var_smoothing=1e-9
///   LOGIT  full-batch gradient descent; iterations=1000, step=0.1, l2=1e-4
///   NC     nearest centroid; score = sigmoid(d0 - d1)
///   DUMMY  majority class; score = training prior
ClassifierPtr fit_classifier(const PipelineSpec& spec, const Matrix& X, std::span<const int> y);

inline double sigmoid(double z) noexcept {
  if (z >= 0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace stabsel
