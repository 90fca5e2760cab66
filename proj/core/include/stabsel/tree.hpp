#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stabsel/data_model.hpp"
#include "stabsel/rng.hpp"

namespace stabsel {

struct TreeParams {
  std::size_t max_features = 0;  // candidate features per node; 0 = all
  bool random_thresholds = false;  // extra-trees style: one uniform threshold per candidate
  int max_depth = -1;              // < 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

/// Binary CART tree over dense features. Rows go left when x[feature] <= threshold.
///
/// Classification trees split on Gini and store the class-1 fraction at each
/// leaf. Boosting trees split on squared error of a real target and store
/// sum(target) / sum(hessian) (one Newton step).
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  /// `samples` lists training rows of X; repeats act as bootstrap weights.
  /// If `importance` is non-null, weighted impurity decreases are added to it
  /// (length X.cols()).
  static DecisionTree fit_classification(const Matrix& X, std::span<const int> y,
                                         std::span<const std::size_t> samples, const TreeParams& params,
                                         Rng& rng, Vector* importance = nullptr);

  static DecisionTree fit_boosting(const Matrix& X, std::span<const double> target,
                                   std::span<const double> hessian, std::span<const std::size_t> samples,
                                   const TreeParams& params, Rng& rng);

  double predict(const Matrix& X, Eigen::Index row) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::uint64_t digest(std::uint64_t h) const;

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = false;
  TreeParams tree;
};

/// Bagged classification trees. Tree t is grown from its own stream
/// derive_seed(seed, {t}), so results do not depend on evaluation order.
class Forest {
 public:
  static Forest fit(const Matrix& X, std::span<const int> y, const ForestParams& params, std::uint64_t seed);

  /// Mean class-1 leaf fraction over trees.
  double predict(const Matrix& X, Eigen::Index row) const;
  /// Mean of per-tree impurity importances, each normalized to sum to 1.
  const Vector& importances() const noexcept { return importances_; }
  std::size_t size() const noexcept { return trees_.size(); }
  std::uint64_t digest(std::uint64_t h) const;

 private:
  std::vector<DecisionTree> trees_;
  Vector importances_;
};

/// max(1, floor(sqrt(p))).
std::size_t sqrt_features(std::size_t p) noexcept;

}  // namespace stabsel
