#include "stabsel/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stabsel/errors.hpp"

namespace stabsel {

std::size_t sqrt_features(std::size_t p) noexcept {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
}

// Grows one tree depth-first over a working array of sample indices. Both
// criteria reduce to maximizing s_l^2/n_l + s_r^2/n_r over candidate splits:
// for a 0/1 target the sum equals the sum of squares, so Gini and squared
// error rank splits identically.
class TreeBuilder {
 public:
  enum class Leaf { ClassFraction, Newton };

  TreeBuilder(const Matrix& X, std::vector<double> target, std::vector<double> hessian, Leaf leaf,
              const TreeParams& params, Rng& rng, Vector* importance)
      : X_(X),
        target_(std::move(target)),
        hessian_(std::move(hessian)),
        leaf_(leaf),
        params_(params),
        rng_(rng),
        importance_(importance) {
    const auto p = static_cast<std::size_t>(X_.cols());
    features_.resize(p);
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    max_features_ = params_.max_features == 0 ? p : std::min(params_.max_features, p);
  }

  DecisionTree build(std::span<const std::size_t> samples) {
    if (samples.empty()) throw InvalidArgument("decision tree: no training samples");
    idx_.assign(samples.begin(), samples.end());
    DecisionTree tree;
    nodes_ = &tree.nodes_;
    grow(0, idx_.size(), 0);
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double proxy = -std::numeric_limits<double>::infinity();
  };

  double x(std::size_t row, std::size_t f) const {
    return X_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(f));
  }

  double leaf_value(std::size_t begin, std::size_t end) const {
    double s = 0.0;
    double h = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      s += target_[idx_[i]];
      if (leaf_ == Leaf::Newton) h += hessian_[idx_[i]];
    }
    if (leaf_ == Leaf::ClassFraction) return s / static_cast<double>(end - begin);
    return h < 1e-150 ? 0.0 : s / h;
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(nodes_->size());
    nodes_->push_back({});
    const std::size_t n = end - begin;

    double s = 0.0;
    double sq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double t = target_[idx_[i]];
      s += t;
      sq += t * t;
    }
    const double nd = static_cast<double>(n);
    const double impurity = sq / nd - (s / nd) * (s / nd);

    const bool can_split = n >= params_.min_samples_split && n >= 2 * params_.min_samples_leaf &&
                           (params_.max_depth < 0 || depth < params_.max_depth) && impurity > 1e-14;
    Split best;
    if (can_split) best = find_split(begin, end, s);

    if (best.feature < 0) {
      (*nodes_)[static_cast<std::size_t>(id)].value = leaf_value(begin, end);
      return id;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    const auto mid_it = std::stable_partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              idx_.begin() + static_cast<std::ptrdiff_t>(end),
                                              [&](std::size_t r) { return x(r, f) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - idx_.begin());

    if (importance_ != nullptr) {
      // n * impurity(parent) - sum over children, in squared-error units.
      const double decrease = best.proxy - s * s / nd;
      (*importance_)[best.feature] += (leaf_ == Leaf::ClassFraction ? 2.0 : 1.0) * std::max(0.0, decrease);
    }

    (*nodes_)[static_cast<std::size_t>(id)].feature = best.feature;
    (*nodes_)[static_cast<std::size_t>(id)].threshold = best.threshold;
    (*nodes_)[static_cast<std::size_t>(id)].value = leaf_value(begin, end);
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    (*nodes_)[static_cast<std::size_t>(id)].left = left;
    (*nodes_)[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  Split find_split(std::size_t begin, std::size_t end, double total) {
    const bool sample_features = max_features_ < features_.size();
    if (sample_features) rng_.shuffle(features_.begin(), features_.end());

    Split best;
    std::size_t visited = 0;
    for (std::size_t fi = 0; fi < features_.size() && visited < max_features_; ++fi) {
      const std::size_t f = sample_features ? features_[fi] : fi;
      const bool informative = params_.random_thresholds ? random_split(begin, end, f, total, best)
                                                         : best_split(begin, end, f, total, best);
      if (informative) ++visited;
    }
    return best;
  }

  // Returns false when the feature is constant within the node.
  bool best_split(std::size_t begin, std::size_t end, std::size_t f, double total, Split& best) {
    const std::size_t n = end - begin;
    pairs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = idx_[begin + i];
      pairs_[i] = {x(r, f), target_[r]};
    }
    std::sort(pairs_.begin(), pairs_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (!(pairs_.front().first < pairs_.back().first)) return false;

    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += pairs_[i].second;
      if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double right_sum = total - left_sum;
      const double proxy = left_sum * left_sum / static_cast<double>(nl) + right_sum * right_sum / static_cast<double>(nr);
      if (proxy > best.proxy) {
        double thr = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
        if (!(thr < pairs_[i + 1].first)) thr = pairs_[i].first;
        best = {static_cast<int>(f), thr, proxy};
      }
    }
    return true;
  }

  bool random_split(std::size_t begin, std::size_t end, std::size_t f, double total, Split& best) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = x(idx_[i], f);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(lo < hi)) return false;
    double thr = rng_.uniform(lo, hi);
    if (!(thr < hi)) thr = lo;

    std::size_t nl = 0;
    double left_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = idx_[i];
      if (x(r, f) <= thr) {
        ++nl;
        left_sum += target_[r];
      }
    }
    const std::size_t nr = (end - begin) - nl;
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    if (nl < min_leaf || nr < min_leaf) return true;
    const double right_sum = total - left_sum;
    const double proxy = left_sum * left_sum / static_cast<double>(nl) + right_sum * right_sum / static_cast<double>(nr);
    if (proxy > best.proxy) best = {static_cast<int>(f), thr, proxy};
    return true;
  }

  const Matrix& X_;
  std::vector<double> target_;
  std::vector<double> hessian_;
  Leaf leaf_;
  const TreeParams& params_;
  Rng& rng_;
  Vector* importance_;
  std::vector<std::size_t> features_;
  std::size_t max_features_ = 0;
  std::vector<std::size_t> idx_;
  std::vector<std::pair<double, double>> pairs_;
  std::vector<DecisionTree::Node>* nodes_ = nullptr;
};

DecisionTree DecisionTree::fit_classification(const Matrix& X, std::span<const int> y,
                                              std::span<const std::size_t> samples, const TreeParams& params,
                                              Rng& rng, Vector* importance) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw InvalidArgument("decision tree: X/y size mismatch");
  std::vector<double> target(y.begin(), y.end());
  TreeBuilder builder(X, std::move(target), {}, TreeBuilder::Leaf::ClassFraction, params, rng, importance);
  return builder.build(samples);
}

DecisionTree DecisionTree::fit_boosting(const Matrix& X, std::span<const double> target,
                                        std::span<const double> hessian, std::span<const std::size_t> samples,
                                        const TreeParams& params, Rng& rng) {
  if (static_cast<std::size_t>(X.rows()) != target.size() || target.size() != hessian.size()) {
    throw InvalidArgument("boosting tree: size mismatch");
  }
  TreeBuilder builder(X, {target.begin(), target.end()}, {hessian.begin(), hessian.end()},
                      TreeBuilder::Leaf::Newton, params, rng, nullptr);
  return builder.build(samples);
}

double DecisionTree::predict(const Matrix& X, Eigen::Index row) const {
  std::size_t at = 0;
  while (nodes_[at].feature >= 0) {
    const auto& node = nodes_[at];
    at = static_cast<std::size_t>(X(row, node.feature) <= node.threshold ? node.left : node.right);
  }
  return nodes_[at].value;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

std::uint64_t DecisionTree::digest(std::uint64_t h) const {
  for (const auto& n : nodes_) {
    h = fnv1a_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(n.feature)), h);
    h = fnv1a_double(n.threshold, h);
    h = fnv1a_double(n.value, h);
  }
  return h;
}

Forest Forest::fit(const Matrix& X, std::span<const int> y, const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees == 0) throw InvalidArgument("forest: n_trees must be >= 1");
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = X.cols();
  Forest forest;
  forest.trees_.reserve(params.n_trees);
  forest.importances_ = Vector::Zero(p);

  std::vector<std::size_t> samples(n);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, {t}));
    if (params.bootstrap) {
      for (auto& s : samples) s = rng.below(n);
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    Vector imp = Vector::Zero(p);
    forest.trees_.push_back(DecisionTree::fit_classification(X, y, samples, params.tree, rng, &imp));
    const double total = imp.sum();
    if (total > 0.0) forest.importances_ += imp / total;
  }
  forest.importances_ /= static_cast<double>(params.n_trees);
  return forest;
}

double Forest::predict(const Matrix& X, Eigen::Index row) const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(X, row);
  return s / static_cast<double>(trees_.size());
}

std::uint64_t Forest::digest(std::uint64_t h) const {
  for (const auto& t : trees_) h = t.digest(h);
  return h;
}

}  // namespace stabsel
