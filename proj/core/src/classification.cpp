#include "stabsel/classification.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"
#include "stabsel/tree.hpp"

namespace stabsel {

Vector ClassifierModel::predict_score(const Matrix& X) const {
  if (static_cast<std::size_t>(X.cols()) != input_dim_) {
    throw InvalidArgument(fmt::format("{}: expected {} columns, got {}", to_string(id_), input_dim_, X.cols()));
  }
  Vector s = score_rows(X);
  for (auto& v : s) v = std::clamp(v, 0.0, 1.0);
  return s;
}

Labels ClassifierModel::predict_label(const Matrix& X) const {
  const Vector s = predict_score(X);
  Labels out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s[i] >= 0.5 ? 1 : 0;
  return out;
}

namespace {

std::uint64_t hash_vector(const Vector& v, std::uint64_t h) {
  for (double x : v) h = fnv1a_double(x, h);
  return h;
}

int int_param(const PipelineSpec& spec, std::string_view key, int fallback) {
  return static_cast<int>(std::lround(spec.classifier_param(key, fallback)));
}

class ForestModel final : public ClassifierModel {
 public:
  ForestModel(ClassifierId id, std::uint64_t seed, std::size_t dim, double prior, Forest forest, Params hp)
      : ClassifierModel(id, seed, dim, prior), forest_(std::move(forest)), hp_(std::move(hp)) {}

  std::uint64_t digest() const override { return forest_.digest(fnv1a(to_string(id()))); }
  Params hyperparameters() const override { return hp_; }

 protected:
  Vector score_rows(const Matrix& X) const override {
    Vector s(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) s[i] = forest_.predict(X, i);
    return s;
  }

 private:
  Forest forest_;
  Params hp_;
};

class TreeModel final : public ClassifierModel {
 public:
  TreeModel(std::uint64_t seed, std::size_t dim, double prior, DecisionTree tree, Params hp)
      : ClassifierModel(ClassifierId::DT, seed, dim, prior), tree_(std::move(tree)), hp_(std::move(hp)) {}

  std::uint64_t digest() const override { return tree_.digest(fnv1a("DT")); }
  Params hyperparameters() const override { return hp_; }

 protected:
  Vector score_rows(const Matrix& X) const override {
    Vector s(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) s[i] = tree_.predict(X, i);
    return s;
  }

 private:
  DecisionTree tree_;
  Params hp_;
};

class BoostingModel final : public ClassifierModel {
 public:
  BoostingModel(std::uint64_t seed, std::size_t dim, double prior, double init, double rate,
                std::vector<DecisionTree> trees, Params hp)
      : ClassifierModel(ClassifierId::GB, seed, dim, prior),
        init_(init),
        rate_(rate),
        trees_(std::move(trees)),
        hp_(std::move(hp)) {}

  std::uint64_t digest() const override {
    std::uint64_t h = fnv1a_double(init_, fnv1a("GB"));
    for (const auto& t : trees_) h = t.digest(h);
    return h;
  }
  Params hyperparameters() const override { return hp_; }

  Vector margin(const Matrix& X) const {
    Vector f = Vector::Constant(X.rows(), init_);
    for (const auto& t : trees_) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) f[i] += rate_ * t.predict(X, i);
    }
    return f;
  }

 protected:
  Vector score_rows(const Matrix& X) const override { return margin(X).unaryExpr(&sigmoid); }

 private:
  double init_;
  double rate_;
  std::vector<DecisionTree> trees_;
  Params hp_;
};

class KnnModel final : public ClassifierModel {
 public:
  KnnModel(std::uint64_t seed, double prior, Matrix X, Labels y, std::size_t k)
      : ClassifierModel(ClassifierId::KNN, seed, static_cast<std::size_t>(X.cols()), prior),
        X_(std::move(X)),
        y_(std::move(y)),
        k_(std::min(k, y_.size())) {}

  std::uint64_t digest() const override {
    std::uint64_t h = fnv1a_u64(k_, fnv1a("KNN"));
    for (Eigen::Index i = 0; i < X_.rows(); ++i) {
      for (Eigen::Index j = 0; j < X_.cols(); ++j) h = fnv1a_double(X_(i, j), h);
      h = fnv1a_u64(static_cast<std::uint64_t>(y_[static_cast<std::size_t>(i)]), h);
    }
    return h;
  }
  Params hyperparameters() const override { return {{"k", static_cast<double>(k_)}}; }

 protected:
  Vector score_rows(const Matrix& X) const override {
    const auto n = static_cast<std::size_t>(X_.rows());
    std::vector<std::pair<double, std::size_t>> dist(n);
    Vector s(X.rows());
    // Distance ties are broken by the training row's values, then its label,
    // so the neighbour set does not depend on training row order.
    auto before = [&](const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) {
      if (a.first != b.first) return a.first < b.first;
      for (Eigen::Index j = 0; j < X_.cols(); ++j) {
        const double va = X_(static_cast<Eigen::Index>(a.second), j);
        const double vb = X_(static_cast<Eigen::Index>(b.second), j);
        if (va != vb) return va < vb;
      }
      return y_[a.second] < y_[b.second];
    };
    for (Eigen::Index q = 0; q < X.rows(); ++q) {
      for (std::size_t i = 0; i < n; ++i) {
        dist[i] = {(X_.row(static_cast<Eigen::Index>(i)) - X.row(q)).squaredNorm(), i};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end(), before);
      std::size_t positives = 0;
      for (std::size_t i = 0; i < k_; ++i) positives += static_cast<std::size_t>(y_[dist[i].second]);
      s[q] = static_cast<double>(positives) / static_cast<double>(k_);
    }
    return s;
  }

 private:
  Matrix X_;
  Labels y_;
  std::size_t k_;
};

class GaussianNbModel final : public ClassifierModel {
 public:
  GaussianNbModel(std::uint64_t seed, std::size_t dim, double prior, std::array<Vector, 2> mean,
                  std::array<Vector, 2> var, double smoothing)
      : ClassifierModel(ClassifierId::GNB, seed, dim, prior), mean_(std::move(mean)), var_(std::move(var)),
        smoothing_(smoothing) {}

  std::uint64_t digest() const override {
    std::uint64_t h = fnv1a_double(class_prior(), fnv1a("GNB"));
    for (int c = 0; c < 2; ++c) h = hash_vector(var_[c], hash_vector(mean_[c], h));
    return h;
  }
  Params hyperparameters() const override { return {{"var_smoothing", smoothing_}}; }

 protected:
  Vector score_rows(const Matrix& X) const override {
    std::array<double, 2> log_norm{};
    for (int c = 0; c < 2; ++c) {
      log_norm[c] = -0.5 * (2.0 * std::numbers::pi * var_[c].array()).log().sum();
    }
    const std::array<double, 2> log_prior{std::log(1.0 - class_prior()), std::log(class_prior())};
    Vector s(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      std::array<double, 2> jll{};
      for (int c = 0; c < 2; ++c) {
        const auto diff = X.row(i).transpose() - mean_[c];
        jll[c] = log_prior[c] + log_norm[c] - 0.5 * (diff.array().square() / var_[c].array()).sum();
      }
      s[i] = sigmoid(jll[1] - jll[0]);
    }
    return s;
  }

 private:
  std::array<Vector, 2> mean_;
  std::array<Vector, 2> var_;
  double smoothing_;
};

class LogisticModel final : public ClassifierModel {
 public:
  LogisticModel(std::uint64_t seed, double prior, Vector w, double b, Params hp)
      : ClassifierModel(ClassifierId::LOGIT, seed, static_cast<std::size_t>(w.size()), prior),
        w_(std::move(w)),
        b_(b),
        hp_(std::move(hp)) {}

  std::uint64_t digest() const override { return fnv1a_double(b_, hash_vector(w_, fnv1a("LOGIT"))); }
  Params hyperparameters() const override { return hp_; }

 protected:
  Vector score_rows(const Matrix& X) const override {
    return ((X * w_).array() + b_).matrix().unaryExpr(&sigmoid);
  }

 private:
  Vector w_;
  double b_;
  Params hp_;
};

class CentroidModel final : public ClassifierModel {
 public:
  CentroidModel(std::uint64_t seed, double prior, Vector c0, Vector c1)
      : ClassifierModel(ClassifierId::NC, seed, static_cast<std::size_t>(c0.size()), prior),
        c0_(std::move(c0)),
        c1_(std::move(c1)) {}

  std::uint64_t digest() const override { return hash_vector(c1_, hash_vector(c0_, fnv1a("NC"))); }
  Params hyperparameters() const override { return {}; }

 protected:
  Vector score_rows(const Matrix& X) const override {
    Vector s(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double d0 = (X.row(i).transpose() - c0_).norm();
      const double d1 = (X.row(i).transpose() - c1_).norm();
      s[i] = sigmoid(d0 - d1);
    }
    return s;
  }

 private:
  Vector c0_;
  Vector c1_;
};

class DummyModel final : public ClassifierModel {
 public:
  DummyModel(std::uint64_t seed, std::size_t dim, double prior) : ClassifierModel(ClassifierId::DUMMY, seed, dim, prior) {}

  std::uint64_t digest() const override { return fnv1a_double(class_prior(), fnv1a("DUMMY")); }
  Params hyperparameters() const override { return {}; }

 protected:
  Vector score_rows(const Matrix& X) const override { return Vector::Constant(X.rows(), class_prior()); }
};

void check_training_data(const PipelineSpec& spec, const Matrix& X, std::span<const int> y) {
  const auto name = to_string(spec.classifier);
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw InvalidArgument(fmt::format("{}: X has {} rows but y has {} labels", name, X.rows(), y.size()));
  }
  if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument(fmt::format("{}: empty training matrix", name));
  if (!X.allFinite()) throw InvalidArgument(fmt::format("{}: non-finite training input", name));
  bool seen[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument(fmt::format("{}: label {} not in {{0,1}}", name, v));
    seen[v] = true;
  }
  if (!seen[0] || !seen[1]) throw InvalidArgument(fmt::format("{}: training labels contain a single class", name));
}

TreeParams tree_params(const PipelineSpec& spec, std::size_t default_max_features, bool random) {
  TreeParams tp;
  tp.random_thresholds = random;
  tp.max_depth = int_param(spec, "max_depth", -1);
  if (tp.max_depth == 0) tp.max_depth = -1;
  tp.min_samples_leaf = static_cast<std::size_t>(std::max(1, int_param(spec, "min_samples_leaf", 1)));
  const int mf = int_param(spec, "max_features", static_cast<int>(default_max_features));
  tp.max_features = static_cast<std::size_t>(std::max(0, mf));
  return tp;
}

}  // namespace

ClassifierPtr fit_classifier(const PipelineSpec& spec, const Matrix& X, std::span<const int> y) {
  check_training_data(spec, X, y);
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double prior = positives / static_cast<double>(n);
  const std::uint64_t seed = spec.seed;

  switch (spec.classifier) {
    case ClassifierId::ETr:
    case ClassifierId::RandF: {
      const bool extra = spec.classifier == ClassifierId::ETr;
      ForestParams fp;
      fp.n_trees = static_cast<std::size_t>(std::max(1, int_param(spec, "n_trees", 100)));
      fp.bootstrap = !extra;
      fp.tree = tree_params(spec, sqrt_features(p), extra);
      Params hp{{"n_trees", static_cast<double>(fp.n_trees)},
                {"max_depth", static_cast<double>(fp.tree.max_depth)},
                {"max_features", static_cast<double>(fp.tree.max_features)},
                {"min_samples_leaf", static_cast<double>(fp.tree.min_samples_leaf)}};
      return std::make_shared<ForestModel>(spec.classifier, seed, p, prior, Forest::fit(X, y, fp, seed), std::move(hp));
    }
    case ClassifierId::DT: {
      const TreeParams tp = tree_params(spec, 0, false);
      std::vector<std::size_t> samples(n);
      std::iota(samples.begin(), samples.end(), std::size_t{0});
      Rng rng(seed);
      Params hp{{"max_depth", static_cast<double>(tp.max_depth)},
                {"min_samples_leaf", static_cast<double>(tp.min_samples_leaf)}};
      return std::make_shared<TreeModel>(seed, p, prior, DecisionTree::fit_classification(X, y, samples, tp, rng),
                                         std::move(hp));
    }
    case ClassifierId::GB: {
      const auto n_trees = static_cast<std::size_t>(std::max(0, int_param(spec, "n_trees", 100)));
      const double rate = spec.classifier_param("learning_rate", 0.1);
      TreeParams tp;
      tp.max_depth = int_param(spec, "max_depth", 3);
      tp.min_samples_leaf = static_cast<std::size_t>(std::max(1, int_param(spec, "min_samples_leaf", 1)));
      const double init = std::log(prior / (1.0 - prior));
      std::vector<std::size_t> samples(n);
      std::iota(samples.begin(), samples.end(), std::size_t{0});
      std::vector<double> margin(n, init);
      std::vector<double> residual(n);
      std::vector<double> hessian(n);
      std::vector<DecisionTree> trees;
      trees.reserve(n_trees);
      Rng rng(seed);
      for (std::size_t m = 0; m < n_trees; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
          const double prob = sigmoid(margin[i]);
          residual[i] = static_cast<double>(y[i]) - prob;
          hessian[i] = prob * (1.0 - prob);
        }
        trees.push_back(DecisionTree::fit_boosting(X, residual, hessian, samples, tp, rng));
        for (std::size_t i = 0; i < n; ++i) margin[i] += rate * trees.back().predict(X, static_cast<Eigen::Index>(i));
      }
      Params hp{{"n_trees", static_cast<double>(n_trees)},
                {"learning_rate", rate},
                {"max_depth", static_cast<double>(tp.max_depth)}};
      return std::make_shared<BoostingModel>(seed, p, prior, init, rate, std::move(trees), std::move(hp));
    }
    case ClassifierId::KNN: {
      const auto k = static_cast<std::size_t>(std::max(1, int_param(spec, "k", 5)));
      return std::make_shared<KnnModel>(seed, prior, X, Labels(y.begin(), y.end()), k);
    }
    case ClassifierId::GNB: {
      const double smoothing = spec.classifier_param("var_smoothing", 1e-9);
      const Vector overall_mean = X.colwise().mean();
      const double max_var = (X.rowwise() - overall_mean.transpose()).array().square().colwise().mean().maxCoeff();
      const double epsilon = max_var > 0.0 ? smoothing * max_var : smoothing;
      std::array<Vector, 2> mean{Vector::Zero(static_cast<Eigen::Index>(p)), Vector::Zero(static_cast<Eigen::Index>(p))};
      std::array<Vector, 2> var = mean;
      std::array<double, 2> count{0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        mean[y[i]] += X.row(static_cast<Eigen::Index>(i)).transpose();
        count[y[i]] += 1.0;
      }
      for (int c = 0; c < 2; ++c) mean[c] /= count[c];
      for (std::size_t i = 0; i < n; ++i) {
        var[y[i]] += (X.row(static_cast<Eigen::Index>(i)).transpose() - mean[y[i]]).array().square().matrix();
      }
      for (int c = 0; c < 2; ++c) var[c] = (var[c] / count[c]).array() + epsilon;
      return std::make_shared<GaussianNbModel>(seed, p, prior, std::move(mean), std::move(var), smoothing);
    }
    case ClassifierId::LOGIT: {
      const auto iterations = static_cast<std::size_t>(std::max(0, int_param(spec, "iterations", 1000)));
      const double step = spec.classifier_param("step", 0.1);
      const double l2 = spec.classifier_param("l2", 1e-4);
      Vector w = Vector::Zero(static_cast<Eigen::Index>(p));
      double b = 0.0;
      Vector yv(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) yv[static_cast<Eigen::Index>(i)] = y[i];
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t it = 0; it < iterations; ++it) {
        const Vector err = ((X * w).array() + b).matrix().unaryExpr(&sigmoid) - yv;
        const Vector grad_w = inv_n * (X.transpose() * err) + l2 * w;
        const double grad_b = inv_n * err.sum();
        w -= step * grad_w;
        b -= step * grad_b;
      }
      Params hp{{"iterations", static_cast<double>(iterations)}, {"step", step}, {"l2", l2}};
      return std::make_shared<LogisticModel>(seed, prior, std::move(w), b, std::move(hp));
    }
    case ClassifierId::NC: {
      Vector c0 = Vector::Zero(static_cast<Eigen::Index>(p));
      Vector c1 = c0;
      double n0 = 0.0;
      double n1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] == 1) {
          c1 += X.row(static_cast<Eigen::Index>(i)).transpose();
          n1 += 1.0;
        } else {
          c0 += X.row(static_cast<Eigen::Index>(i)).transpose();
          n0 += 1.0;
        }
      }
      return std::make_shared<CentroidModel>(seed, prior, c0 / n0, c1 / n1);
    }
    case ClassifierId::DUMMY:
      return std::make_shared<DummyModel>(seed, p, prior);
  }
  throw InvalidArgument("unknown classifier id");
}

}  // namespace stabsel
