#include "stabsel/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/fisher_f.hpp>
#include <fmt/format.h>

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"
#include "stabsel/tree.hpp"

namespace stabsel {

ReducerKind reducer_kind(ReducerId id) noexcept {
  switch (id) {
    case ReducerId::PCA:
    case ReducerId::TSVD:
    case ReducerId::SRP:
      return ReducerKind::Projection;
    default:
      return ReducerKind::Selector;
  }
}

bool is_supervised(ReducerId id) noexcept {
  switch (id) {
    case ReducerId::VT:
    case ReducerId::PCA:
    case ReducerId::TSVD:
    case ReducerId::SRP:
      return false;
    default:
      return true;
  }
}

std::uint64_t ReducerModel::digest() const {
  std::uint64_t h = fnv1a(to_string(id));
  h = fnv1a_u64(k, fnv1a_u64(input_dim, h));
  for (auto s : selected) h = fnv1a_u64(s, h);
  for (double v : mean) h = fnv1a_double(v, h);
  for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
    for (Eigen::Index j = 0; j < loadings.cols(); ++j) h = fnv1a_double(loadings(i, j), h);
  }
  return h;
}

std::vector<std::size_t> top_k(const Vector& scores, std::size_t k) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores[static_cast<Eigen::Index>(a)];
                      const double sb = scores[static_cast<Eigen::Index>(b)];
                      if (sa != sb) return sa > sb;
                      return a < b;
                    });
  order.resize(k);
  return order;
}

namespace feature_scores {
namespace {

struct ClassSplit {
  std::array<double, 2> count{0.0, 0.0};
};

ClassSplit count_classes(std::span<const int> y) {
  ClassSplit s;
  for (int v : y) s.count[static_cast<std::size_t>(v)] += 1.0;
  return s;
}

}  // namespace

Vector mutual_information(const Matrix& X, std::span<const int> y, std::size_t max_bins) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = X.cols();
  const auto cls = count_classes(y);
  Vector out(p);
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> bin(n);
  for (Eigen::Index j = 0; j < p; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return X(static_cast<Eigen::Index>(a), j) < X(static_cast<Eigen::Index>(b), j);
    });
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || X(static_cast<Eigen::Index>(order[i]), j) != X(static_cast<Eigen::Index>(order[i - 1]), j)) {
        ++distinct;
      }
    }
    const std::size_t bins = std::max<std::size_t>(1, std::min(max_bins, distinct));
    // Equal-frequency bins by sorted position; tied values share the bin of
    // their first occurrence.
    std::size_t first = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && X(static_cast<Eigen::Index>(order[i]), j) != X(static_cast<Eigen::Index>(order[i - 1]), j)) first = i;
      bin[order[i]] = first * bins / n;
    }
    std::vector<std::array<double, 2>> joint(bins, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) joint[bin[i]][static_cast<std::size_t>(y[i])] += 1.0;
    double mi = 0.0;
    const double nd = static_cast<double>(n);
    for (const auto& row : joint) {
      const double pb = (row[0] + row[1]) / nd;
      for (std::size_t c = 0; c < 2; ++c) {
        if (row[c] == 0.0) continue;
        const double pbc = row[c] / nd;
        mi += pbc * std::log(pbc / (pb * (cls.count[c] / nd)));
      }
    }
    out[j] = std::max(0.0, mi);
  }
  return out;
}

Vector anova_f(const Matrix& X, std::span<const int> y) {
  const auto n = X.rows();
  const auto p = X.cols();
  const auto cls = count_classes(y);
  Vector out(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    std::array<double, 2> sum{0.0, 0.0};
    for (Eigen::Index i = 0; i < n; ++i) sum[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += X(i, j);
    const std::array<double, 2> mean{sum[0] / cls.count[0], sum[1] / cls.count[1]};
    const double grand = (sum[0] + sum[1]) / static_cast<double>(n);
    double ssw = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = X(i, j) - mean[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
      ssw += d * d;
    }
    const double ssb = cls.count[0] * (mean[0] - grand) * (mean[0] - grand) +
                       cls.count[1] * (mean[1] - grand) * (mean[1] - grand);
    const double msb = ssb / 1.0;
    const double msw = ssw / static_cast<double>(std::max<Eigen::Index>(n - 2, 1));
    out[j] = msb / std::max(msw, 1e-12);
  }
  return out;
}

Vector anova_p(const Matrix& X, std::span<const int> y) {
  const Vector f = anova_f(X, y);
  const boost::math::fisher_f_distribution<double> dist(1.0, static_cast<double>(std::max<Eigen::Index>(X.rows() - 2, 1)));
  Vector out(f.size());
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    out[j] = std::isfinite(f[j]) ? boost::math::cdf(boost::math::complement(dist, f[j])) : 0.0;
  }
  return out;
}

Vector variance(const Matrix& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  return (X.rowwise() - mean).array().square().colwise().mean().transpose();
}

Vector abs_correlation(const Matrix& X, std::span<const int> y) {
  const auto n = X.rows();
  Vector yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = y[static_cast<std::size_t>(i)];
  const Vector yc = yv.array() - yv.mean();
  const double ynorm = yc.norm();
  Vector out(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Vector xc = X.col(j).array() - X.col(j).mean();
    const double xnorm = xc.norm();
    out[j] = (xnorm > 0.0 && ynorm > 0.0) ? std::abs(xc.dot(yc)) / (xnorm * ynorm) : 0.0;
  }
  return out;
}

Vector chi_square(const Matrix& X, std::span<const int> y) {
  if ((X.array() < 0.0).any()) throw InvalidArgument("chi-square scoring requires non-negative features");
  const auto n = X.rows();
  const auto cls = count_classes(y);
  Vector out(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::array<double, 2> observed{0.0, 0.0};
    for (Eigen::Index i = 0; i < n; ++i) observed[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += X(i, j);
    const double total = observed[0] + observed[1];
    double chi = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      const double expected = total * cls.count[c] / static_cast<double>(n);
      if (expected > 0.0) chi += (observed[c] - expected) * (observed[c] - expected) / expected;
    }
    out[j] = chi;
  }
  return out;
}

}  // namespace feature_scores

namespace {

Vector forest_importance(const Matrix& X, std::span<const int> y, bool extra, std::size_t n_trees,
                         std::uint64_t seed) {
  ForestParams fp;
  fp.n_trees = n_trees;
  fp.bootstrap = !extra;
  fp.tree.random_thresholds = extra;
  fp.tree.max_features = sqrt_features(static_cast<std::size_t>(X.cols()));
  return Forest::fit(X, y, fp, seed).importances();
}

Matrix gather_columns(const Matrix& X, std::span<const std::size_t> cols) {
  Matrix out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = X.col(static_cast<Eigen::Index>(cols[c]));
  return out;
}

// Recursive feature elimination driven by extra-trees importance. Survivors
// are returned in ascending index order; scores record the round in which a
// feature was eliminated (survivors get the highest value).
std::vector<std::size_t> recursive_elimination(const Matrix& X, std::span<const int> y, std::size_t k,
                                               double step, std::size_t n_trees, std::uint64_t seed,
                                               Vector& scores) {
  const auto p = static_cast<std::size_t>(X.cols());
  std::vector<std::size_t> alive(p);
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  scores = Vector::Zero(static_cast<Eigen::Index>(p));
  std::size_t round = 0;
  while (alive.size() > k) {
    ++round;
    const Vector imp = forest_importance(gather_columns(X, alive), y, true, n_trees, derive_seed(seed, {round}));
    const auto drop = std::min(alive.size() - k,
                               std::max<std::size_t>(1, static_cast<std::size_t>(step * static_cast<double>(alive.size()))));
    std::vector<std::size_t> pos(alive.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    // Worst first; among equal importances the higher feature index goes first.
    std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
      const double ia = imp[static_cast<Eigen::Index>(a)];
      const double ib = imp[static_cast<Eigen::Index>(b)];
      if (ia != ib) return ia < ib;
      return alive[a] > alive[b];
    });
    std::vector<bool> dropped(alive.size(), false);
    for (std::size_t d = 0; d < drop; ++d) {
      dropped[pos[d]] = true;
      scores[static_cast<Eigen::Index>(alive[pos[d]])] = static_cast<double>(round);
    }
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (!dropped[i]) next.push_back(alive[i]);
    }
    alive = std::move(next);
  }
  for (auto a : alive) scores[static_cast<Eigen::Index>(a)] = static_cast<double>(round + 1);
  return alive;
}

// Eigenvectors of a symmetric matrix for its k largest eigenvalues, as rows,
// each flipped so that its largest-magnitude entry is positive.
void top_eigenvectors(const Matrix& sym, std::size_t k, Matrix& rows, Vector& values) {
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const auto p = sym.rows();
  rows.resize(static_cast<Eigen::Index>(k), p);
  values.resize(static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    const Eigen::Index src = p - 1 - static_cast<Eigen::Index>(c);  // ascending order from the solver
    Vector v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < p; ++j) {
      if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    }
    if (v[arg] < 0.0) v = -v;
    rows.row(static_cast<Eigen::Index>(c)) = v.transpose();
    values[static_cast<Eigen::Index>(c)] = std::max(0.0, solver.eigenvalues()[src]);
  }
}

void check_inputs(const PipelineSpec& spec, const Matrix& X, std::span<const int> y) {
  const auto name = to_string(spec.reducer);
  validate_spec(spec);
  if (X.rows() < 2) throw InvalidArgument(fmt::format("{}: needs at least 2 training rows", name));
  if (X.cols() < 1) throw InvalidArgument(fmt::format("{}: no input features", name));
  if (!X.allFinite()) throw InvalidArgument(fmt::format("{}: non-finite input", name));
  if (!is_supervised(spec.reducer)) return;
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw InvalidArgument(fmt::format("{}: X has {} rows but y has {} labels", name, X.rows(), y.size()));
  }
  bool seen[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument(fmt::format("{}: label {} not in {{0,1}}", name, v));
    seen[v] = true;
  }
  if (!seen[0] || !seen[1]) throw InvalidArgument(fmt::format("{}: supervised scorer needs both classes", name));
}

}  // namespace

ReducerModel fit_reducer(const PipelineSpec& spec, const Matrix& X, std::span<const int> y) {
  check_inputs(spec, X, y);
  const auto p = static_cast<std::size_t>(X.cols());
  ReducerModel model;
  model.id = spec.reducer;
  model.kind = reducer_kind(spec.reducer);
  model.input_dim = p;
  model.seed = spec.seed;
  model.k = std::min(spec.target_dim, p);
  if (model.k < spec.target_dim) {
    model.warnings.push_back(
        fmt::format("target_dim {} clamped to {} (input has {} features)", spec.target_dim, model.k, p));
  }
  const auto n_trees = static_cast<std::size_t>(std::max(1.0, spec.reducer_param("n_trees", 100)));

  switch (spec.reducer) {
    case ReducerId::MI:
      model.scores = feature_scores::mutual_information(
          X, y, static_cast<std::size_t>(std::max(1.0, spec.reducer_param("max_bins", 10))));
      break;
    case ReducerId::AFT:
    case ReducerId::UFS:
      model.scores = feature_scores::anova_f(X, y);
      break;
    case ReducerId::APT:
      // Ranked by ascending p-value, stored negated so larger is better.
      model.scores = -feature_scores::anova_p(X, y);
      break;
    case ReducerId::VT:
      model.scores = feature_scores::variance(X);
      break;
    case ReducerId::CC:
      model.scores = feature_scores::abs_correlation(X, y);
      break;
    case ReducerId::CST:
      model.scores = feature_scores::chi_square(X, y);
      break;
    case ReducerId::ETIm:
      model.scores = forest_importance(X, y, true, n_trees, spec.seed);
      break;
    case ReducerId::FIRF:
      model.scores = forest_importance(X, y, false, n_trees, spec.seed);
      break;
    case ReducerId::RFE:
      model.selected = recursive_elimination(X, y, model.k, spec.reducer_param("step", 0.1), n_trees, spec.seed,
                                             model.scores);
      return model;
    case ReducerId::PCA: {
      model.mean = X.colwise().mean().transpose();
      const Matrix centered = X.rowwise() - model.mean.transpose();
      const Matrix cov = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
      top_eigenvectors(cov, model.k, model.loadings, model.explained_variance);
      return model;
    }
    case ReducerId::TSVD: {
      model.mean = Vector::Zero(static_cast<Eigen::Index>(p));
      Vector eig;
      top_eigenvectors(X.transpose() * X, model.k, model.loadings, eig);
      const Matrix proj = X * model.loadings.transpose();
      const Eigen::RowVectorXd pm = proj.colwise().mean();
      model.explained_variance = (proj.rowwise() - pm).array().square().colwise().mean().transpose();
      return model;
    }
    case ReducerId::SRP: {
      model.mean = Vector::Zero(static_cast<Eigen::Index>(p));
      const double density = std::clamp(spec.reducer_param("density", 1.0 / std::sqrt(static_cast<double>(p))), 1e-12, 1.0);
      const double magnitude = std::sqrt(1.0 / density) / std::sqrt(static_cast<double>(model.k));
      Rng rng(derive_seed(spec.seed, {0x5A9}));
      model.loadings = Matrix::Zero(static_cast<Eigen::Index>(model.k), static_cast<Eigen::Index>(p));
      for (Eigen::Index i = 0; i < model.loadings.rows(); ++i) {
        for (Eigen::Index j = 0; j < model.loadings.cols(); ++j) {
          const double u = rng.uniform();
          if (u < density / 2.0) {
            model.loadings(i, j) = magnitude;
          } else if (u < density) {
            model.loadings(i, j) = -magnitude;
          }
        }
      }
      return model;
    }
  }
  model.selected = top_k(model.scores, model.k);
  return model;
}

Matrix apply_reducer(const ReducerModel& model, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != model.input_dim) {
    throw InvalidArgument(fmt::format("{}: expected {} columns, got {}", to_string(model.id), model.input_dim, X.cols()));
  }
  if (model.kind == ReducerKind::Selector) return gather_columns(X, model.selected);
  return (X.rowwise() - model.mean.transpose()) * model.loadings.transpose();
}

}  // namespace stabsel
