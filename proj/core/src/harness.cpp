#include "stabsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <optional>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"
#include "stabsel/stats.hpp"

namespace stabsel {

std::vector<std::size_t> FoldAssignment::members(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != f) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument(fmt::format("stratified_folds: k must be >= 2 (got {})", k));
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidArgument("stratified_folds: labels must be 0/1");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) throw InvalidArgument(fmt::format("stratified_folds: class {} has no members", c));
  }
  if (by_class[0].size() < k && by_class[1].size() < k) {
    const int c = by_class[1].size() < by_class[0].size() ? 1 : 0;
    throw InvalidArgument(fmt::format("stratified_folds: class {} has {} members, fewer than k={}", c,
                                      by_class[c].size(), k));
  }

  FoldAssignment out;
  out.k = k;
  out.seed = seed;
  out.fold_of.assign(labels.size(), 0);
  out.class_counts.assign(k, {0, 0});
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, {c}));
    rng.shuffle(by_class[c].begin(), by_class[c].end());
    for (auto i : by_class[c]) {
      out.fold_of[i] = cursor;
      ++out.class_counts[cursor][c];
      cursor = (cursor + 1) % k;
    }
  }
  return out;
}

std::vector<PipelineSpec> expand_grid(const PipelineSpec& base, const ParamGrid& grid) {
  std::vector<PipelineSpec> out{base};
  const auto reducer = to_string(base.reducer);
  const auto classifier = to_string(base.classifier);
  for (const auto& axis : grid) {
    const bool on_reducer = axis.target == reducer;
    const bool on_classifier = axis.target == classifier;
    if (!on_reducer && !on_classifier) continue;
    if (axis.values.empty()) throw InvalidArgument("grid axis '" + axis.target + "." + axis.name + "' has no values");
    std::vector<PipelineSpec> next;
    next.reserve(out.size() * axis.values.size());
    for (const auto& spec : out) {
      for (double v : axis.values) {
        PipelineSpec s = spec;
        (on_reducer ? s.reducer_params : s.classifier_params)[axis.name] = v;
        next.push_back(std::move(s));
      }
    }
    out = std::move(next);
  }
  return out;
}

Vector FittedPipeline::predict_score(const FeatureTable& table, std::span<const std::size_t> rows) const {
  return classifier->predict_score(apply_reducer(reducer, transform_minmax(minmax, table, rows)));
}

namespace {

Labels labels_of(const FeatureTable& table, std::span<const std::size_t> rows) {
  Labels y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(table.labels[r]);
  return y;
}

}  // namespace

FittedPipeline fit_pipeline(const FeatureTable& table, std::span<const std::size_t> train_rows,
                            const PipelineSpec& spec) {
  FittedPipeline fitted;
  fitted.spec = spec;
  fitted.minmax = fit_minmax(table, train_rows);
  const Matrix X = transform_minmax(fitted.minmax, table, train_rows);
  const Labels y = labels_of(table, train_rows);
  fitted.reducer = fit_reducer(spec, X, y);
  fitted.classifier = fit_classifier(spec, apply_reducer(fitted.reducer, X), y);
  return fitted;
}

MetricVector evaluate_pipeline(const FittedPipeline& fitted, const FeatureTable& table,
                               std::span<const std::size_t> rows, AveragingMode mode) {
  const Vector score = fitted.predict_score(table, rows);
  Labels pred(rows.size());
  std::vector<double> s(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s[i] = score[static_cast<Eigen::Index>(i)];
    pred[i] = s[i] >= 0.5 ? 1 : 0;
  }
  return compute_metrics(labels_of(table, rows), pred, s, mode);
}

PipelineSpec grid_search(const FeatureTable& table, std::span<const std::size_t> train_rows,
                         std::span<const PipelineSpec> candidates, std::size_t inner_k, std::uint64_t seed,
                         AveragingMode mode) {
  if (candidates.empty()) throw InvalidArgument("grid_search: empty grid");
  if (candidates.size() == 1) return candidates.front();

  const Labels y = labels_of(table, train_rows);
  const FoldAssignment folds = stratified_folds(y, inner_k, seed);
  std::vector<std::pair<RowIndices, RowIndices>> splits;
  for (std::size_t f = 0; f < inner_k; ++f) {
    RowIndices fit_rows;
    RowIndices eval_rows;
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      (folds.fold_of[i] == f ? eval_rows : fit_rows).push_back(train_rows[i]);
    }
    splits.emplace_back(std::move(fit_rows), std::move(eval_rows));
  }

  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double total = 0.0;
    for (std::size_t f = 0; f < splits.size(); ++f) {
      PipelineSpec inner = candidates[c];
      inner.seed = derive_seed(candidates[c].seed, {0x1AAE5, f});
      const auto fitted = fit_pipeline(table, splits[f].first, inner);
      total += evaluate_pipeline(fitted, table, splits[f].second, mode).metrics.accuracy();
    }
    const double score = total / static_cast<double>(splits.size());
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return candidates[best];
}

RotationOutcome run_rotation(const FeatureTable& table, const CohortPlan& plan, std::size_t rotation,
                             const PipelineSpec& spec, const EvalOptions& options) {
  validate_spec(spec);
  const Rotation& rot = plan.rotation(rotation);

  // The CV pool is ordered by subject id so that fold membership does not
  // depend on the order of rows in the input file.
  RowIndices pool = table.rows_in(rot.train);
  std::sort(pool.begin(), pool.end(),
            [&](std::size_t a, std::size_t b) { return table.subject_ids[a] < table.subject_ids[b]; });
  const RowIndices external = table.rows_in(rot.test);
  if (pool.empty()) throw InvalidArgument("rotation has no training rows");
  if (external.empty()) throw InvalidArgument("rotation has no external rows");

  const FoldAssignment folds = stratified_folds(labels_of(table, pool), options.k, derive_seed(options.fold_seed, {rotation}));
  const std::vector<PipelineSpec> candidates =
      options.grid_search ? expand_grid(spec, options.grid) : std::vector<PipelineSpec>{spec};

  RotationOutcome out;
  out.external_rows = external;
  out.record.rotation = rotation;
  out.record.test_cohort = rot.test;

  for (std::size_t f = 0; f < options.k; ++f) {
    FoldRecord rec;
    rec.fold = f;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (folds.fold_of[i] == f ? rec.heldout_rows : rec.train_rows).push_back(pool[i]);
    }
    // grid_search and fitting see the training rows in subject-id order.
    RowIndices train_by_id;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (folds.fold_of[i] != f) train_by_id.push_back(pool[i]);
    }
    std::sort(rec.train_rows.begin(), rec.train_rows.end());
    std::sort(rec.heldout_rows.begin(), rec.heldout_rows.end());

    PipelineSpec chosen = candidates.size() > 1
                              ? grid_search(table, train_by_id, candidates, options.inner_k,
                                            derive_seed(options.fold_seed, {rotation, f, 0x6E1D}), options.mode)
                              : candidates.front();
    chosen.seed = spec.seed ^ derive_seed(rotation, {f});

    const FittedPipeline fitted = fit_pipeline(table, train_by_id, chosen);
    rec.cv = evaluate_pipeline(fitted, table, rec.heldout_rows, options.mode);
    rec.external = evaluate_pipeline(fitted, table, external, options.mode);

    rec.fitted_spec = chosen;
    rec.minmax_fingerprint = fitted.minmax.fingerprint;
    rec.reducer_digest = fitted.reducer.digest();
    rec.classifier_digest = fitted.classifier->digest();
    rec.reduced_dim = fitted.reducer.k;
    if (fitted.reducer.kind == ReducerKind::Selector) {
      for (auto j : fitted.reducer.selected) rec.selected_features.push_back(table.feature_names[j]);
    }
    rec.classifier_hyperparameters = fitted.classifier->hyperparameters();
    rec.warnings = fitted.reducer.warnings;
    if (rec.cv.auc_undefined) rec.warnings.emplace_back("held-out fold has a single class; ROC-AUC set to 0.5");
    if (rec.external.auc_undefined) rec.warnings.emplace_back("external cohort has a single class; ROC-AUC set to 0.5");
    out.folds.push_back(std::move(rec));
  }

  for (std::size_t m = 0; m < kMetricCount; ++m) {
    std::vector<double> cv;
    std::vector<double> ext;
    for (const auto& rec : out.folds) {
      cv.push_back(rec.cv.metrics.values[m]);
      ext.push_back(rec.external.metrics.values[m]);
    }
    out.record.cv_mean[m] = mean(cv);
    out.record.cv_sd[m] = population_sd(cv);
    out.record.ext_mean[m] = mean(ext);
    out.record.ext_sd[m] = population_sd(ext);
  }
  return out;
}

std::vector<double> PipelineResult::fold_accuracies() const {
  std::vector<double> out;
  for (const auto& rot : rotations) {
    for (const auto& f : rot.folds) out.push_back(f.cv.metrics.accuracy());
  }
  return out;
}

std::size_t SweepResult::n_failed() const {
  return static_cast<std::size_t>(std::count_if(pipelines.begin(), pipelines.end(), [](const auto& p) { return !p.ok; }));
}

SweepResult run_sweep(const FeatureTable& table, const CohortPlan& plan, std::span<const PipelineSpec> specs,
                      const SweepOptions& options) {
  if (specs.empty()) throw InvalidArgument("run_sweep: no pipelines");
  std::set<std::string> ids;
  for (const auto& s : specs) {
    if (!ids.insert(s.id()).second) throw InvalidArgument("run_sweep: duplicate pipeline id " + s.id());
  }

  const std::size_t n_rot = plan.n_rotations();
  const std::size_t n_tasks = specs.size() * n_rot;
  std::vector<std::optional<RotationOutcome>> outcomes(n_tasks);
  std::vector<std::string> errors(n_tasks);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) {
      const std::size_t p = t / n_rot;
      const std::size_t r = t % n_rot;
      try {
        outcomes[t] = run_rotation(table, plan, r, specs[p], options);
      } catch (const std::exception& e) {
        errors[t] = e.what();
      }
    }
  };

  std::size_t workers = options.workers == 0 ? std::max(1U, std::thread::hardware_concurrency()) : options.workers;
  workers = std::min(workers, n_tasks);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  SweepResult out;
  out.rotations = plan.rotations();
  out.k = options.k;
  out.pipelines.reserve(specs.size());
  for (std::size_t p = 0; p < specs.size(); ++p) {
    PipelineResult res;
    res.spec = specs[p];
    res.id = specs[p].id();
    for (std::size_t r = 0; r < n_rot; ++r) {
      const std::size_t t = p * n_rot + r;
      if (!outcomes[t]) {
        res.ok = false;
        if (res.error.empty()) res.error = fmt::format("rotation {} ({}): {}", r + 1, plan.rotation(r).test, errors[t]);
      }
    }
    if (res.ok) {
      for (std::size_t r = 0; r < n_rot; ++r) res.rotations.push_back(std::move(*outcomes[p * n_rot + r]));
    }
    out.pipelines.push_back(std::move(res));
  }
  return out;
}

ComparisonReport compare_series(std::span<const RankedSeries> series, double alpha) {
  ComparisonReport report;
  report.top_n = series.size();
  report.alpha = alpha;
  std::vector<double> p_values;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      const auto test = paired_t_test(series[i].fold_accuracies, series[j].fold_accuracies);
      PairComparison pc;
      pc.model_a = series[i].id;
      pc.model_b = series[j].id;
      pc.rank_a = series[i].rank;
      pc.rank_b = series[j].rank;
      pc.mean_difference = test.mean_difference;
      pc.t = test.t;
      pc.p_value = test.p_value;
      report.pairs.push_back(std::move(pc));
      p_values.push_back(test.p_value);
    }
  }
  const auto bh = benjamini_hochberg(p_values, alpha);
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    report.pairs[i].p_adjusted = bh.adjusted[i];
    report.pairs[i].rejected = bh.rejected[i];
  }
  report.n_rejected = bh.n_rejected;
  return report;
}

ComparisonReport compare_top(const SweepResult& sweep, std::span<const ScoreCard> ranking, std::size_t top_n,
                             double alpha) {
  if (ranking.size() < 2) throw InvalidArgument("compare_top: needs at least two scored pipelines");
  const std::size_t n = std::min(top_n, ranking.size());
  std::vector<RankedSeries> series;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& card = ranking[i];
    if (card.pipeline_index >= sweep.pipelines.size()) throw InvalidArgument("compare_top: ranking does not match sweep");
    series.push_back({card.pipeline_id, card.rank, sweep.pipelines[card.pipeline_index].fold_accuracies()});
  }
  return compare_series(series, alpha);
}

}  // namespace stabsel
