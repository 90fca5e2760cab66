#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stabsel/classification.hpp"
#include "stabsel/data_model.hpp"
#include "stabsel/metrics.hpp"
#include "stabsel/preprocessing.hpp"
#include "stabsel/reduction.hpp"

namespace stabsel {

/// Stratified assignment of n items to k folds.
struct FoldAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  /// fold_of[i] is the fold of item i (position in the label vector).
  std::vector<std::size_t> fold_of;
  /// class_counts[f][c]: members of class c in fold f.
  std::vector<std::array<std::size_t, 2>> class_counts;

  /// Positions (ascending) in fold f, or outside it.
  std::vector<std::size_t> members(std::size_t f) const;
  std::vector<std::size_t> complement(std::size_t f) const;
};

/// Shuffles each class with its own seeded stream, then deals members round
/// robin, continuing the fold cursor from one class to the next so that fold
/// sizes also differ by at most one. Throws InvalidArgument if k < 2, a class
/// is empty, or both classes have fewer than k members. A minority class
/// smaller than k leaves some folds without it.
FoldAssignment stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

/// A hyperparameter axis for grid search. `target` names the reducer or
/// classifier id the parameter belongs to ("DT", "MI", ...).
struct ParamAxis {
  std::string target;
  std::string name;
  std::vector<double> values;
};
using ParamGrid = std::vector<ParamAxis>;

/// Cartesian product of the axes that apply to `base`, in declaration order
/// (first axis varies slowest). Returns {base} when no axis applies.
std::vector<PipelineSpec> expand_grid(const PipelineSpec& base, const ParamGrid& grid);

struct EvalOptions {
  std::size_t k = 5;
  /// Seeds the fold assignment; shared by every pipeline so folds are paired.
  std::uint64_t fold_seed = 0;
  AveragingMode mode = AveragingMode::Weighted;
  bool grid_search = false;
  std::size_t inner_k = 3;
  ParamGrid grid;
};

/// Min-max -> reducer -> classifier, all fitted on the same training rows.
struct FittedPipeline {
  PipelineSpec spec;
  MinMaxModel minmax;
  ReducerModel reducer;
  ClassifierPtr classifier;

  Vector predict_score(const FeatureTable& table, std::span<const std::size_t> rows) const;
};

FittedPipeline fit_pipeline(const FeatureTable& table, std::span<const std::size_t> train_rows,
                            const PipelineSpec& spec);
MetricVector evaluate_pipeline(const FittedPipeline& fitted, const FeatureTable& table,
                               std::span<const std::size_t> rows, AveragingMode mode);

/// Inner stratified CV over `train_rows` only; returns the candidate with the
/// highest mean inner accuracy (first declared wins ties). Throws
/// InvalidArgument on an empty candidate list.
PipelineSpec grid_search(const FeatureTable& table, std::span<const std::size_t> train_rows,
                         std::span<const PipelineSpec> candidates, std::size_t inner_k, std::uint64_t seed,
                         AveragingMode mode = AveragingMode::Weighted);

struct FoldRecord {
  std::size_t fold = 0;
  RowIndices train_rows;    // table rows, ascending
  RowIndices heldout_rows;  // table rows, ascending
  MetricVector cv;
  MetricVector external;

  PipelineSpec fitted_spec;  // after grid search and seed derivation
  std::uint64_t minmax_fingerprint = 0;
  std::uint64_t reducer_digest = 0;
  std::uint64_t classifier_digest = 0;
  std::vector<std::string> selected_features;  // selectors only
  std::size_t reduced_dim = 0;
  Params classifier_hyperparameters;
  std::vector<std::string> warnings;
};

struct RotationOutcome {
  RotationRecord record;
  RowIndices external_rows;
  std::vector<FoldRecord> folds;
};

/// One rotation of one pipeline: k-fold CV over the rotation's training
/// cohorts, and each fold-model evaluated on the whole external cohort.
/// Errors from any component propagate.
RotationOutcome run_rotation(const FeatureTable& table, const CohortPlan& plan, std::size_t rotation,
                             const PipelineSpec& spec, const EvalOptions& options = {});

struct PipelineResult {
  PipelineSpec spec;
  std::string id;
  bool ok = true;
  std::string error;
  std::vector<RotationOutcome> rotations;

  /// CV accuracy of every fold, rotation-major.
  std::vector<double> fold_accuracies() const;
};

struct SweepResult {
  std::vector<Rotation> rotations;
  std::size_t k = 5;
  std::vector<PipelineResult> pipelines;

  std::size_t n_failed() const;
};

struct SweepOptions : EvalOptions {
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t workers = 1;
};

/// Runs every spec over every rotation. Pipelines that throw are marked
/// failed and the sweep carries on. Output is identical for any worker count.
/// Throws InvalidArgument on an empty spec list or duplicate pipeline ids.
SweepResult run_sweep(const FeatureTable& table, const CohortPlan& plan, std::span<const PipelineSpec> specs,
                      const SweepOptions& options = {});

struct PairComparison {
  std::string model_a;
  std::string model_b;
  std::size_t rank_a = 0;
  std::size_t rank_b = 0;
  double mean_difference = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  bool rejected = false;
};

struct ComparisonReport {
  std::size_t top_n = 0;
  double alpha = 0.05;
  std::vector<PairComparison> pairs;
  std::size_t n_rejected = 0;
};

/// Fold accuracies of one ranked model, for compare_series.
struct RankedSeries {
  std::string id;
  std::size_t rank = 0;
  std::vector<double> fold_accuracies;
};

/// Paired t-tests over every pair of the given series, BH-corrected at alpha.
ComparisonReport compare_series(std::span<const RankedSeries> series, double alpha);

/// compare_series over the top_n entries of `ranking` (as produced by
/// rank_pipelines on the same sweep). Throws InvalidArgument with fewer than
/// two ranked pipelines.
ComparisonReport compare_top(const SweepResult& sweep, std::span<const ScoreCard> ranking, std::size_t top_n = 10,
                             double alpha = 0.05);

}  // namespace stabsel
