#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace stabsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;
using RowIndices = std::vector<std::size_t>;

/// Subjects x features matrix with per-subject ids, cohort and binary label
/// (enhanced = 1, non-enhanced = 0).
///
/// A plain aggregate: it can hold malformed data so that validate_table can
/// report on it. Everything that ingests tables validates them first.
struct FeatureTable {
  std::vector<std::string> subject_ids;
  std::vector<std::string> cohort_ids;
  Labels labels;
  std::vector<std::string> feature_names;
  Matrix values;  // n_subjects x n_features

  std::size_t n_subjects() const noexcept { return subject_ids.size(); }
  std::size_t n_features() const noexcept { return feature_names.size(); }

  /// Distinct cohort names in order of first appearance.
  std::vector<std::string> cohorts() const;
  /// Row indices (ascending) whose cohort is in `names`.
  RowIndices rows_in(std::span<const std::string> names) const;
  RowIndices rows_in(const std::string& name) const;
};

struct Violation {
  std::optional<std::size_t> row;
  std::optional<std::size_t> column;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  /// One violation per line, with row/column context.
  std::string summary() const;
};

/// Checks every FeatureTable invariant. Pure; never throws.
ValidationReport validate_table(const FeatureTable& table);

/// Throws ValidationError carrying the report summary if the table is invalid.
void require_valid(const FeatureTable& table);

struct Rotation {
  std::size_t index = 0;  // 0-based
  std::string test;
  std::vector<std::string> train;
};

/// Ordered cohorts plus the set that may only ever be trained on. Each
/// remaining cohort serves once as the external test set.
class CohortPlan {
 public:
  CohortPlan(std::vector<std::string> cohort_names, std::set<std::string> cv_only);

  /// Uses the table's cohorts in order of first appearance unless `order`
  /// is given, and checks that every planned cohort has subjects.
  static CohortPlan from_table(const FeatureTable& table, std::set<std::string> cv_only,
                               std::vector<std::string> order = {});

  const std::vector<std::string>& cohort_names() const noexcept { return names_; }
  const std::set<std::string>& cv_only() const noexcept { return cv_only_; }
  const std::vector<Rotation>& rotations() const noexcept { return rotations_; }
  std::size_t n_rotations() const noexcept { return rotations_.size(); }
  const Rotation& rotation(std::size_t r) const;

  /// Throws ValidationError unless each planned cohort has at least one subject.
  void check_against(const FeatureTable& table) const;

 private:
  std::vector<std::string> names_;
  std::set<std::string> cv_only_;
  std::vector<Rotation> rotations_;
};

enum class ReducerId { MI, AFT, APT, VT, CC, CST, UFS, ETIm, FIRF, RFE, PCA, TSVD, SRP };
enum class ClassifierId { ETr, RandF, DT, GB, KNN, GNB, LOGIT, NC, DUMMY };

std::string_view to_string(ReducerId id) noexcept;
std::string_view to_string(ClassifierId id) noexcept;
std::optional<ReducerId> parse_reducer(std::string_view name) noexcept;
std::optional<ClassifierId> parse_classifier(std::string_view name) noexcept;
std::span<const ReducerId> all_reducers() noexcept;
std::span<const ClassifierId> all_classifiers() noexcept;
/// The twelve reducers swept by default (UFS is registered but duplicates AFT).
std::span<const ReducerId> default_reducers() noexcept;

using Params = std::map<std::string, double>;

/// One normalization -> reducer -> classifier combination.
struct PipelineSpec {
  ReducerId reducer = ReducerId::MI;
  Params reducer_params;
  ClassifierId classifier = ClassifierId::ETr;
  Params classifier_params;
  std::size_t target_dim = 10;
  std::uint64_t seed = 0;

  /// "MI+ETr", with non-empty params appended as "MI+DT[max_depth=3]".
  std::string id() const;
  double reducer_param(std::string_view key, double fallback) const;
  double classifier_param(std::string_view key, double fallback) const;
};

/// Throws InvalidArgument when target_dim < 1.
void validate_spec(const PipelineSpec& spec);

enum class Metric : std::size_t { Accuracy = 0, F1 = 1, Precision = 2, Recall = 3, RocAuc = 4 };
inline constexpr std::size_t kMetricCount = 5;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics{
    Metric::Accuracy, Metric::F1, Metric::Precision, Metric::Recall, Metric::RocAuc};

/// Column titles used in reports: "Accuracy", "F1 Score", ...
std::string_view metric_name(Metric m) noexcept;
/// Short keys used in JSON: "accuracy", "f1", ...
std::string_view metric_key(Metric m) noexcept;

using MetricArray = std::array<double, kMetricCount>;

struct FoldMetrics {
  MetricArray values{};

  double& operator[](Metric m) noexcept { return values[static_cast<std::size_t>(m)]; }
  double operator[](Metric m) const noexcept { return values[static_cast<std::size_t>(m)]; }
  double accuracy() const noexcept { return (*this)[Metric::Accuracy]; }
  double f1() const noexcept { return (*this)[Metric::F1]; }
  double precision() const noexcept { return (*this)[Metric::Precision]; }
  double recall() const noexcept { return (*this)[Metric::Recall]; }
  double roc_auc() const noexcept { return (*this)[Metric::RocAuc]; }

  friend bool operator==(const FoldMetrics&, const FoldMetrics&) = default;
};

/// Per-rotation summary of one pipeline: mean and population SD over the k
/// folds, for CV and for the k fold-models evaluated on the external cohort.
struct RotationRecord {
  std::size_t rotation = 0;  // 0-based
  std::string test_cohort;
  MetricArray cv_mean{};
  MetricArray cv_sd{};
  MetricArray ext_mean{};
  MetricArray ext_sd{};
};

/// Scoring outcome for one pipeline. Per-rotation arrays are indexed
/// [rotation][metric].
struct ScoreCard {
  std::string pipeline_id;
  std::size_t pipeline_index = 0;  // position in SweepResult::pipelines
  std::vector<MetricArray> norm_mean;
  std::vector<MetricArray> norm_sd;
  std::vector<MetricArray> stability;
  double mean_cv_accuracy = 0.0;
  double final_score = 0.0;
  std::size_t rank = 0;  // 1-based
};

}  // namespace stabsel
