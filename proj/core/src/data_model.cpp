#include "stabsel/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "stabsel/errors.hpp"

namespace stabsel {

std::vector<std::string> FeatureTable::cohorts() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& c : cohort_ids) {
    if (seen.insert(c).second) out.push_back(c);
  }
  return out;
}

RowIndices FeatureTable::rows_in(std::span<const std::string> names) const {
  const std::unordered_set<std::string> wanted(names.begin(), names.end());
  RowIndices rows;
  for (std::size_t i = 0; i < cohort_ids.size(); ++i) {
    if (wanted.contains(cohort_ids[i])) rows.push_back(i);
  }
  return rows;
}

RowIndices FeatureTable::rows_in(const std::string& name) const {
  return rows_in(std::span<const std::string>(&name, 1));
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    if (v.row) os << "row " << *v.row << ": ";
    if (v.column) os << "column " << *v.column << ": ";
    os << v.message << '\n';
  }
  return os.str();
}

ValidationReport validate_table(const FeatureTable& table) {
  ValidationReport report;
  auto add = [&](std::optional<std::size_t> row, std::optional<std::size_t> col, std::string msg) {
    report.violations.push_back({row, col, std::move(msg)});
  };

  const std::size_t n = table.subject_ids.size();
  const std::size_t p = table.feature_names.size();
  if (n == 0) add(std::nullopt, std::nullopt, "table has no subjects");
  if (table.cohort_ids.size() != n) {
    add(std::nullopt, std::nullopt,
        fmt::format("cohort_ids has {} entries, expected {}", table.cohort_ids.size(), n));
  }
  if (table.labels.size() != n) {
    add(std::nullopt, std::nullopt,
        fmt::format("labels has {} entries, expected {}", table.labels.size(), n));
  }
  if (static_cast<std::size_t>(table.values.rows()) != n ||
      static_cast<std::size_t>(table.values.cols()) != p) {
    add(std::nullopt, std::nullopt,
        fmt::format("values is {}x{}, expected {}x{}", table.values.rows(), table.values.cols(), n, p));
  }

  std::unordered_map<std::string, std::size_t> first_seen;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = first_seen.emplace(table.subject_ids[i], i);
    if (!inserted) {
      add(i, std::nullopt,
          fmt::format("duplicate subject_id '{}' (first at row {})", table.subject_ids[i], it->second));
    }
  }
  std::unordered_map<std::string, std::size_t> feature_seen;
  for (std::size_t j = 0; j < p; ++j) {
    auto [it, inserted] = feature_seen.emplace(table.feature_names[j], j);
    if (!inserted) {
      add(std::nullopt, j,
          fmt::format("duplicate feature name '{}' (first at column {})", table.feature_names[j],
                      it->second));
    }
  }
  for (std::size_t i = 0; i < std::min(n, table.labels.size()); ++i) {
    if (table.labels[i] != 0 && table.labels[i] != 1) {
      add(i, std::nullopt, fmt::format("label not in {{0,1}} (got {})", table.labels[i]));
    }
  }
  for (std::size_t i = 0; i < std::min(n, table.cohort_ids.size()); ++i) {
    if (table.cohort_ids[i].empty()) add(i, std::nullopt, "empty cohort id");
  }
  const auto rows = std::min<std::size_t>(n, static_cast<std::size_t>(table.values.rows()));
  const auto cols = std::min<std::size_t>(p, static_cast<std::size_t>(table.values.cols()));
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double v = table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!std::isfinite(v)) add(i, j, "non-finite feature value");
    }
  }
  return report;
}

void require_valid(const FeatureTable& table) {
  const auto report = validate_table(table);
  if (!report.ok()) throw ValidationError("invalid feature table:\n" + report.summary());
}

CohortPlan::CohortPlan(std::vector<std::string> cohort_names, std::set<std::string> cv_only)
    : names_(std::move(cohort_names)), cv_only_(std::move(cv_only)) {
  std::set<std::string> unique(names_.begin(), names_.end());
  if (unique.size() != names_.size()) throw ValidationError("cohort plan lists a cohort twice");
  for (const auto& c : cv_only_) {
    if (!unique.contains(c)) throw ValidationError("cv-only cohort '" + c + "' is not in the plan");
  }
  for (const auto& test : names_) {
    if (cv_only_.contains(test)) continue;
    Rotation rot;
    rot.index = rotations_.size();
    rot.test = test;
    for (const auto& other : names_) {
      if (other != test) rot.train.push_back(other);
    }
    rotations_.push_back(std::move(rot));
  }
  if (rotations_.empty()) {
    throw ValidationError("cohort plan has no external test cohort (every cohort is cv-only)");
  }
  if (names_.size() < 2) throw ValidationError("cohort plan needs at least two cohorts");
}

CohortPlan CohortPlan::from_table(const FeatureTable& table, std::set<std::string> cv_only,
                                  std::vector<std::string> order) {
  CohortPlan plan(order.empty() ? table.cohorts() : std::move(order), std::move(cv_only));
  plan.check_against(table);
  return plan;
}

const Rotation& CohortPlan::rotation(std::size_t r) const {
  if (r >= rotations_.size()) {
    throw InvalidArgument(fmt::format("rotation index {} out of range (plan has {})", r, rotations_.size()));
  }
  return rotations_[r];
}

void CohortPlan::check_against(const FeatureTable& table) const {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& c : table.cohort_ids) ++counts[c];
  for (const auto& name : names_) {
    if (counts[name] == 0) throw ValidationError("cohort '" + name + "' has no subjects in the table");
  }
}

namespace {

constexpr std::array<ReducerId, 13> kReducers{
    ReducerId::MI,  ReducerId::AFT,  ReducerId::APT, ReducerId::VT,  ReducerId::CC,
    ReducerId::CST, ReducerId::UFS,  ReducerId::ETIm, ReducerId::FIRF, ReducerId::RFE,
    ReducerId::PCA, ReducerId::TSVD, ReducerId::SRP};
constexpr std::array<ReducerId, 12> kDefaultReducers{
    ReducerId::MI,   ReducerId::AFT,  ReducerId::APT, ReducerId::VT,  ReducerId::CC,   ReducerId::CST,
    ReducerId::ETIm, ReducerId::FIRF, ReducerId::RFE, ReducerId::PCA, ReducerId::TSVD, ReducerId::SRP};
constexpr std::array<ClassifierId, 9> kClassifiers{
    ClassifierId::ETr, ClassifierId::RandF, ClassifierId::DT,  ClassifierId::GB,   ClassifierId::KNN,
    ClassifierId::GNB, ClassifierId::LOGIT, ClassifierId::NC, ClassifierId::DUMMY};

std::string format_params(const Params& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ',';
    out += fmt::format("{}={:g}", k, v);
  }
  return out;
}

}  // namespace

std::string_view to_string(ReducerId id) noexcept {
  switch (id) {
    case ReducerId::MI: return "MI";
    case ReducerId::AFT: return "AFT";
    case ReducerId::APT: return "APT";
    case ReducerId::VT: return "VT";
    case ReducerId::CC: return "CC";
    case ReducerId::CST: return "CST";
    case ReducerId::UFS: return "UFS";
    case ReducerId::ETIm: return "ETIm";
    case ReducerId::FIRF: return "FIRF";
    case ReducerId::RFE: return "RFE";
    case ReducerId::PCA: return "PCA";
    case ReducerId::TSVD: return "TSVD";
    case ReducerId::SRP: return "SRP";
  }
  return "?";
}

std::string_view to_string(ClassifierId id) noexcept {
  switch (id) {
    case ClassifierId::ETr: return "ETr";
    case ClassifierId::RandF: return "RandF";
    case ClassifierId::DT: return "DT";
    case ClassifierId::GB: return "GB";
    case ClassifierId::KNN: return "KNN";
    case ClassifierId::GNB: return "GNB";
    case ClassifierId::LOGIT: return "LOGIT";
    case ClassifierId::NC: return "NC";
    case ClassifierId::DUMMY: return "DUMMY";
  }
  return "?";
}

std::optional<ReducerId> parse_reducer(std::string_view name) noexcept {
  for (auto id : kReducers) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

std::optional<ClassifierId> parse_classifier(std::string_view name) noexcept {
  for (auto id : kClassifiers) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

std::span<const ReducerId> all_reducers() noexcept { return kReducers; }
std::span<const ReducerId> default_reducers() noexcept { return kDefaultReducers; }
std::span<const ClassifierId> all_classifiers() noexcept { return kClassifiers; }

std::string PipelineSpec::id() const {
  std::string out(to_string(reducer));
  if (!reducer_params.empty()) out += "[" + format_params(reducer_params) + "]";
  out += "+";
  out += to_string(classifier);
  if (!classifier_params.empty()) out += "[" + format_params(classifier_params) + "]";
  return out;
}

double PipelineSpec::reducer_param(std::string_view key, double fallback) const {
  const auto it = reducer_params.find(std::string(key));
  return it == reducer_params.end() ? fallback : it->second;
}

double PipelineSpec::classifier_param(std::string_view key, double fallback) const {
  const auto it = classifier_params.find(std::string(key));
  return it == classifier_params.end() ? fallback : it->second;
}

void validate_spec(const PipelineSpec& spec) {
  if (spec.target_dim < 1) throw InvalidArgument("target_dim must be >= 1");
}

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::Accuracy: return "Accuracy";
    case Metric::F1: return "F1 Score";
    case Metric::Precision: return "Precision";
    case Metric::Recall: return "Recall";
    case Metric::RocAuc: return "ROC-AUC";
  }
  return "?";
}

std::string_view metric_key(Metric m) noexcept {
  switch (m) {
    case Metric::Accuracy: return "accuracy";
    case Metric::F1: return "f1";
    case Metric::Precision: return "precision";
    case Metric::Recall: return "recall";
    case Metric::RocAuc: return "roc_auc";
  }
  return "?";
}

}  // namespace stabsel
