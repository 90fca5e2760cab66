#pragma once

#include <string>
#include <vector>

#include <stabsel/data_model.hpp>
#include <stabsel/ingestion.hpp>

namespace stabsel::testing {

// Rows are {cohort, label, features...}; subject ids are s0, s1, ...
inline FeatureTable make_table(const std::vector<std::string>& cohorts, const Labels& labels,
                               const std::vector<std::vector<double>>& rows) {
  FeatureTable t;
  const std::size_t p = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < p; ++j) t.feature_names.push_back("f" + std::to_string(j));
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.subject_ids.push_back("s" + std::to_string(i));
    t.cohort_ids.push_back(cohorts[i]);
    t.labels.push_back(labels[i]);
    for (std::size_t j = 0; j < p; ++j) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return t;
}

inline FeatureTable small_synthetic(std::uint64_t seed = 3, std::size_t cohorts = 3, std::size_t per_cohort = 40,
                                    std::size_t features = 8, std::size_t informative = 4) {
  SyntheticConfig cfg;
  cfg.n_cohorts = cohorts;
  cfg.subjects_per_cohort = per_cohort;
  cfg.n_features = features;
  cfg.n_informative = informative;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

inline Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace stabsel::testing
