#pragma once

#include <span>
#include <string>
#include <vector>

#include "stabsel/data_model.hpp"

namespace stabsel {

struct SweepResult;

/// CV means and SDs of one pipeline, indexed [rotation][metric].
struct ScoreInput {
  std::string id;
  std::size_t pipeline_index = 0;
  std::vector<MetricArray> cv_mean;
  std::vector<MetricArray> cv_sd;
};

/// Raw and normalized CV statistics for every scored pipeline. All per-pipeline
/// tables are indexed [pipeline][rotation][metric].
struct ScoreMatrix {
  std::size_t n_rotations = 0;
  std::vector<std::string> ids;
  std::vector<std::size_t> pipeline_indices;
  std::vector<std::vector<MetricArray>> mean;
  std::vector<std::vector<MetricArray>> sd;
  std::vector<std::vector<MetricArray>> norm_mean;
  std::vector<std::vector<MetricArray>> norm_sd;

  std::size_t n_pipelines() const noexcept { return ids.size(); }
  double stability(std::size_t p, std::size_t r, Metric m) const {
    return 1.0 - norm_sd[p][r][static_cast<std::size_t>(m)];
  }
};

/// Min-max normalizes each (rotation, metric) cell across pipelines. A cell
/// with zero range gives every pipeline norm_mean 1 and norm_sd 0. Throws
/// InvalidArgument on empty input or ragged rotation counts.
ScoreMatrix normalize_scores(std::span<const ScoreInput> inputs);
/// Same, over the successful pipelines of a sweep (external metrics unused).
ScoreMatrix normalize_scores(const SweepResult& sweep);

/// Mean of the 2 * 5 * R terms norm_mean and 1 - norm_sd.
double final_score(const ScoreMatrix& matrix, std::size_t pipeline);

/// Descending final score; ties go to the higher mean CV accuracy, then the
/// lexicographically smaller id. Ranks are 1-based.
std::vector<ScoreCard> rank_pipelines(const ScoreMatrix& matrix);

}  // namespace stabsel
