#include "stabsel/scoring.hpp"

#include <algorithm>
#include <numeric>

#include "stabsel/errors.hpp"
#include "stabsel/harness.hpp"

namespace stabsel {

ScoreMatrix normalize_scores(std::span<const ScoreInput> inputs) {
  if (inputs.empty()) throw InvalidArgument("normalize_scores: no scored pipelines");
  const std::size_t R = inputs.front().cv_mean.size();
  if (R == 0) throw InvalidArgument("normalize_scores: no rotations");
  for (const auto& in : inputs) {
    if (in.cv_mean.size() != R || in.cv_sd.size() != R) {
      throw InvalidArgument("normalize_scores: pipeline '" + in.id + "' has a different rotation count");
    }
  }

  ScoreMatrix m;
  m.n_rotations = R;
  for (const auto& in : inputs) {
    m.ids.push_back(in.id);
    m.pipeline_indices.push_back(in.pipeline_index);
    m.mean.push_back(in.cv_mean);
    m.sd.push_back(in.cv_sd);
  }
  m.norm_mean = m.mean;
  m.norm_sd = m.sd;

  auto normalize_cell = [&](std::vector<std::vector<MetricArray>>& dst, const std::vector<std::vector<MetricArray>>& src,
                            std::size_t r, std::size_t i, double flat) {
    double lo = src[0][r][i];
    double hi = lo;
    for (const auto& p : src) {
      lo = std::min(lo, p[r][i]);
      hi = std::max(hi, p[r][i]);
    }
    const double range = hi - lo;
    for (std::size_t p = 0; p < src.size(); ++p) {
      dst[p][r][i] = range > 0.0 ? (src[p][r][i] - lo) / range : flat;
    }
  };
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      normalize_cell(m.norm_mean, m.mean, r, i, 1.0);
      normalize_cell(m.norm_sd, m.sd, r, i, 0.0);
    }
  }
  return m;
}

ScoreMatrix normalize_scores(const SweepResult& sweep) {
  std::vector<ScoreInput> inputs;
  for (std::size_t p = 0; p < sweep.pipelines.size(); ++p) {
    const auto& res = sweep.pipelines[p];
    if (!res.ok) continue;
    ScoreInput in;
    in.id = res.id;
    in.pipeline_index = p;
    for (const auto& rot : res.rotations) {
      in.cv_mean.push_back(rot.record.cv_mean);
      in.cv_sd.push_back(rot.record.cv_sd);
    }
    inputs.push_back(std::move(in));
  }
  return normalize_scores(inputs);
}

double final_score(const ScoreMatrix& matrix, std::size_t pipeline) {
  if (pipeline >= matrix.n_pipelines()) throw InvalidArgument("final_score: pipeline index out of range");
  double total = 0.0;
  for (std::size_t r = 0; r < matrix.n_rotations; ++r) {
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      total += matrix.norm_mean[pipeline][r][i] + (1.0 - matrix.norm_sd[pipeline][r][i]);
    }
  }
  return total / static_cast<double>(2 * kMetricCount * matrix.n_rotations);
}

std::vector<ScoreCard> rank_pipelines(const ScoreMatrix& matrix) {
  std::vector<ScoreCard> cards;
  cards.reserve(matrix.n_pipelines());
  const auto acc = static_cast<std::size_t>(Metric::Accuracy);
  for (std::size_t p = 0; p < matrix.n_pipelines(); ++p) {
    ScoreCard c;
    c.pipeline_id = matrix.ids[p];
    c.pipeline_index = matrix.pipeline_indices[p];
    c.norm_mean = matrix.norm_mean[p];
    c.norm_sd = matrix.norm_sd[p];
    for (const auto& row : matrix.norm_sd[p]) {
      MetricArray s{};
      for (std::size_t i = 0; i < kMetricCount; ++i) s[i] = 1.0 - row[i];
      c.stability.push_back(s);
    }
    double acc_total = 0.0;
    for (const auto& row : matrix.mean[p]) acc_total += row[acc];
    c.mean_cv_accuracy = acc_total / static_cast<double>(matrix.n_rotations);
    c.final_score = final_score(matrix, p);
    cards.push_back(std::move(c));
  }
  std::sort(cards.begin(), cards.end(), [](const ScoreCard& a, const ScoreCard& b) {
    if (a.final_score != b.final_score) return a.final_score > b.final_score;
    if (a.mean_cv_accuracy != b.mean_cv_accuracy) return a.mean_cv_accuracy > b.mean_cv_accuracy;
    return a.pipeline_id < b.pipeline_id;
  });
  for (std::size_t i = 0; i < cards.size(); ++i) cards[i].rank = i + 1;
  return cards;
}

}  // namespace stabsel
