#include <algorithm>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include <stabsel/errors.hpp>
#include <stabsel/harness.hpp>
#include <stabsel/rng.hpp>

#include "fixtures.hpp"

namespace {

using namespace stabsel;
using stabsel::testing::make_table;

PipelineSpec make_spec(ReducerId r, ClassifierId c, std::size_t k = 10, std::uint64_t seed = 1) {
  PipelineSpec s;
  s.reducer = r;
  s.classifier = c;
  s.target_dim = k;
  s.seed = seed;
  return s;
}

PipelineSpec fast(ReducerId r, ClassifierId c) {
  auto s = make_spec(r, c, 4);
  if (c == ClassifierId::ETr || c == ClassifierId::RandF || c == ClassifierId::GB) s.classifier_params["n_trees"] = 10;
  return s;
}

TEST(StratifiedFolds, TenSubjectsFiveFolds) {
  const Labels y{1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  const auto f = stratified_folds(y, 5, 3);
  std::vector<int> size(5, 0);
  for (auto v : f.fold_of) ++size[v];
  for (int s : size) EXPECT_EQ(s, 2);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_GE(f.class_counts[k][1], 1U);
    EXPECT_LE(f.class_counts[k][1], 2U);
  }
}

TEST(StratifiedFolds, Rejections) {
  const Labels y{1, 1, 1, 0, 0, 0};
  EXPECT_THROW((void)stratified_folds(y, 1, 0), InvalidArgument);
  try {
    (void)stratified_folds(Labels{1, 1, 0}, 3, 0);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("class 0"), std::string::npos) << e.what();
  }
  try {
    (void)stratified_folds(Labels{1, 1, 1, 1, 1, 1}, 3, 0);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("class 0 has no members"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW((void)stratified_folds(Labels{1, 1, 1, 1, 0, 0}, 3, 0));
}

TEST(StratifiedFolds, DeterministicAndSeedSensitive) {
  Labels y;
  for (int i = 0; i < 40; ++i) y.push_back(i % 3 == 0);
  EXPECT_EQ(stratified_folds(y, 5, 9).fold_of, stratified_folds(y, 5, 9).fold_of);
  EXPECT_NE(stratified_folds(y, 5, 9).fold_of, stratified_folds(y, 5, 10).fold_of);
}

class FoldProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(FoldProperty, BalancedPerClassAndOverall) {
  Rng rng(GetParam());
  const std::size_t k = 2 + rng.below(6);
  const std::size_t n = k * 2 + rng.below(150);
  Labels y(n);
  for (auto& v : y) v = rng.bernoulli(0.35);
  y[0] = 0;
  y[1] = 1;
  const auto f = stratified_folds(y, k, GetParam());
  ASSERT_EQ(f.fold_of.size(), n);
  std::vector<std::size_t> size(k, 0);
  for (auto v : f.fold_of) {
    ASSERT_LT(v, k);
    ++size[v];
  }
  EXPECT_LE(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()), 1U);
  for (int c = 0; c < 2; ++c) {
    std::size_t lo = n, hi = 0;
    for (std::size_t j = 0; j < k; ++j) {
      lo = std::min(lo, f.class_counts[j][c]);
      hi = std::max(hi, f.class_counts[j][c]);
    }
    EXPECT_LE(hi - lo, 1U);
  }
  std::size_t covered = 0;
  for (std::size_t j = 0; j < k; ++j) covered += f.members(j).size();
  EXPECT_EQ(covered, n);
}

INSTANTIATE_TEST_SUITE_P(Seeds, FoldProperty, ::testing::Range<std::uint64_t>(1, 41));

TEST(RunRotation, SeparableDataGivesPerfectCv) {
  SyntheticConfig cfg;
  cfg.n_cohorts = 3;
  cfg.subjects_per_cohort = 40;
  cfg.n_features = 6;
  cfg.n_informative = 3;
  cfg.cohort_shift = 0.0;
  cfg.noise_sd = 0.01;
  const auto t = generate_synthetic(cfg);
  const auto plan = CohortPlan::from_table(t, {});
  const auto out = run_rotation(t, plan, 0, make_spec(ReducerId::AFT, ClassifierId::DT, 3));
  EXPECT_EQ(out.record.cv_mean[0], 1.0);
  EXPECT_EQ(out.record.cv_sd[0], 0.0);
  EXPECT_EQ(out.folds.size(), 5U);
}

TEST(RunRotation, DummyOnMostlyNegativeExternalCohort) {
  std::vector<std::string> cohorts;
  Labels y;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 20; ++i) {  // training cohort: 14 negatives, 6 positives
    cohorts.emplace_back("T");
    y.push_back(i < 6);
    rows.push_back({static_cast<double>(i), static_cast<double>(i % 5)});
  }
  for (int i = 0; i < 10; ++i) {  // external: 80 % negative
    cohorts.emplace_back("E");
    y.push_back(i < 2);
    rows.push_back({static_cast<double>(i) * 0.5, 1.0});
  }
  const auto t = make_table(cohorts, y, rows);
  const CohortPlan plan({"E", "T"}, {"T"});
  const auto out = run_rotation(t, plan, 0, make_spec(ReducerId::VT, ClassifierId::DUMMY, 2));
  EXPECT_DOUBLE_EQ(out.record.ext_mean[0], 0.8);
  EXPECT_EQ(out.record.ext_sd[0], 0.0);
  EXPECT_EQ(out.record.ext_mean[4], 0.5);  // constant scores tie every pair
}

TEST(RunRotation, FoldsPartitionThePoolAndExternalIsTheTestCohort) {
  const auto t = stabsel::testing::small_synthetic(4, 4, 30, 6, 3);
  const CohortPlan plan({"A", "B", "C", "D"}, {"D"});
  for (std::size_t r = 0; r < plan.n_rotations(); ++r) {
    const auto out = run_rotation(t, plan, r, fast(ReducerId::MI, ClassifierId::NC));
    const auto& rot = plan.rotation(r);
    EXPECT_EQ(out.external_rows, t.rows_in(rot.test));
    std::set<std::size_t> heldout_union;
    for (const auto& f : out.folds) {
      std::vector<std::size_t> both;
      std::set_intersection(f.train_rows.begin(), f.train_rows.end(), f.heldout_rows.begin(), f.heldout_rows.end(),
                            std::back_inserter(both));
      EXPECT_TRUE(both.empty());
      EXPECT_EQ(f.train_rows.size() + f.heldout_rows.size(), 90U);
      heldout_union.insert(f.heldout_rows.begin(), f.heldout_rows.end());
      for (auto row : f.train_rows) EXPECT_NE(t.cohort_ids[row], rot.test);
      EXPECT_FALSE(f.selected_features.empty());
    }
    EXPECT_EQ(heldout_union.size(), 90U);
    for (auto row : t.rows_in("D")) EXPECT_TRUE(heldout_union.contains(row));
  }
}

TEST(RunRotation, HeldOutAndExternalMutationsLeaveModelsIdentical) {
  auto t = stabsel::testing::small_synthetic(5, 3, 30, 6, 3);
  const auto plan = CohortPlan::from_table(t, {});
  const auto spec = fast(ReducerId::ETIm, ClassifierId::ETr);
  const auto base = run_rotation(t, plan, 1, spec);
  auto mutated = t;
  for (auto row : base.external_rows) mutated.values.row(static_cast<Eigen::Index>(row)).array() += 3.0;
  for (auto row : base.folds[2].heldout_rows) mutated.values.row(static_cast<Eigen::Index>(row)).array() *= -1.0;
  const auto again = run_rotation(mutated, plan, 1, spec);
  const auto& a = base.folds[2];
  const auto& b = again.folds[2];
  EXPECT_EQ(a.minmax_fingerprint, b.minmax_fingerprint);
  EXPECT_EQ(a.reducer_digest, b.reducer_digest);
  EXPECT_EQ(a.classifier_digest, b.classifier_digest);
}

TEST(RunRotation, InputRowOrderDoesNotMatter) {
  const auto t = stabsel::testing::small_synthetic(6, 3, 30, 6, 3);
  FeatureTable rev = t;
  const auto n = t.n_subjects();
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = n - 1 - i;
    rev.subject_ids[i] = t.subject_ids[j];
    rev.cohort_ids[i] = t.cohort_ids[j];
    rev.labels[i] = t.labels[j];
    rev.values.row(static_cast<Eigen::Index>(i)) = t.values.row(static_cast<Eigen::Index>(j));
  }
  const auto plan = CohortPlan::from_table(t, {});
  const auto a = run_rotation(t, plan, 0, fast(ReducerId::FIRF, ClassifierId::RandF));
  const auto b = run_rotation(rev, plan, 0, fast(ReducerId::FIRF, ClassifierId::RandF));
  EXPECT_EQ(a.record.cv_mean, b.record.cv_mean);
  EXPECT_EQ(a.record.ext_mean, b.record.ext_mean);
  for (std::size_t f = 0; f < a.folds.size(); ++f) EXPECT_EQ(a.folds[f].classifier_digest, b.folds[f].classifier_digest);
}

TEST(RunSweep, WorkerCountDoesNotChangeResults) {
  const auto t = stabsel::testing::small_synthetic(7, 3, 30, 6, 3);
  const auto plan = CohortPlan::from_table(t, {});
  std::vector<PipelineSpec> specs;
  for (auto r : {ReducerId::MI, ReducerId::PCA, ReducerId::SRP}) {
    for (auto c : {ClassifierId::ETr, ClassifierId::KNN, ClassifierId::GB}) specs.push_back(fast(r, c));
  }
  SweepOptions one;
  one.workers = 1;
  SweepOptions many = one;
  many.workers = 4;
  const auto a = run_sweep(t, plan, specs, one);
  const auto b = run_sweep(t, plan, specs, many);
  ASSERT_EQ(a.pipelines.size(), 9U);
  for (std::size_t p = 0; p < a.pipelines.size(); ++p) {
    ASSERT_EQ(a.pipelines[p].rotations.size(), 3U);
    for (std::size_t r = 0; r < 3; ++r) {
      const auto& x = a.pipelines[p].rotations[r];
      const auto& y = b.pipelines[p].rotations[r];
      EXPECT_EQ(x.record.cv_mean, y.record.cv_mean);
      EXPECT_EQ(x.record.cv_sd, y.record.cv_sd);
      EXPECT_EQ(x.record.ext_mean, y.record.ext_mean);
      for (std::size_t f = 0; f < x.folds.size(); ++f) {
        EXPECT_EQ(x.folds[f].cv.metrics, y.folds[f].cv.metrics);
        EXPECT_EQ(x.folds[f].classifier_digest, y.folds[f].classifier_digest);
      }
    }
  }
}

TEST(RunSweep, FailingSpecIsQuarantined) {
  const auto t = stabsel::testing::small_synthetic(8, 3, 30, 6, 3);
  const auto plan = CohortPlan::from_table(t, {});
  auto bad = fast(ReducerId::MI, ClassifierId::NC);
  bad.target_dim = 0;
  const std::vector<PipelineSpec> specs{fast(ReducerId::AFT, ClassifierId::NC), bad, fast(ReducerId::VT, ClassifierId::GNB)};
  const auto sweep = run_sweep(t, plan, specs);
  EXPECT_EQ(sweep.n_failed(), 1U);
  EXPECT_FALSE(sweep.pipelines[1].ok);
  EXPECT_NE(sweep.pipelines[1].error.find("target_dim"), std::string::npos);
  EXPECT_TRUE(sweep.pipelines[0].ok);
  EXPECT_TRUE(sweep.pipelines[2].ok);
  EXPECT_EQ(sweep.pipelines[2].rotations.size(), 3U);
}

TEST(RunSweep, RejectsEmptyAndDuplicateSpecs) {
  const auto t = stabsel::testing::small_synthetic(8, 2, 20, 4, 2);
  const auto plan = CohortPlan::from_table(t, {});
  EXPECT_THROW((void)run_sweep(t, plan, std::vector<PipelineSpec>{}), InvalidArgument);
  const std::vector<PipelineSpec> dup{fast(ReducerId::MI, ClassifierId::NC), fast(ReducerId::MI, ClassifierId::NC)};
  EXPECT_THROW((void)run_sweep(t, plan, dup), InvalidArgument);
}

TEST(ExpandGrid, DeclarationOrderFirstAxisSlowest) {
  const auto base = make_spec(ReducerId::MI, ClassifierId::DT);
  const ParamGrid grid{{"DT", "max_depth", {1, 3}}, {"KNN", "k", {3}}, {"MI", "max_bins", {5, 10}}};
  const auto c = expand_grid(base, grid);
  ASSERT_EQ(c.size(), 4U);
  EXPECT_EQ(c[0].classifier_params.at("max_depth"), 1);
  EXPECT_EQ(c[0].reducer_params.at("max_bins"), 5);
  EXPECT_EQ(c[1].reducer_params.at("max_bins"), 10);
  EXPECT_EQ(c[2].classifier_params.at("max_depth"), 3);
  EXPECT_EQ(expand_grid(make_spec(ReducerId::VT, ClassifierId::NC), grid).size(), 1U);
}

FeatureTable xor_table() {
  std::vector<std::string> cohorts;
  Labels y;
  std::vector<std::vector<double>> rows;
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    const int a = i % 2;
    const int b = (i / 2) % 2;
    cohorts.emplace_back("A");
    y.push_back(a ^ b);
    rows.push_back({a + rng.uniform(-0.1, 0.1), b + rng.uniform(-0.1, 0.1)});
  }
  return make_table(cohorts, y, rows);
}

TEST(GridSearch, SinglePointIsReturned) {
  const auto t = xor_table();
  RowIndices rows(t.n_subjects());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const std::vector<PipelineSpec> one{make_spec(ReducerId::VT, ClassifierId::DT, 2)};
  EXPECT_EQ(grid_search(t, rows, one, 3, 1).id(), one[0].id());
  EXPECT_THROW((void)grid_search(t, rows, std::vector<PipelineSpec>{}, 3, 1), InvalidArgument);
}

TEST(GridSearch, DeepTreeBeatsStumpOnXor) {
  const auto t = xor_table();
  RowIndices rows(t.n_subjects());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto base = make_spec(ReducerId::VT, ClassifierId::DT, 2);
  const auto candidates = expand_grid(base, {{"DT", "max_depth", {1, 0}}});
  const auto best = grid_search(t, rows, candidates, 3, 1);
  EXPECT_EQ(best.classifier_params.at("max_depth"), 0);
}

TEST(GridSearch, TiesGoToFirstDeclared) {
  const auto t = xor_table();
  RowIndices rows(t.n_subjects());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto base = make_spec(ReducerId::VT, ClassifierId::DUMMY, 2);
  const auto candidates = expand_grid(base, {{"DUMMY", "unused", {7, 3}}});
  EXPECT_EQ(grid_search(t, rows, candidates, 3, 1).classifier_params.at("unused"), 7);
}

TEST(GridSearch, RunRotationRecordsChosenParams) {
  const auto t = stabsel::testing::small_synthetic(9, 3, 30, 6, 3);
  const auto plan = CohortPlan::from_table(t, {});
  EvalOptions o;
  o.grid_search = true;
  o.grid = {{"KNN", "k", {1, 7}}};
  const auto out = run_rotation(t, plan, 0, make_spec(ReducerId::AFT, ClassifierId::KNN, 3), o);
  for (const auto& f : out.folds) {
    const double k = f.fitted_spec.classifier_params.at("k");
    EXPECT_TRUE(k == 1 || k == 7);
    EXPECT_EQ(f.classifier_hyperparameters.at("k"), k);
  }
}

TEST(CompareSeries, IdenticalSeriesGivePOne) {
  const std::vector<double> acc{0.9, 0.8, 0.85, 0.9, 0.95, 0.7};
  const std::vector<RankedSeries> s{{"a", 1, acc}, {"b", 2, acc}, {"c", 3, acc}};
  const auto r = compare_series(s, 0.05);
  ASSERT_EQ(r.pairs.size(), 3U);
  for (const auto& p : r.pairs) {
    EXPECT_EQ(p.p_value, 1.0);
    EXPECT_FALSE(p.rejected);
  }
  EXPECT_EQ(r.n_rejected, 0U);
}

TEST(CompareTop, UsesRankOrderAndPooledFolds) {
  const auto t = stabsel::testing::small_synthetic(10, 3, 30, 6, 3);
  const auto plan = CohortPlan::from_table(t, {});
  const std::vector<PipelineSpec> specs{fast(ReducerId::AFT, ClassifierId::NC), fast(ReducerId::VT, ClassifierId::DUMMY),
                                        fast(ReducerId::MI, ClassifierId::GNB)};
  const auto sweep = run_sweep(t, plan, specs);
  EXPECT_EQ(sweep.pipelines[0].fold_accuracies().size(), 15U);
  std::vector<ScoreCard> ranking(3);
  for (std::size_t i = 0; i < 3; ++i) {
    ranking[i].pipeline_id = sweep.pipelines[2 - i].id;
    ranking[i].pipeline_index = 2 - i;
    ranking[i].rank = i + 1;
  }
  const auto r = compare_top(sweep, ranking, 2, 0.05);
  ASSERT_EQ(r.pairs.size(), 1U);
  EXPECT_EQ(r.pairs[0].model_a, sweep.pipelines[2].id);
  EXPECT_EQ(r.pairs[0].model_b, sweep.pipelines[1].id);
  EXPECT_EQ(compare_top(sweep, ranking, 10, 0.05).pairs.size(), 3U);
  EXPECT_THROW((void)compare_top(sweep, std::span<const ScoreCard>(ranking.data(), 1), 10, 0.05), InvalidArgument);
}

}  // namespace
