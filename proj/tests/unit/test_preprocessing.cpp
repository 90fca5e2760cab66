#include <gtest/gtest.h>

#include <stabsel/errors.hpp>
#include <stabsel/preprocessing.hpp>
#include <stabsel/rng.hpp>

#include "fixtures.hpp"

namespace {

using namespace stabsel;
using stabsel::testing::make_table;

FeatureTable column(std::vector<double> v) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> cohorts;
  Labels labels;
  for (double x : v) {
    rows.push_back({x, 5.0});
    cohorts.emplace_back("A");
    labels.push_back(static_cast<int>(rows.size() % 2));
  }
  return make_table(cohorts, labels, rows);
}

TEST(MinMax, FitOnAllRows) {
  const auto t = column({2, 4, 6});
  const RowIndices all{0, 1, 2};
  const auto m = fit_minmax(t, all);
  EXPECT_EQ(m.min[0], 2.0);
  EXPECT_EQ(m.max[0], 6.0);
  EXPECT_EQ(m.fitted_rows, all);
  const RowIndices one{1};
  EXPECT_DOUBLE_EQ(transform_minmax(m, t, one)(0, 0), 0.5);
}

TEST(MinMax, SubsetRuleAndUnclampedTestValues) {
  const auto t = column({2, 4, 6});
  const RowIndices train{0, 1};
  const auto m = fit_minmax(t, train);
  EXPECT_EQ(m.min[0], 2.0);
  EXPECT_EQ(m.max[0], 4.0);
  const RowIndices test{2};
  EXPECT_DOUBLE_EQ(transform_minmax(m, t, test)(0, 0), 2.0);
}

TEST(MinMax, ZeroRangeMapsToZero) {
  const auto t = column({5, 5, 9});
  const RowIndices train{0, 1};
  const auto m = fit_minmax(t, train);
  EXPECT_EQ(m.min[0], 5.0);
  EXPECT_EQ(m.max[0], 5.0);
  const RowIndices all{0, 1, 2};
  const auto x = transform_minmax(m, t, all);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(x(i, 0), 0.0);
    EXPECT_EQ(x(i, 1), 0.0);  // constant column
  }
}

TEST(MinMax, Errors) {
  const auto t = column({1, 2});
  EXPECT_THROW((void)fit_minmax(t, RowIndices{}), InvalidArgument);
  EXPECT_THROW((void)fit_minmax(t, RowIndices{5}), InvalidArgument);
  const auto m = fit_minmax(t, RowIndices{0, 1});
  auto renamed = t;
  renamed.feature_names[0] = "other";
  EXPECT_THROW((void)transform_minmax(m, renamed, RowIndices{0}), InvalidArgument);
  EXPECT_THROW((void)transform_minmax(m, t, RowIndices{9}), InvalidArgument);
}

class MinMaxProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(MinMaxProperty, TrainingRowsLandInUnitInterval) {
  Rng rng(GetParam());
  const auto t = stabsel::testing::small_synthetic(GetParam(), 2, 30, 6, 2);
  RowIndices train;
  for (std::size_t i = 0; i < t.n_subjects(); ++i) {
    if (rng.bernoulli(0.6)) train.push_back(i);
  }
  if (train.empty()) train.push_back(0);
  const auto m = fit_minmax(t, train);
  const auto x = transform_minmax(m, t, train);
  EXPECT_GE(x.minCoeff(), 0.0);
  EXPECT_LE(x.maxCoeff(), 1.0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    EXPECT_EQ(x.col(j).minCoeff(), 0.0);
    EXPECT_EQ(x.col(j).maxCoeff(), 1.0);
  }
}

TEST_P(MinMaxProperty, NonTrainingRowsNeverAffectTheModel) {
  auto t = stabsel::testing::small_synthetic(GetParam(), 2, 30, 6, 2);
  RowIndices train;
  RowIndices other;
  for (std::size_t i = 0; i < t.n_subjects(); ++i) (i % 3 == 0 ? other : train).push_back(i);
  const auto before = fit_minmax(t, train);
  Rng rng(GetParam() + 1);
  for (auto r : other) t.values.row(static_cast<Eigen::Index>(r)).setConstant(rng.uniform(-1e6, 1e6));
  const auto after = fit_minmax(t, train);
  EXPECT_EQ(before.fingerprint, after.fingerprint);
  EXPECT_EQ(before.min, after.min);
  EXPECT_EQ(before.max, after.max);
  EXPECT_EQ(before.fitted_rows, after.fitted_rows);
}

TEST_P(MinMaxProperty, TrainingRowMutationChangesFingerprint) {
  auto t = stabsel::testing::small_synthetic(GetParam(), 2, 30, 6, 2);
  RowIndices train{0, 3, 5, 8, 13};
  const auto before = fit_minmax(t, train);
  t.values(5, 2) += 1e-9;
  EXPECT_NE(fit_minmax(t, train).fingerprint, before.fingerprint);
  RowIndices other{0, 3, 5, 8, 14};
  t.values(5, 2) -= 1e-9;
  EXPECT_NE(fit_minmax(t, other).fingerprint, before.fingerprint);
}

TEST_P(MinMaxProperty, AffineMapOfTheTableLeavesTransformUnchanged) {
  auto t = stabsel::testing::small_synthetic(GetParam(), 2, 30, 6, 2);
  RowIndices train;
  for (std::size_t i = 0; i < 40; ++i) train.push_back(i);
  RowIndices all;
  for (std::size_t i = 0; i < t.n_subjects(); ++i) all.push_back(i);
  const auto x = transform_minmax(fit_minmax(t, train), t, all);
  Rng rng(GetParam() + 2);
  auto shifted = t;
  shifted.values = (t.values.array() * rng.uniform(0.5, 20.0) + rng.uniform(-10.0, 10.0)).matrix();
  const auto y = transform_minmax(fit_minmax(shifted, train), shifted, all);
  EXPECT_LE((x - y).cwiseAbs().maxCoeff(), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Seeds, MinMaxProperty, ::testing::Values(1, 2, 3, 4, 5, 6, 7, 8));

}  // namespace
