#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <stabsel/errors.hpp>
#include <stabsel/metrics.hpp>
#include <stabsel/rng.hpp>

namespace {

using namespace stabsel;

double brute_auc(const Labels& y, const std::vector<double>& s) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

TEST(ComputeMetrics, Accuracy) {
  const Labels t{1, 0, 1, 1};
  const Labels p{1, 0, 0, 1};
  const std::vector<double> s{0.9, 0.1, 0.4, 0.8};
  EXPECT_DOUBLE_EQ(compute_metrics(t, p, s).metrics.accuracy(), 0.75);
}

TEST(RocAuc, OneWinOneLoss) {
  const Labels t{1, 0, 1};
  const std::vector<double> s{0.9, 0.8, 0.3};
  EXPECT_DOUBLE_EQ(*roc_auc(t, s), 0.5);
}

TEST(RocAuc, TiesGetHalfCredit) {
  const Labels t{1, 0};
  const std::vector<double> s{0.5, 0.5};
  EXPECT_DOUBLE_EQ(*roc_auc(t, s), 0.5);
  const Labels t2{1, 1, 0, 0};
  const std::vector<double> s2{0.7, 0.4, 0.4, 0.1};
  EXPECT_DOUBLE_EQ(*roc_auc(t2, s2), (2 + 1 + 0.5) / 4);
}

TEST(RocAuc, SingleClassIsUndefinedAndFlagged) {
  const Labels t{1, 1, 1};
  const std::vector<double> s{0.2, 0.5, 0.9};
  EXPECT_FALSE(roc_auc(t, s).has_value());
  const auto m = compute_metrics(t, Labels{1, 1, 1}, s);
  EXPECT_TRUE(m.auc_undefined);
  EXPECT_EQ(m.metrics.roc_auc(), 0.5);
}

TEST(ComputeMetrics, BinaryZeroOverZeroIsZero) {
  const Labels t{1, 1, 0};
  const Labels p{0, 0, 0};
  const std::vector<double> s{0.1, 0.2, 0.3};
  const auto m = compute_metrics(t, p, s, AveragingMode::Binary);
  EXPECT_EQ(m.metrics.precision(), 0.0);
  EXPECT_EQ(m.metrics.recall(), 0.0);
  EXPECT_EQ(m.metrics.f1(), 0.0);
}

TEST(ComputeMetrics, PerfectPredictionIsAllOnes) {
  const Labels t{1, 0, 1, 0, 0};
  const std::vector<double> s{0.9, 0.2, 0.7, 0.1, 0.3};
  for (auto mode : {AveragingMode::Binary, AveragingMode::Weighted}) {
    const auto m = compute_metrics(t, t, s, mode);
    for (double v : m.metrics.values) EXPECT_EQ(v, 1.0);
  }
}

TEST(ComputeMetrics, Errors) {
  const Labels t{1, 0};
  const std::vector<double> s{0.9};
  EXPECT_THROW((void)compute_metrics(t, t, s), InvalidArgument);
  EXPECT_THROW((void)compute_metrics(Labels{}, Labels{}, std::vector<double>{}), InvalidArgument);
}

TEST(AveragingMode, Parse) {
  EXPECT_EQ(parse_averaging_mode("binary"), AveragingMode::Binary);
  EXPECT_EQ(parse_averaging_mode("weighted"), AveragingMode::Weighted);
  EXPECT_FALSE(parse_averaging_mode("macro").has_value());
  EXPECT_EQ(to_string(AveragingMode::Weighted), "weighted");
}

struct Instance {
  Labels y_true;
  Labels y_pred;
  std::vector<double> score;
};

Instance random_instance(Rng& rng) {
  Instance in;
  const auto n = 2 + rng.below(199);
  const bool coarse = rng.bernoulli(0.5);  // coarse scores produce many ties
  for (std::uint64_t i = 0; i < n; ++i) {
    in.y_true.push_back(rng.bernoulli(0.4) ? 1 : 0);
    in.y_pred.push_back(rng.bernoulli(0.5) ? 1 : 0);
    in.score.push_back(coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform());
  }
  return in;
}

TEST(MetricsProperty, AucMatchesBruteForce) {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto in = random_instance(rng);
    const auto auc = roc_auc(in.y_true, in.score);
    const bool both = std::count(in.y_true.begin(), in.y_true.end(), 1) > 0 &&
                      std::count(in.y_true.begin(), in.y_true.end(), 0) > 0;
    ASSERT_EQ(auc.has_value(), both);
    if (!both) continue;
    EXPECT_NEAR(*auc, brute_auc(in.y_true, in.score), 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 450);
}

TEST(MetricsProperty, AucInvariantUnderMonotoneTransformAndComplement) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto in = random_instance(rng);
    in.y_true[0] = 1;
    in.y_true[1] = 0;
    const double base = *roc_auc(in.y_true, in.score);
    std::vector<double> warped;
    std::vector<double> flipped_score;
    Labels flipped;
    for (std::size_t i = 0; i < in.score.size(); ++i) {
      warped.push_back(std::exp(3.0 * in.score[i]) - 7.0);
      flipped_score.push_back(1.0 - in.score[i]);
      flipped.push_back(1 - in.y_true[i]);
    }
    EXPECT_NEAR(*roc_auc(in.y_true, warped), base, 1e-12);
    EXPECT_NEAR(*roc_auc(flipped, flipped_score), base, 1e-12);
  }
}

TEST(MetricsProperty, ConfusionMatrixFormulas) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto in = random_instance(rng);
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < in.y_true.size(); ++i) {
      const int t = in.y_true[i];
      const int p = in.y_pred[i];
      tp += t == 1 && p == 1;
      fp += t == 0 && p == 1;
      tn += t == 0 && p == 0;
      fn += t == 1 && p == 0;
    }
    auto safe = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
    const double p1 = safe(tp, tp + fp), r1 = safe(tp, tp + fn), f1_1 = safe(2 * p1 * r1, p1 + r1);
    const double p0 = safe(tn, tn + fn), r0 = safe(tn, tn + fp), f1_0 = safe(2 * p0 * r0, p0 + r0);
    const double n = tp + fp + tn + fn;
    const double w1 = (tp + fn) / n, w0 = (tn + fp) / n;

    const auto b = compute_metrics(in.y_true, in.y_pred, in.score, AveragingMode::Binary).metrics;
    EXPECT_DOUBLE_EQ(b.accuracy(), (tp + tn) / n);
    EXPECT_DOUBLE_EQ(b.precision(), p1);
    EXPECT_DOUBLE_EQ(b.recall(), r1);
    EXPECT_DOUBLE_EQ(b.f1(), f1_1);

    const auto w = compute_metrics(in.y_true, in.y_pred, in.score, AveragingMode::Weighted).metrics;
    EXPECT_DOUBLE_EQ(w.precision(), w0 * p0 + w1 * p1);
    EXPECT_DOUBLE_EQ(w.recall(), w0 * r0 + w1 * r1);
    EXPECT_DOUBLE_EQ(w.f1(), w0 * f1_0 + w1 * f1_1);
    EXPECT_NEAR(w.recall(), w.accuracy(), 1e-12);
    EXPECT_GE(w.f1(), std::min(f1_0, f1_1) - 1e-15);
    EXPECT_LE(w.f1(), std::max(f1_0, f1_1) + 1e-15);
  }
}

}  // namespace
