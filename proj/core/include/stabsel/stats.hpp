#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stabsel {

double mean(std::span<const double> x);
/// Divides by n. Zero for n <= 1.
double population_sd(std::span<const double> x);
/// Divides by n - 1. Zero for n <= 1.
double sample_sd(std::span<const double> x);

struct PairedTTest {
  double mean_difference = 0.0;
  double t = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t df = 0;
};

/// Two-sided paired t-test on a - b. A difference vector with zero variance
/// (including identical inputs) yields p = 1 and t = 0. Throws InvalidArgument
/// on length mismatch or fewer than two pairs.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

struct BhResult {
  std::vector<double> adjusted;  // BH-adjusted p-values, input order
  std::vector<bool> rejected;    // input order
  std::size_t n_rejected = 0;
};

/// Benjamini-Hochberg step-up at level alpha: with sorted p(1) <= ... <= p(m),
/// rejects hypotheses 1..i* where i* is the largest i with p(i) <= i*alpha/m.
BhResult benjamini_hochberg(std::span<const double> p_values, double alpha);

}  // namespace stabsel
