#include "stabsel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "stabsel/errors.hpp"

namespace stabsel {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

namespace {
double sum_sq_dev(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s;
}

bool all_equal(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}
}  // namespace

double population_sd(std::span<const double> x) {
  if (x.size() <= 1 || all_equal(x)) return 0.0;
  return std::sqrt(sum_sq_dev(x) / static_cast<double>(x.size()));
}

double sample_sd(std::span<const double> x) {
  if (x.size() <= 1 || all_equal(x)) return 0.0;
  return std::sqrt(sum_sq_dev(x) / static_cast<double>(x.size() - 1));
}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("paired_t_test: samples differ in length");
  if (a.size() < 2) throw InvalidArgument("paired_t_test: needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];

  PairedTTest out;
  out.df = d.size() - 1;
  out.mean_difference = mean(d);
  const double sd = sample_sd(d);
  const double se = sd / std::sqrt(static_cast<double>(d.size()));
  // Differences that are constant up to rounding carry no variance.
  double scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  if (!(sd > 1e-12 * scale) || !std::isfinite(se)) {
    out.t = 0.0;
    out.p_value = 1.0;
    return out;
  }
  out.t = out.mean_difference / se;
  const boost::math::students_t_distribution<double> dist(static_cast<double>(out.df));
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t))));
  return out;
}

BhResult benjamini_hochberg(std::span<const double> p_values, double alpha) {
  const std::size_t m = p_values.size();
  BhResult out;
  out.adjusted.assign(m, 1.0);
  out.rejected.assign(m, false);
  if (m == 0) return out;

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::size_t cutoff = 0;  // number rejected
  for (std::size_t i = 0; i < m; ++i) {
    if (p_values[order[i]] <= static_cast<double>(i + 1) * alpha / static_cast<double>(m)) cutoff = i + 1;
  }
  double running = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    running = std::min(running, p_values[order[i]] * static_cast<double>(m) / static_cast<double>(i + 1));
    out.adjusted[order[i]] = std::min(1.0, running);
  }
  for (std::size_t i = 0; i < cutoff; ++i) out.rejected[order[i]] = true;
  out.n_rejected = cutoff;
  return out;
}

}  // namespace stabsel
