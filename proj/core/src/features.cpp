#include "substate/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "substate/errors.hpp"

namespace substate {

std::array<double, kFeatureCount> FeatureVector::as_array() const noexcept {
  return {size,     min,      max,  mean, median,           std_dev,    iqr,
          skewness, kurtosis, gini, mode, longest_zero_run, increasing, decreasing};
}

namespace {

double median_of_sorted(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace

Quartiles quartiles(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  if (n == 0) throw DomainError("quartiles of an empty sample");
  if (n == 1) return {sorted[0], sorted[0], sorted[0]};
  const std::size_t half = n / 2;
  return {median_of_sorted(sorted.first(half)), median_of_sorted(sorted),
          median_of_sorted(sorted.last(half))};
}

double gini(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("gini of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    weighted += static_cast<double>(i + 1) * sorted[i];
  }
  if (total == 0.0) return 0.0;
  const auto n = static_cast<double>(sorted.size());
  return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

double mode_of_sorted(std::span<const double> sorted) {
  if (sorted.empty()) throw DomainError("mode of an empty sample");
  double best = sorted[0];
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    if (j - i > best_count) {
      best_count = j - i;
      best = sorted[i];
    }
    i = j;
  }
  return best;
}

OrderFeatures order_features(std::span<const double> values) {
  if (values.empty()) throw DomainError("order features of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  OrderFeatures f;
  const Quartiles q = quartiles(sorted);
  f.median = q.q2;
  f.iqr = q.q3 - q.q1;
  f.mode = mode_of_sorted(sorted);
  f.gini = gini(sorted);

  const std::size_t n = sorted.size();
  if (n < 2) return f;

  double sum = 0.0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(n);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : values) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double sample_var = m2 / static_cast<double>(n - 1);
  if (!(sample_var > 0.0)) return f;

  f.std_dev = std::sqrt(sample_var);
  // Population third/fourth moments over powers of the sample variance.
  f.skewness = (m3 / static_cast<double>(n)) / std::pow(sample_var, 1.5);
  f.kurtosis = (m4 / static_cast<double>(n)) / (sample_var * sample_var) - 3.0;
  return f;
}

FeatureVector extract_features(const StreamSummary& s) {
  if (s.size() == 0) throw DomainError("cannot featurize an empty stream");
  if (s.nan_seen() || s.inf_seen()) {
    throw DomainError("streams with NaN or infinite values are bucketed, not featurized");
  }
  const std::vector<double> retained = s.retained();
  const OrderFeatures order = order_features(retained);

  FeatureVector f;
  f.size = static_cast<double>(s.size());
  f.min = s.min();
  f.max = s.max();
  f.mean = s.mean();
  f.median = order.median;
  f.std_dev = order.std_dev;
  f.iqr = order.iqr;
  f.skewness = order.skewness;
  f.kurtosis = order.kurtosis;
  f.gini = order.gini;
  f.mode = order.mode;
  f.longest_zero_run = static_cast<double>(s.longest_zero_run());
  f.increasing = s.increasing() ? 1.0 : 0.0;
  f.decreasing = s.decreasing() ? 1.0 : 0.0;
  return f;
}

}  // namespace substate
