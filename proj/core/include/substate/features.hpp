#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "substate/trace_ingest.hpp"

namespace substate {

inline constexpr std::size_t kFeatureCount = 14;

// The fourteen per-stream features, in their canonical (CSV column) order.
struct FeatureVector {
  double size = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
  double median = 0;
  double std_dev = 0;
  double iqr = 0;
  double skewness = 0;
  double kurtosis = 0;
  double gini = 0;
  double mode = 0;
  double longest_zero_run = 0;
  double increasing = 0;
  double decreasing = 0;

  static constexpr std::array<std::string_view, kFeatureCount> names{
      "size",     "min",  "max",  "mean", "median",           "std_dev",    "iqr",
      "skewness", "kurtosis", "gini", "mode", "longest_zero_run", "increasing", "decreasing"};

  std::array<double, kFeatureCount> as_array() const noexcept;

  bool operator==(const FeatureVector&) const = default;
};

struct Quartiles {
  double q1 = 0;
  double q2 = 0;
  double q3 = 0;
};

// Quartiles of an ascending-sorted sample using the exclusive-halves method:
// q2 is the median, q1/q3 are the medians of the lower/upper halves with the
// middle element left out when the size is odd. A single value is its own
// quartiles. Throws DomainError on an empty sample.
Quartiles quartiles(std::span<const double> sorted);

// (2 * sum(i * x'_i)) / (N * sum(x')) - (N + 1) / N over the ascending sort x'
// with 1-based i. Negative inputs are not rejected. A zero sum yields 0.
double gini(std::span<const double> xs);

// Most frequent value of an ascending-sorted sample; ties go to the smallest.
double mode_of_sorted(std::span<const double> sorted);

// Features that need the retained values: median, sample standard deviation,
// IQR, skewness, kurtosis (excess), Gini and mode. Moments are taken around
// the mean of `values` itself. Constant or single-value samples give 0 for
// std_dev, skewness and kurtosis.
struct OrderFeatures {
  double median = 0;
  double std_dev = 0;
  double iqr = 0;
  double skewness = 0;
  double kurtosis = 0;
  double gini = 0;
  double mode = 0;
};
OrderFeatures order_features(std::span<const double> values);

// Full feature vector for a stream. Size, min, max, mean, zero runs and the
// monotonicity flags come from the running statistics over every point; the
// rest come from the retained head and tail.
// Throws DomainError for an empty stream or one that saw NaN or infinity.
FeatureVector extract_features(const StreamSummary& s);

}  // namespace substate
