#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They deliberately avoid the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "substate/profiles.hpp"

namespace substate::oracle {

// Mean absolute difference over all ordered pairs divided by twice the mean.
inline double gini_pairwise(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  long double sum = 0.0L;
  for (double x : xs) sum += x;
  if (sum == 0.0L) return 0.0;
  long double diff = 0.0L;
  for (double a : xs) {
    for (double b : xs) diff += std::abs(static_cast<long double>(a) - b);
  }
  return static_cast<double>(diff / (2.0L * n * sum));
}

struct Simple {
  double size = 0, min = 0, max = 0, mean = 0;
  double longest_zero_run = 0, increasing = 0, decreasing = 0;
};

// Direct pass over the whole stream (finite values only).
inline Simple simple_features(const std::vector<double>& xs) {
  Simple s;
  s.size = static_cast<double>(xs.size());
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  long double sum = 0;
  for (double x : xs) sum += x;
  s.mean = static_cast<double>(sum / xs.size());
  std::size_t run = 0, best = 0;
  for (double x : xs) {
    run = (x == 0.0) ? run + 1 : 0;
    best = std::max(best, run);
  }
  s.longest_zero_run = static_cast<double>(best);
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] < xs[i - 1]) inc = false;
    if (xs[i] > xs[i - 1]) dec = false;
  }
  s.increasing = inc ? 1.0 : 0.0;
  s.decreasing = dec ? 1.0 : 0.0;
  return s;
}

// Smallest number of rows whose union covers every coverable column, by
// enumerating subsets in order of size.
inline std::size_t optimal_cover_size(const ProfileMatrix& m) {
  const std::size_t n = m.test_count();
  const std::size_t e = m.element_count();
  std::vector<std::uint64_t> row_mask(n, 0);
  std::uint64_t coverable = 0;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < e; ++j) {
      if (m.bit(t, j)) row_mask[t] |= std::uint64_t{1} << j;
    }
    coverable |= row_mask[t];
  }
  std::size_t best = n;
  for (std::uint32_t subset = 0; subset < (1u << n); ++subset) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(subset));
    if (size >= best) continue;
    std::uint64_t cov = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (subset & (1u << t)) cov |= row_mask[t];
    }
    if (cov == coverable) best = size;
  }
  return best;
}

inline double harmonic(std::size_t d) {
  double h = 0.0;
  for (std::size_t i = 1; i <= d; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

// Random 0/1 matrix with up to `max_tests` rows and up to 40 columns.
// All-zero and all-one columns are allowed; callers pick how to load it.
inline ProfileMatrix random_matrix(std::mt19937_64& rng, std::size_t max_tests) {
  std::uniform_int_distribution<std::size_t> tests_dist(1, max_tests);
  std::uniform_int_distribution<std::size_t> elems_dist(1, 40);
  std::uniform_real_distribution<double> density_dist(0.05, 0.6);
  const std::size_t n = tests_dist(rng);
  const std::size_t e = elems_dist(rng);
  const double density = density_dist(rng);
  std::bernoulli_distribution bit(density);
  std::vector<std::string> tests, elems;
  for (std::size_t t = 0; t < n; ++t) tests.push_back("t" + std::to_string(t));
  for (std::size_t j = 0; j < e; ++j) elems.push_back("e" + std::to_string(j));
  std::vector<Bits> rows(n, Bits(e));
  for (auto& row : rows) {
    for (std::size_t j = 0; j < e; ++j) row[j] = bit(rng);
  }
  return ProfileMatrix(tests, elems, rows);
}

}  // namespace substate::oracle
