#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "substate/features.hpp"
#include "substate/trace_ingest.hpp"
#include "substate/trace_model.hpp"

namespace substate {

// Either a fixed cluster count (>= 2) or a percentage of the number of tests
// that reached the channel. Written "2" or "0.5%".
class KPolicy {
 public:
  static KPolicy fixed(std::size_t k);
  static KPolicy percent(double p);
  static KPolicy parse(std::string_view spec);  // throws InputError

  bool is_percent() const noexcept { return percent_; }
  std::size_t fixed_k() const noexcept { return k_; }
  double percentage() const noexcept { return p_; }

  std::string spec() const;                              // "2", "0.5%"
  std::string label() const { return "k@" + spec(); }    // "k@2", "k@0.5%"

  bool operator==(const KPolicy&) const = default;

 private:
  KPolicy() = default;
  bool percent_ = false;
  std::size_t k_ = 2;
  double p_ = 0.0;
};

// Number of clusters for n tests: fixed -> min(k, n); percent ->
// min(n, max(2, round_half_up(p * n / 100))).
std::size_t choose_k(std::size_t n, const KPolicy& policy);

struct KMeansResult {
  std::vector<std::size_t> assignment;  // cluster index per input vector, in [0, clusters)
  std::size_t clusters = 0;
};

// Lloyd's k-means on z-scored features (zero-variance dimensions dropped).
// Ten k-means++ initializations are drawn in sequence from `seed` and the run
// with the lowest within-cluster sum of squares is kept (earliest on ties).
// Exact duplicates are collapsed to weighted points first, so identical inputs
// always share a cluster.
// Empty clusters are dropped rather than reseeded; cluster indices are
// numbered by first appearance in the input order.
KMeansResult kmeans(std::span<const FeatureVector> vectors, std::size_t k, std::uint64_t seed);

// What one test left on one channel.
struct ChannelObservation {
  std::size_t test = 0;  // index into the suite
  std::optional<FeatureVector> features;  // empty when flagged
  bool nan = false;
  bool inf = false;
};

struct ChannelClusters {
  ChannelKey channel;
  std::vector<std::vector<std::size_t>> clusters;  // each sorted; ordered by smallest member
  std::vector<std::size_t> nan_bucket;
  std::vector<std::size_t> inf_bucket;
};

// NaN-flagged tests go to the NaN bucket, remaining infinity-flagged tests to
// the infinity bucket, everything else through kmeans with
// k = choose_k(|rest|, policy). The k-means seed is derived from `seed` and
// the channel id; inputs are presented in canonical order (feature vector,
// then test index) so the result does not depend on enumeration order.
ChannelClusters cluster_channel(const ChannelKey& channel,
                                std::span<const ChannelObservation> observations,
                                const KPolicy& policy, std::uint64_t seed);

// Per-channel observations for a whole suite. Channels are listed in order of
// first appearance (suite order, then event order within each trace).
struct ChannelTable {
  std::vector<std::string> test_ids;
  std::vector<ChannelKey> channels;
  std::vector<std::vector<ChannelObservation>> observations;  // parallel to channels
};

ChannelTable build_channel_table(const SuiteTraces& suite, unsigned jobs = 1);

std::vector<ChannelClusters> cluster_table(const ChannelTable& table, const KPolicy& policy,
                                           std::uint64_t seed, unsigned jobs = 1);

}  // namespace substate
