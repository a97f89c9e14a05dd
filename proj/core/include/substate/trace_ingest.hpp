#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/circular_buffer.hpp>

#include "substate/trace_model.hpp"

namespace substate {

// How many leading and trailing values each channel keeps for the
// order-statistic features. Values in between still feed the running
// statistics.
struct RetentionConfig {
  std::size_t v_lead = 2000;
  std::size_t v_trail = 2000;

  void validate() const;  // throws InputError unless both are >= 1
};

// Running statistics for one (test, channel) stream plus the retained
// head/tail buffers.
//
// NaN values count toward size and set nan_seen but leave min, max, sum and
// the monotonicity flags untouched. Infinite values set inf_seen and move
// min/max but not sum. Streams carrying either flag are routed to buckets
// instead of being featurized, so these rules only keep the other fields
// finite and well-defined.
class StreamSummary {
 public:
  explicit StreamSummary(RetentionConfig cfg = {});

  void update(double x);

  std::size_t size() const noexcept { return size_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  double sum() const noexcept { return sum_; }
  double mean() const noexcept;
  bool increasing() const noexcept { return increasing_; }
  bool decreasing() const noexcept { return decreasing_; }
  std::size_t longest_zero_run() const noexcept { return longest_zero_run_; }
  std::size_t current_zero_run() const noexcept { return current_zero_run_; }
  bool nan_seen() const noexcept { return nan_seen_; }
  bool inf_seen() const noexcept { return inf_seen_; }
  double last_value() const noexcept { return last_value_; }

  std::span<const double> head() const noexcept { return head_; }
  std::vector<double> tail() const;
  // head followed by tail: the full stream whenever
  // size() <= v_lead + v_trail.
  std::vector<double> retained() const;
  bool truncated() const noexcept { return size_ > head_.capacity() + tail_.capacity(); }

  const RetentionConfig& retention() const noexcept { return cfg_; }

 private:
  RetentionConfig cfg_;
  std::size_t size_ = 0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  bool increasing_ = true;
  bool decreasing_ = true;
  std::size_t longest_zero_run_ = 0;
  std::size_t current_zero_run_ = 0;
  bool nan_seen_ = false;
  bool inf_seen_ = false;
  double last_value_ = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> last_finite_;
  std::vector<double> head_;
  boost::circular_buffer<double> tail_;
};

// All channels one test touched, in order of first touch.
class TestTrace {
 public:
  StreamSummary& touch(const ChannelKey& key, const RetentionConfig& cfg);
  const StreamSummary* find(const ChannelKey& key) const;

  const std::vector<std::pair<ChannelKey, StreamSummary>>& channels() const noexcept {
    return channels_;
  }
  std::size_t channel_count() const noexcept { return channels_.size(); }

  std::size_t event_count = 0;

 private:
  std::vector<std::pair<ChannelKey, StreamSummary>> channels_;
  std::unordered_map<ChannelKey, std::size_t, ChannelKeyHash> index_;
};

// Parses one wire-format record:
//   {"k":"def","m":"<sig>","o":<int>,"t":<int>,"v":<number>}
// with exactly one of "v" (number, or "NaN" / "Infinity" / "-Infinity"),
// "s" (string) or "sm" ([length, richness, entropy]).
TraceEvent parse_event(std::string_view line, std::size_t line_no);

// Serializes an event in the wire format (inverse of parse_event).
std::string format_event(const TraceEvent& event);

// Streams a newline-delimited trace. Blank lines are skipped.
TestTrace ingest_test_trace(std::istream& in, const RetentionConfig& cfg);
TestTrace ingest_trace_file(const std::filesystem::path& file, const RetentionConfig& cfg);

inline constexpr std::string_view kManifestName = "tests.txt";
inline constexpr std::string_view kTraceExtension = ".trace";

// Test ids from `<dir>/tests.txt`, one per line, in suite order.
std::vector<std::string> read_manifest(const std::filesystem::path& trace_dir);

struct SuiteTraces {
  std::vector<std::string> test_ids;
  std::vector<TestTrace> traces;  // parallel to test_ids
};

// Ingests every test listed in the manifest, `jobs` files at a time.
SuiteTraces ingest_suite(const std::filesystem::path& trace_dir, const RetentionConfig& cfg,
                         unsigned jobs = 1);

}  // namespace substate
