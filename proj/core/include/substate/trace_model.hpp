#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace substate {

enum class CaptureKind : std::uint8_t { entry, def, ret };

std::string_view to_string(CaptureKind kind) noexcept;
std::optional<CaptureKind> parse_capture_kind(std::string_view token) noexcept;

// A program location where values are recorded. Capture points from
// different runs are the same point iff all three attributes match, which
// is why `thread` is a creation-order index rather than an OS thread id.
struct CapturePoint {
  std::string method_sig;
  std::uint64_t offset = 0;
  std::uint64_t thread = 0;

  auto operator<=>(const CapturePoint&) const = default;
};

struct StringMetrics {
  std::uint64_t length = 0;
  std::uint64_t richness = 0;  // distinct characters
  double entropy = 0.0;        // Shannon entropy, bits per character

  bool operator==(const StringMetrics&) const = default;
};

// Length, richness and base-2 character entropy of a UTF-8 string. Characters
// are Unicode code points; a byte that does not start a valid UTF-8 sequence
// counts as one character on its own.
StringMetrics string_metrics(std::string_view s);

using ValuePayload = std::variant<double, std::string, StringMetrics>;

struct TraceEvent {
  CaptureKind kind = CaptureKind::def;
  CapturePoint cp;
  ValuePayload payload;
};

enum class Channel : std::uint8_t { value, str_len, str_rich, str_ent };

std::string_view to_string(Channel channel) noexcept;

// Identity of one numeric value stream.
struct ChannelKey {
  CapturePoint cp;
  CaptureKind kind = CaptureKind::def;
  Channel channel = Channel::value;

  auto operator<=>(const ChannelKey&) const = default;

  // `<method>@<offset>@<thread>/<kind>/<channel>`, with ',', '"', '%' and control
  // characters in the method signature percent-encoded so the id can sit in
  // a CSV header cell.
  std::string id() const;
};

struct ChannelKeyHash {
  std::size_t operator()(const ChannelKey& key) const noexcept;
};

struct ChannelValue {
  ChannelKey key;
  double value = 0.0;
};

// Numeric payloads feed the value channel; strings (raw or pre-measured) fan
// out into the length, richness and entropy channels, in that order.
std::vector<ChannelValue> channel_keys_for(const TraceEvent& event);

enum class Verdict : std::uint8_t { pass, fail };

struct TestLabel {
  std::string test_id;
  Verdict verdict = Verdict::pass;
  std::optional<std::string> defect_id;  // present iff verdict == fail

  // Throws InputError when the defect id does not agree with the verdict.
  static TestLabel make(std::string test_id, Verdict verdict,
                        std::optional<std::string> defect_id);
};

}  // namespace substate
