#include "substate/trace_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "substate/errors.hpp"
#include "substate/rng.hpp"

namespace substate {

std::string_view to_string(CaptureKind kind) noexcept {
  switch (kind) {
    case CaptureKind::entry: return "entry";
    case CaptureKind::def: return "def";
    case CaptureKind::ret: return "ret";
  }
  return "?";
}

std::optional<CaptureKind> parse_capture_kind(std::string_view token) noexcept {
  if (token == "entry") return CaptureKind::entry;
  if (token == "def") return CaptureKind::def;
  if (token == "ret") return CaptureKind::ret;
  return std::nullopt;
}

std::string_view to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::value: return "value";
    case Channel::str_len: return "str_len";
    case Channel::str_rich: return "str_rich";
    case Channel::str_ent: return "str_ent";
  }
  return "?";
}

namespace {

// Decodes the next code point starting at s[i]; malformed sequences yield the
// single byte with the high bit marker so they never collide with a valid
// code point.
std::uint32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead >> 5) == 0x6) {
    len = 2;
    cp = lead & 0x1f;
  } else if ((lead >> 4) == 0xe) {
    len = 3;
    cp = lead & 0x0f;
  } else if ((lead >> 3) == 0x1e) {
    len = 4;
    cp = lead & 0x07;
  }
  if (len == 0 || i + len > s.size()) {
    ++i;
    return 0x80000000u | lead;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(s[i + k]);
    if ((cont >> 6) != 0x2) {
      ++i;
      return 0x80000000u | lead;
    }
    cp = (cp << 6) | (cont & 0x3f);
  }
  i += len;
  return cp;
}

}  // namespace

StringMetrics string_metrics(std::string_view s) {
  std::unordered_map<std::uint32_t, std::uint64_t> counts;
  std::uint64_t length = 0;
  for (std::size_t i = 0; i < s.size();) {
    ++counts[next_code_point(s, i)];
    ++length;
  }
  StringMetrics m;
  m.length = length;
  m.richness = counts.size();
  if (length == 0) return m;

  // Sum in a fixed order so the result does not depend on hash iteration.
  std::vector<std::uint64_t> freq;
  freq.reserve(counts.size());
  for (const auto& [cp, c] : counts) freq.push_back(c);
  std::sort(freq.begin(), freq.end());
  double h = 0.0;
  const auto n = static_cast<double>(length);
  for (auto c : freq) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  m.entropy = h > 0.0 ? h : 0.0;
  return m;
}

std::string ChannelKey::id() const {
  std::string method;
  method.reserve(cp.method_sig.size());
  for (char c : cp.method_sig) {
    const auto u = static_cast<unsigned char>(c);
    if (c == ',' || c == '%' || c == '"' || u < 0x20 || u == 0x7f) {
      method += fmt::format("%{:02X}", u);
    } else {
      method += c;
    }
  }
  return fmt::format("{}@{}@{}/{}/{}", method, cp.offset, cp.thread, to_string(kind),
                     to_string(channel));
}

std::size_t ChannelKeyHash::operator()(const ChannelKey& key) const noexcept {
  std::uint64_t h = fnv1a64(key.cp.method_sig);
  h = mix_seed(h, key.cp.offset);
  h = mix_seed(h, key.cp.thread);
  h = mix_seed(h, (static_cast<std::uint64_t>(key.kind) << 8) |
                      static_cast<std::uint64_t>(key.channel));
  return static_cast<std::size_t>(h);
}

std::vector<ChannelValue> channel_keys_for(const TraceEvent& event) {
  auto key = [&](Channel ch) { return ChannelKey{event.cp, event.kind, ch}; };
  auto fan_out = [&](const StringMetrics& m) {
    return std::vector<ChannelValue>{
        {key(Channel::str_len), static_cast<double>(m.length)},
        {key(Channel::str_rich), static_cast<double>(m.richness)},
        {key(Channel::str_ent), m.entropy},
    };
  };
  if (const auto* number = std::get_if<double>(&event.payload)) {
    return {{key(Channel::value), *number}};
  }
  if (const auto* text = std::get_if<std::string>(&event.payload)) {
    return fan_out(string_metrics(*text));
  }
  return fan_out(std::get<StringMetrics>(event.payload));
}

TestLabel TestLabel::make(std::string test_id, Verdict verdict,
                          std::optional<std::string> defect_id) {
  if (test_id.empty()) throw InputError("empty test id in label");
  if (defect_id && defect_id->empty()) defect_id.reset();
  if (verdict == Verdict::fail && !defect_id) {
    throw InputError("failing test '" + test_id + "' has no defect id");
  }
  if (verdict == Verdict::pass && defect_id) {
    throw InputError("passing test '" + test_id + "' carries defect id '" + *defect_id + "'");
  }
  return TestLabel{std::move(test_id), verdict, std::move(defect_id)};
}

}  // namespace substate
