#include "substate/trace_ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "substate/errors.hpp"
#include "substate/parallel.hpp"

namespace substate {

namespace fs = std::filesystem;
using nlohmann::json;

void RetentionConfig::validate() const {
  if (v_lead < 1) throw InputError("v_lead must be >= 1");
  if (v_trail < 1) throw InputError("v_trail must be >= 1");
}

StreamSummary::StreamSummary(RetentionConfig cfg) : cfg_(cfg), tail_(cfg.v_trail) {
  cfg_.validate();
  head_.reserve(std::min<std::size_t>(cfg_.v_lead, 64));
}

double StreamSummary::mean() const noexcept {
  return size_ == 0 ? 0.0 : sum_ / static_cast<double>(size_);
}

void StreamSummary::update(double x) {
  ++size_;
  last_value_ = x;

  if (head_.size() < cfg_.v_lead) {
    head_.push_back(x);
  } else {
    tail_.push_back(x);
  }

  if (x == 0.0) {
    longest_zero_run_ = std::max(longest_zero_run_, ++current_zero_run_);
  } else {
    current_zero_run_ = 0;
  }

  if (std::isnan(x)) {
    nan_seen_ = true;
    return;
  }
  min_ = std::min(min_, x);
  max_ = std::max(max_, x);
  if (std::isinf(x)) {
    inf_seen_ = true;
    return;
  }
  sum_ += x;
  if (last_finite_) {
    if (x < *last_finite_) increasing_ = false;
    if (x > *last_finite_) decreasing_ = false;
  }
  last_finite_ = x;
}

std::vector<double> StreamSummary::tail() const { return {tail_.begin(), tail_.end()}; }

std::vector<double> StreamSummary::retained() const {
  std::vector<double> out;
  out.reserve(head_.size() + tail_.size());
  out.insert(out.end(), head_.begin(), head_.end());
  out.insert(out.end(), tail_.begin(), tail_.end());
  return out;
}

StreamSummary& TestTrace::touch(const ChannelKey& key, const RetentionConfig& cfg) {
  auto [it, inserted] = index_.try_emplace(key, channels_.size());
  if (inserted) channels_.emplace_back(key, StreamSummary(cfg));
  return channels_[it->second].second;
}

const StreamSummary* TestTrace::find(const ChannelKey& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &channels_[it->second].second;
}

namespace {

std::uint64_t non_negative_int(const json& j, const char* field, std::size_t line_no) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
  throw TraceParseError(line_no, fmt::format("field \"{}\" must be a non-negative integer", field));
}

double numeric_value(const json& v, std::size_t line_no) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& token = v.get_ref<const std::string&>();
    if (token == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (token == "Infinity") return std::numeric_limits<double>::infinity();
    if (token == "-Infinity") return -std::numeric_limits<double>::infinity();
    throw TraceParseError(line_no, "unknown numeric token \"" + token + "\"");
  }
  throw TraceParseError(line_no, "field \"v\" must be a number or a non-finite token");
}

StringMetrics carried_metrics(const json& sm, std::size_t line_no) {
  if (!sm.is_array() || sm.size() != 3 || !sm[0].is_number() || !sm[1].is_number() ||
      !sm[2].is_number()) {
    throw TraceParseError(line_no, "field \"sm\" must be [length, richness, entropy]");
  }
  const double len = sm[0].get<double>();
  const double rich = sm[1].get<double>();
  const double ent = sm[2].get<double>();
  auto is_count = [](double d) { return d >= 0.0 && std::floor(d) == d && std::isfinite(d); };
  if (!is_count(len) || !is_count(rich) || rich > len || !(ent >= 0.0) || !std::isfinite(ent)) {
    throw TraceParseError(line_no,
                          "string metrics need 0 <= richness <= length (integers) and entropy >= 0");
  }
  return StringMetrics{static_cast<std::uint64_t>(len), static_cast<std::uint64_t>(rich), ent};
}

}  // namespace

TraceEvent parse_event(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw TraceParseError(line_no, std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) throw TraceParseError(line_no, "record must be a JSON object");

  static const std::set<std::string> known = {"k", "m", "o", "t", "v", "s", "sm"};
  for (const auto& [field, _] : j.items()) {
    if (!known.count(field)) throw TraceParseError(line_no, "unknown field \"" + field + "\"");
  }
  for (const char* required : {"k", "m", "o", "t"}) {
    if (!j.contains(required)) {
      throw TraceParseError(line_no, fmt::format("missing field \"{}\"", required));
    }
  }

  TraceEvent ev;
  if (!j["k"].is_string()) throw TraceParseError(line_no, "field \"k\" must be a string");
  const auto& kind_token = j["k"].get_ref<const std::string&>();
  auto kind = parse_capture_kind(kind_token);
  if (!kind) throw TraceParseError(line_no, "unknown kind \"" + kind_token + "\"");
  ev.kind = *kind;

  if (!j["m"].is_string() || j["m"].get_ref<const std::string&>().empty()) {
    throw TraceParseError(line_no, "field \"m\" must be a non-empty method signature");
  }
  ev.cp.method_sig = j["m"].get<std::string>();
  ev.cp.offset = non_negative_int(j["o"], "o", line_no);
  ev.cp.thread = non_negative_int(j["t"], "t", line_no);

  const int payloads = j.contains("v") + j.contains("s") + j.contains("sm");
  if (payloads != 1) {
    throw TraceParseError(line_no, "exactly one of \"v\", \"s\", \"sm\" is required");
  }
  if (j.contains("v")) {
    ev.payload = numeric_value(j["v"], line_no);
  } else if (j.contains("s")) {
    if (!j["s"].is_string()) throw TraceParseError(line_no, "field \"s\" must be a string");
    ev.payload = j["s"].get<std::string>();
  } else {
    ev.payload = carried_metrics(j["sm"], line_no);
  }
  return ev;
}

std::string format_event(const TraceEvent& event) {
  // Hand-ordered so records match the documented field order byte for byte.
  std::string out = fmt::format(R"({{"k":"{}","m":{},"o":{},"t":{},)", to_string(event.kind),
                                json(event.cp.method_sig).dump(), event.cp.offset,
                                event.cp.thread);
  if (const auto* v = std::get_if<double>(&event.payload)) {
    if (std::isnan(*v)) {
      out += R"("v":"NaN")";
    } else if (std::isinf(*v)) {
      out += *v > 0 ? R"("v":"Infinity")" : R"("v":"-Infinity")";
    } else {
      out += "\"v\":" + json(*v).dump();
    }
  } else if (const auto* s = std::get_if<std::string>(&event.payload)) {
    out += "\"s\":" + json(*s).dump();
  } else {
    const auto& m = std::get<StringMetrics>(event.payload);
    out += fmt::format(R"("sm":[{},{},{}])", m.length, m.richness, json(m.entropy).dump());
  }
  out += '}';
  return out;
}

TestTrace ingest_test_trace(std::istream& in, const RetentionConfig& cfg) {
  cfg.validate();
  TestTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const TraceEvent ev = parse_event(line, line_no);
    ++trace.event_count;
    for (const auto& cv : channel_keys_for(ev)) trace.touch(cv.key, cfg).update(cv.value);
  }
  if (in.bad()) throw InputError("read error after line " + std::to_string(line_no));
  return trace;
}

TestTrace ingest_trace_file(const fs::path& file, const RetentionConfig& cfg) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open trace file " + file.string());
  try {
    return ingest_test_trace(in, cfg);
  } catch (const TraceParseError& e) {
    throw TraceParseError(file.string(), e.line(), e.detail());
  }
}

std::vector<std::string> read_manifest(const fs::path& trace_dir) {
  const fs::path manifest = trace_dir / kManifestName;
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open manifest " + manifest.string());
  std::vector<std::string> ids;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    std::string id = line.substr(first, last - first + 1);
    if (!seen.insert(id).second) {
      throw InputError(fmt::format("{}:{}: duplicate test id '{}'", manifest.string(), line_no, id));
    }
    ids.push_back(std::move(id));
  }
  return ids;
}

SuiteTraces ingest_suite(const fs::path& trace_dir, const RetentionConfig& cfg, unsigned jobs) {
  cfg.validate();
  SuiteTraces suite;
  suite.test_ids = read_manifest(trace_dir);
  suite.traces.resize(suite.test_ids.size());
  parallel_for(suite.test_ids.size(), jobs, [&](std::size_t i) {
    const fs::path file = trace_dir / (suite.test_ids[i] + std::string(kTraceExtension));
    suite.traces[i] = ingest_trace_file(file, cfg);
  });
  return suite;
}

}  // namespace substate
