#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "substate/errors.hpp"
#include "substate/trace_ingest.hpp"

namespace substate {
namespace {

namespace fs = std::filesystem;

const fs::path kFixture = SUBSTATE_FIXTURE_DIR;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(StreamSummary, FirstValue) {
  StreamSummary s;
  s.update(5.0);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.min(), 5.0);
  EXPECT_EQ(s.max(), 5.0);
  EXPECT_EQ(s.sum(), 5.0);
  EXPECT_TRUE(s.increasing());
  EXPECT_TRUE(s.decreasing());
}

TEST(StreamSummary, DecreasingStream) {
  StreamSummary s;
  for (double x : {32.0, 8.0, 4.0, 2.0, 1.0}) s.update(x);
  EXPECT_FALSE(s.increasing());
  EXPECT_TRUE(s.decreasing());
  EXPECT_EQ(s.longest_zero_run(), 0u);
  EXPECT_DOUBLE_EQ(s.mean(), 9.4);
}

TEST(StreamSummary, ZeroRunsIncludeNegativeZero) {
  StreamSummary s;
  for (double x : {0.0, -0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0}) s.update(x);
  EXPECT_EQ(s.longest_zero_run(), 3u);
  EXPECT_EQ(s.current_zero_run(), 1u);
}

TEST(StreamSummary, NaNFlagsButDoesNotPoison) {
  StreamSummary s;
  for (double x : {1.0, kNaN, 3.0}) s.update(x);
  EXPECT_TRUE(s.nan_seen());
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.min(), 1.0);
  EXPECT_EQ(s.max(), 3.0);
  EXPECT_EQ(s.sum(), 4.0);
  EXPECT_TRUE(s.increasing());
}

TEST(StreamSummary, InfinityMovesExtremesOnly) {
  StreamSummary s;
  for (double x : {1.0, -kInf, 3.0}) s.update(x);
  EXPECT_TRUE(s.inf_seen());
  EXPECT_FALSE(s.nan_seen());
  EXPECT_EQ(s.min(), -kInf);
  EXPECT_EQ(s.sum(), 4.0);
}

TEST(StreamSummary, RetentionKeepsHeadAndTail) {
  StreamSummary s;
  std::vector<double> xs;
  for (int i = 0; i < 5000; ++i) {
    xs.push_back(i);
    s.update(i);
  }
  EXPECT_EQ(s.size(), 5000u);
  EXPECT_TRUE(s.truncated());
  ASSERT_EQ(s.head().size(), 2000u);
  EXPECT_EQ(s.head().front(), 0.0);
  EXPECT_EQ(s.head().back(), 1999.0);
  const auto tail = s.tail();
  ASSERT_EQ(tail.size(), 2000u);
  EXPECT_EQ(tail.front(), 3000.0);
  EXPECT_EQ(tail.back(), 4999.0);
  EXPECT_DOUBLE_EQ(s.mean(), 2499.5);  // over all 5000, not the retained 4000
}

TEST(StreamSummary, LosslessBelowThreshold) {
  StreamSummary s(RetentionConfig{3, 2});
  std::vector<double> xs = {4, 1, 5, 9, 2};
  for (double x : xs) s.update(x);
  EXPECT_FALSE(s.truncated());
  EXPECT_EQ(s.retained(), xs);
  s.update(6);
  EXPECT_TRUE(s.truncated());
  EXPECT_EQ(s.retained(), (std::vector<double>{4, 1, 5, 2, 6}));
}

TEST(StreamSummary, MatchesBruteForceOnRandomStreams) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3000)(rng);
    std::uniform_int_distribution<int> v(-2, 2);
    std::vector<double> xs(n);
    for (auto& x : xs) x = v(rng);
    StreamSummary s(RetentionConfig{100, 100});
    for (double x : xs) s.update(x);
    const auto want = oracle::simple_features(xs);
    ASSERT_EQ(static_cast<double>(s.size()), want.size);
    ASSERT_EQ(s.min(), want.min);
    ASSERT_EQ(s.max(), want.max);
    ASSERT_NEAR(s.mean(), want.mean, 1e-12);
    ASSERT_EQ(static_cast<double>(s.longest_zero_run()), want.longest_zero_run);
    ASSERT_EQ(s.increasing() ? 1.0 : 0.0, want.increasing);
    ASSERT_EQ(s.decreasing() ? 1.0 : 0.0, want.decreasing);
  }
}

TEST(RetentionConfig, RejectsZero) {
  EXPECT_THROW((RetentionConfig{0, 5}.validate()), InputError);
  EXPECT_THROW((RetentionConfig{5, 0}.validate()), InputError);
  EXPECT_NO_THROW((RetentionConfig{1, 1}.validate()));
}

TEST(ParseEvent, NumericRecord) {
  const auto e = parse_event(R"({"k":"def","m":"A.f()V","o":6,"t":0,"v":32})", 1);
  EXPECT_EQ(e.kind, CaptureKind::def);
  EXPECT_EQ(e.cp.method_sig, "A.f()V");
  EXPECT_EQ(e.cp.offset, 6u);
  EXPECT_EQ(std::get<double>(e.payload), 32.0);
}

TEST(ParseEvent, NonFiniteTokens) {
  EXPECT_TRUE(std::isnan(
      std::get<double>(parse_event(R"({"k":"ret","m":"m","o":0,"t":0,"v":"NaN"})", 1).payload)));
  EXPECT_EQ(
      std::get<double>(parse_event(R"({"k":"ret","m":"m","o":0,"t":0,"v":"-Infinity"})", 1).payload),
      -kInf);
}

TEST(ParseEvent, StringAndMetrics) {
  const auto s = parse_event(R"({"k":"entry","m":"m","o":0,"t":2,"s":"0101"})", 1);
  EXPECT_EQ(std::get<std::string>(s.payload), "0101");
  EXPECT_EQ(s.cp.thread, 2u);
  const auto sm = parse_event(R"({"k":"entry","m":"m","o":0,"t":0,"sm":[5000,3,1.5]})", 1);
  EXPECT_EQ(std::get<StringMetrics>(sm.payload), (StringMetrics{5000, 3, 1.5}));
}

TEST(ParseEvent, Rejections) {
  const char* bad[] = {
      R"({"k":"exit","m":"m","o":0,"t":0,"v":1})",           // unknown kind
      R"({"k":"def","m":"m","o":0,"t":0})",                  // no payload
      R"({"k":"def","m":"m","o":0,"t":0,"v":1,"s":"x"})",    // two payloads
      R"({"k":"def","m":"m","o":-1,"t":0,"v":1})",           // negative offset
      R"({"k":"def","m":"m","t":0,"v":1})",                  // missing offset
      R"({"k":"def","m":"m","o":0,"t":0,"v":"nan"})",        // wrong token spelling
      R"({"k":"def","m":"m","o":0,"t":0,"v":1,"x":2})",      // unknown field
      R"({"k":"def","m":"","o":0,"t":0,"v":1})",             // empty method
      R"({"k":"def","m":"m","o":0,"t":0,"sm":[1,2]})",       // short metrics
      R"(not json)",
  };
  for (const char* line : bad) {
    EXPECT_THROW(parse_event(line, 7), TraceParseError) << line;
  }
}

TEST(ParseEvent, ErrorNamesLine) {
  try {
    parse_event("{", 42);
    FAIL();
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.line(), 42u);
    EXPECT_NE(std::string(e.what()).find("line 42"), std::string::npos);
  }
}

TEST(FormatEvent, RoundTrips) {
  const std::vector<TraceEvent> events = {
      {CaptureKind::def, {"A.b(I)V", 3, 1}, -128.0},
      {CaptureKind::ret, {"A.b(I)V", 8, 0}, 0.1},
      {CaptureKind::ret, {"A.b(I)V", 8, 0}, kInf},
      {CaptureKind::entry, {"A.c(Ljava/lang/String;)V", 0, 0}, std::string("a\"b\n")},
      {CaptureKind::entry, {"m", 0, 0}, StringMetrics{10, 4, 1.75}},
  };
  for (const auto& e : events) {
    const std::string line = format_event(e);
    const auto back = parse_event(line, 1);
    EXPECT_EQ(back.kind, e.kind);
    EXPECT_EQ(back.cp, e.cp);
    EXPECT_EQ(back.payload, e.payload) << line;
    EXPECT_EQ(format_event(back), line);
  }
  EXPECT_EQ(format_event({CaptureKind::def, {"m", 1, 0}, kNaN}),
            R"({"k":"def","m":"m","o":1,"t":0,"v":"NaN"})");
}

TEST(IngestTestTrace, EmptyTraceHasNoChannels) {
  std::istringstream in("");
  const auto t = ingest_test_trace(in, {});
  EXPECT_EQ(t.channel_count(), 0u);
  EXPECT_EQ(t.event_count, 0u);
}

TEST(IngestTestTrace, SkipsBlankLinesAndCarriageReturns) {
  std::istringstream in(
      "{\"k\":\"def\",\"m\":\"m\",\"o\":1,\"t\":0,\"v\":1}\r\n\n"
      "{\"k\":\"def\",\"m\":\"m\",\"o\":1,\"t\":0,\"v\":2}\r\n");
  const auto t = ingest_test_trace(in, {});
  EXPECT_EQ(t.event_count, 2u);
  ASSERT_EQ(t.channel_count(), 1u);
  EXPECT_EQ(t.channels()[0].second.size(), 2u);
}

TEST(IngestTestTrace, BadLineReportsLineNumber) {
  std::istringstream in(
      "{\"k\":\"def\",\"m\":\"m\",\"o\":1,\"t\":0,\"v\":1}\n"
      "\n"
      "{\"k\":\"zzz\",\"m\":\"m\",\"o\":1,\"t\":0,\"v\":1}\n");
  try {
    ingest_test_trace(in, {});
    FAIL();
  } catch (const TraceParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(IngestFixture, IncrementChannelOfFirstTest) {
  const auto trace = ingest_trace_file(kFixture / "t1.trace", {});
  std::set<CapturePoint> points;
  for (const auto& [key, _] : trace.channels()) points.insert(key.cp);
  EXPECT_EQ(points.size(), 9u);

  const ChannelKey cp7{CapturePoint{"BinarytoDecimal.decimal(Ljava/lang/String;)I", 6, 0},
                       CaptureKind::def, Channel::value};
  const StreamSummary* s = trace.find(cp7);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->size(), 5u);
  const std::vector<double> want = {32, 8, 4, 2, 1};
  EXPECT_EQ(std::vector<double>(s->head().begin(), s->head().end()), want);
}

TEST(IngestSuite, ManifestOrderAndParallelAgreement) {
  const auto a = ingest_suite(kFixture, {}, 1);
  const auto b = ingest_suite(kFixture, {}, 4);
  EXPECT_EQ(a.test_ids, (std::vector<std::string>{"t1", "t2", "t3", "t4", "t5", "t6"}));
  ASSERT_EQ(a.traces.size(), b.traces.size());
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    ASSERT_EQ(a.traces[i].channel_count(), b.traces[i].channel_count());
    for (std::size_t c = 0; c < a.traces[i].channel_count(); ++c) {
      EXPECT_EQ(a.traces[i].channels()[c].first, b.traces[i].channels()[c].first);
      EXPECT_EQ(a.traces[i].channels()[c].second.retained(),
                b.traces[i].channels()[c].second.retained());
    }
  }
}

TEST(IngestSuite, MissingTraceFileIsInputError) {
  const fs::path dir = fs::temp_directory_path() / "substate_missing_trace";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "tests.txt") << "a\nb\n";
  std::ofstream(dir / "a.trace") << "";
  EXPECT_THROW(ingest_suite(dir, {}), InputError);
  fs::remove_all(dir);
}

TEST(ReadManifest, RejectsDuplicates) {
  const fs::path dir = fs::temp_directory_path() / "substate_dup_manifest";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "tests.txt") << "a\nb\na\n";
  EXPECT_THROW(read_manifest(dir), InputError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace substate
