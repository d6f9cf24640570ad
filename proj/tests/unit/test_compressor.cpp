#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "aoi/compressor.hpp"
#include "aoi/errors.hpp"
#include "aoi/simenv.hpp"
#include "helpers.hpp"

using namespace aoi;

namespace {

std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("t" + std::to_string(i));
  return t;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> fixtures() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(testutil::data_dir() / "logs")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("windows of 10 tokens at w=4, overlap 0.5") {
  const auto t = numbered(10);
  const auto w = make_windows(t, 4, 0.5);
  REQUIRE(w.size() == 5);
  const std::vector<std::size_t> starts{0, 2, 4, 6, 8};
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i].index == i);
    CHECK(w[i].start == starts[i]);
  }
  CHECK(w.back().end == 10);
  CHECK(w[0].tokens[0] == "t0");
  CHECK(w[1].tokens[0] == "t2");
}

TEST_CASE("short inputs give one window, empty inputs none") {
  const auto t = numbered(3);
  const auto w = make_windows(t, 4, 0.5);
  REQUIRE(w.size() == 1);
  CHECK(w[0].end == 3);
  CHECK(make_windows(std::span<const std::string>{}, 4, 0.5).empty());
}

TEST_CASE("window starts, coverage and overlap over random sizes") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t w = 2 * std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(w + 1, 6 * w)(rng);
    const double overlap = std::array{0.25, 0.5}[trial % 2];
    if (std::fmod(w * overlap, 1.0) != 0.0) continue;
    const auto t = numbered(n);
    const auto ws = make_windows(t, w, overlap);
    std::vector<int> covered(n, 0);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      CHECK(ws[i].start == static_cast<std::size_t>(i * w * overlap));
      CHECK(ws[i].end == std::min(ws[i].start + w, n));
      for (std::size_t k = ws[i].start; k < ws[i].end; ++k) covered[k] = 1;
      if (overlap == 0.5 && i > 0 && ws[i - 1].end - ws[i - 1].start == w)
        CHECK(ws[i - 1].end - ws[i].start == w / 2);
    }
    CHECK(std::count(covered.begin(), covered.end(), 0) == 0);
  }
}

TEST_CASE("non-integer stride is a configuration error") {
  const auto t = numbered(20);
  CHECK_THROWS_AS(make_windows(t, 5, 0.5), ConfigError);
  CHECK_THROWS_AS(make_windows(t, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(make_windows(t, 1, 0.5), ConfigError);
  CompressionParams p;
  p.window_size = 767;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("critical extraction examples") {
  const auto t = tokenize("ERROR DBE-1040 connection pool exhausted on db.");
  const auto items = CriticalRules::standard().extract(t, 3);
  REQUIRE(items.size() == 2);
  CHECK(items[0].kind == CriticalKind::ErrorCode);
  CHECK(items[0].text == "DBE-1040");
  CHECK(items[0].offset == 1);
  CHECK(items[0].source_window == 3);
  CHECK(items[1].kind == CriticalKind::FaultSignature);
  CHECK(items[1].text == "connection pool exhausted");
  CHECK(items[1].length == 3);
  CHECK(items[1].tag_id == tag_of("connection pool exhausted"));

  const auto th = CriticalRules::standard().extract(tokenize("latency > 0.50 observed on db."), 0);
  REQUIRE(th.size() == 1);
  CHECK(th[0].kind == CriticalKind::ThresholdBreach);
  CHECK(th[0].text == "latency > 0.50");

  CHECK(CriticalRules::standard().extract(tokenize("heartbeat ok seq=8021."), 0).empty());
}

TEST_CASE("marker tags agree with extracted tags on fixtures") {
  for (const auto& f : fixtures()) {
    CAPTURE(f);
    const std::string raw = read_file(f);
    const auto t = tokenize(raw);
    std::set<std::string> extracted;
    for (const auto& it : CriticalRules::standard().extract(t, 0)) extracted.insert(it.tag_id);
    for (const auto& tag : parse_markers(raw)) CHECK(extracted.count(tag) == 1);
  }
}

TEST_CASE("rules file reproduces the built-in rules") {
  const auto loaded = CriticalRules::load(testutil::data_dir() / "critical_rules.json");
  for (const auto& f : fixtures()) {
    const auto t = tokenize(read_file(f));
    const auto a = CriticalRules::standard().extract(t, 0);
    const auto b = loaded.extract(t, 0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tag_id == b[i].tag_id);
      CHECK(a[i].kind == b[i].kind);
    }
  }
  CHECK_THROWS_AS(CriticalRules::from_json_text("{\"signatures\": 3}"), ConfigError);
}

TEST_CASE("ccr and ips examples") {
  CHECK(ccr(1000, 280) == doctest::Approx(0.72));
  CHECK(ccr(10, 10) == 0.0);
  CHECK_THROWS_AS(ccr(0, 0), ContractViolation);
  CHECK_THROWS_AS(ccr(10, 11), ContractViolation);

  CompressedContextEntry e;
  e.preserved_tags = {"a", "b", "c"};
  CHECK(ips({"a", "b", "c", "d"}, e) == doctest::Approx(0.75));
  CHECK(ips({}, e) == 1.0);
}

TEST_CASE("merging drops repeated sentences") {
  const std::string s1 = "db ERROR DBE-1040 connection pool exhausted. api INFO ok.";
  const std::string s2 = "api INFO ok. 45 db ERROR DBE-1040 connection pool exhausted. web INFO up.";
  const std::string merged = merge_overlaps({s1, s2}, CriticalRules::standard());
  const auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto p = merged.find(needle); p != std::string::npos; p = merged.find(needle, p + 1)) ++n;
    return n;
  };
  CHECK(count("api INFO ok.") == 1);
  CHECK(count("connection pool exhausted") == 1);
  CHECK(count("web INFO up.") == 1);
}

TEST_CASE("summaries respect their budget and lead with criticals") {
  ExtractiveSummarizer s;
  const auto t = tokenize(
      "web INFO heartbeat ok seq=1. db ERROR DBE-1040 connection pool exhausted. web INFO heartbeat ok seq=2. "
      "api INFO request served.");
  const auto items = CriticalRules::standard().extract(t, 0);
  for (std::size_t budget = 0; budget <= t.size(); ++budget) {
    const auto r = s.summarize(t, items, budget);
    CHECK(count_tokens(r.text) <= budget);
  }
  const auto r = s.summarize(t, items, 6);
  CHECK(r.text.find("DBE-1040") != std::string::npos);
  CHECK(r.text.find("heartbeat") == std::string::npos);
  const auto tiny = s.summarize(t, items, 1);
  CHECK(tiny.text.rfind("DBE-1040", 0) == 0);
  CHECK(s.last_dropped_critical());
}

TEST_CASE("compression is deterministic, within target and keeps planted spans") {
  CompressionParams p;
  for (const auto& f : fixtures()) {
    CAPTURE(f);
    const std::string raw = read_file(f);
    ExtractiveSummarizer s1, s2;
    const auto a = compress(raw, p, s1);
    const auto b = compress(raw, p, s2);
    CHECK(a.summary_text == b.summary_text);
    const auto target = static_cast<std::size_t>(std::ceil((1 - p.target_ratio) * a.raw_tokens - 1e-9));
    CHECK(a.compressed_tokens <= target);
    CHECK(a.compressed_tokens == count_tokens(a.summary_text));
    const auto truth = parse_markers(raw);
    const auto entry = make_compressed_entry(a, {"r-1"}, truth, 0.0);
    CHECK(ips(truth, entry) >= 0.9);
  }
}

TEST_CASE("over-budget summarizer is a contract violation") {
  struct Greedy : Summarizer {
    SummaryResult summarize(std::span<const std::string> w, const std::vector<CriticalItem>&,
                            std::size_t) override {
      return {join_tokens(w), false};
    }
    std::string name() const override { return "greedy"; }
  } greedy;
  CompressionParams p;
  p.window_size = 8;
  try {
    compress("a b c d e f g h i j k l m n o p.", p, greedy);
    FAIL("expected a contract violation");
  } catch (const ContractViolation& e) {
    CHECK(std::string(e.what()).find("greedy") != std::string::npos);
  }
}

TEST_CASE("sentence ranges and template keys") {
  const auto t = tokenize("30 db INFO heartbeat ok seq=12. 45 api INFO heartbeat ok seq=99. trailing");
  const auto r = sentence_ranges(t);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == std::pair<std::size_t, std::size_t>{0, 6});
  const std::span<const std::string> all(t);
  CHECK(template_key(all.subspan(0, 6)) == template_key(all.subspan(6, 6)));
}
