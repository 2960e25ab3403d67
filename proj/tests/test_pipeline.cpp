#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "polarlens/pipeline.hpp"
#include "test_util.hpp"

using namespace polarlens;

namespace {

config::RunConfig synth_cfg(size_t users, uint64_t seed) {
  config::RunConfig cfg;
  cfg.synth_users = users;
  cfg.seed = seed;
  return cfg;
}

std::vector<std::string> non_empty_lines(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t nl = s.find('\n', pos);
    if (nl == std::string::npos) nl = s.size();
    if (nl > pos) out.push_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

size_t data_rows(const std::string& path) {
  auto lines = non_empty_lines(io::read_file(path));
  return lines.empty() ? 0 : lines.size() - 1;
}

const std::vector<std::string> kTokens = {
    "reddit_climate",  "reddit_election",  "reddit_vaccines",
    "twitter_climate", "twitter_election", "twitter_vaccines"};

}  // namespace

TEST_CASE("full stub pipeline over a generated corpus", "[pipeline]") {
  TempDir td;
  const std::string ws = td.file("ws");
  auto cfg = synth_cfg(480, 99);
  cfg.validate(false);
  pipeline::Runner r(cfg, ws);
  REQUIRE(r.run_all() == ExitCode::success);

  const auto& m = r.manifest();
  CHECK(m.status() == "success");
  CHECK(m.top_scorer_id() == "stub");
  CHECK(m.failures.empty());

  const char* stages[] = {"ingest.%.ndjson", "edges.%.csv",   "classes.%.csv",
                          "scores.%.csv",    "entropy.%.csv", "intervals.%.json",
                          "stats.%.json",    "daily.%.csv",   "segments.%.csv",
                          "events.%.csv",    "engagement.%.csv",
                          "density.%.json"};
  for (const auto& token : kTokens) {
    for (const char* pattern : stages) {
      std::string name(pattern);
      name.replace(name.find('%'), 1, token);
      INFO(name);
      CHECK(m.artifacts.count(name) == 1);
    }
  }
  CHECK(m.artifacts.count("bubbles.all.csv") == 1);
  CHECK(m.artifacts.count("violins.all.csv") == 1);
  CHECK(m.artifacts.count("ingest.summary.json") == 1);
  CHECK(m.artifacts.count("graph.summary.json") == 1);
  CHECK(m.artifacts.count("inputs.resolved.json") == 1);
  CHECK(m.report_summary.at("bubble_rows").get<size_t>() == 12);

  SECTION("no graphics are emitted while svg is off") {
    for (const auto& [file, _] : m.artifacts)
      CHECK(file.find(".svg") == std::string::npos);
  }

  SECTION("bubble table carries 12 rows with one pinned at q") {
    auto lines = non_empty_lines(io::read_file(ws + "/bubbles.all.csv"));
    REQUIRE(lines.size() == 13);
    size_t at_q = 0;
    std::string min_row;
    for (size_t i = 1; i < lines.size(); ++i) {
      auto f = io::csv_split(lines[i]);
      REQUIRE(f.size() == 7);
      if (f[6] == "500") {
        ++at_q;
        min_row = lines[i];
      }
      CHECK(std::stod(f[6]) >= 500.0);
    }
    CHECK(at_q == 1);
    // the smallest vocabulary was planted in twitter/election/democratic
    CHECK(min_row.rfind("twitter,election,democratic,", 0) == 0);
  }

  SECTION("every classified user is scored") {
    for (const auto& token : kTokens) {
      INFO(token);
      CHECK(data_rows(ws + "/scores." + token + ".csv") ==
            data_rows(ws + "/classes." + token + ".csv"));
      CHECK(data_rows(ws + "/entropy." + token + ".csv") ==
            data_rows(ws + "/classes." + token + ".csv"));
    }
  }

  SECTION("measured 2-cores equal the planted cores") {
    auto gt = nlohmann::json::parse(
        io::read_file(ws + "/corpus/ground_truth.json"));
    std::map<std::string, size_t> planted;
    for (const auto& c : gt.at("cohorts")) {
      std::string token = c.at("platform").get<std::string>() + "_" +
                          c.at("topic").get<std::string>();
      planted[token] += c.at("two_core_users").get<size_t>();
    }
    auto gs = nlohmann::json::parse(io::read_file(ws + "/graph.summary.json"));
    for (const auto& token : kTokens) {
      INFO(token);
      CHECK(gs.at(token).at("two_core").get<size_t>() == planted.at(token));
      CHECK(gs.at(token).at("unknown").get<size_t>() == 0);
    }
  }

  SECTION("stats artifacts carry the full battery") {
    auto st = nlohmann::json::parse(
        io::read_file(ws + "/stats.twitter_election.json"));
    CHECK(st.at("comparisons").get<int>() == 24);  // 6 cohorts x 4 metrics
    for (const char* metric :
         {"toxicity", "compound", "pessimism", "entropy"}) {
      INFO(metric);
      const auto& t = st.at("tests").at(metric);
      CHECK(t.contains("mann_whitney"));
      CHECK(t.contains("ks"));
      CHECK(t.contains("cliffs_delta"));
      CHECK(t.contains("fligner"));
      CHECK(t.at("mann_whitney").contains("p_adjusted"));
    }
    CHECK(st.at("dip_compound").contains("all"));
    CHECK(st.at("pearson_toxicity_pessimism").contains("democratic"));
    CHECK(st.at("pearson_toxicity_pessimism").contains("republican"));
  }

  SECTION("minimal entropy intervals are scanned per affiliation") {
    auto iv = nlohmann::json::parse(
        io::read_file(ws + "/intervals.twitter_election.json"));
    for (const char* side : {"democratic", "republican"}) {
      INFO(side);
      REQUIRE(iv.contains(side));
      CHECK(iv.at(side).at("n").get<size_t>() > 0);
      if (!iv.at(side).at("interval").is_null()) {
        CHECK(iv.at(side).at("interval").at("proportion").get<double>() > 0.5);
      }
    }
  }
}

TEST_CASE("same seed reproduces the manifest byte for byte", "[pipeline]") {
  TempDir td;
  auto cfg = synth_cfg(480, 2024);
  pipeline::Runner(cfg, td.file("a")).run_all();
  pipeline::Runner(cfg, td.file("b")).run_all();
  const std::string ma = io::read_file(td.file("a") + "/manifest.json");
  const std::string mb = io::read_file(td.file("b") + "/manifest.json");
  CHECK(ma == mb);

  auto other = synth_cfg(480, 2025);
  pipeline::Runner(other, td.file("c")).run_all();
  CHECK(ma != io::read_file(td.file("c") + "/manifest.json"));
}

TEST_CASE("stages can be re-run individually over the same workspace",
          "[pipeline]") {
  TempDir td;
  const std::string ws = td.file("ws");
  auto cfg = synth_cfg(480, 7);
  std::string before;
  {
    pipeline::Runner first(cfg, ws);
    first.run_all();
    before = first.manifest().artifacts.at("scores.twitter_election.csv").sha256;
  }
  pipeline::Runner again(cfg, ws);
  again.score_stage();
  CHECK(again.manifest().artifacts.at("scores.twitter_election.csv").sha256 ==
        before);
  // the reloaded manifest still indexes the other stages' artifacts
  CHECK(again.manifest().artifacts.count("bubbles.all.csv") == 1);
  CHECK(again.manifest().artifacts.count("daily.reddit_climate.csv") == 1);
}

TEST_CASE("config validation rejects broken run descriptions", "[pipeline]") {
  config::RunConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // neither inputs nor synth

  cfg.synth_users = 480;
  CHECK_NOTHROW(cfg.validate(false));
  SECTION("q must be positive") {
    cfg.q = 0.0;
    CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  }
  SECTION("segments need at least one day") {
    cfg.segment_days = 0;
    CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  }
  SECTION("window must be ordered") {
    cfg.window.end = cfg.window.start;
    CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  }
  SECTION("synth and explicit inputs are mutually exclusive") {
    cfg.inputs.push_back(
        {"x.ndjson", ingest::SourceFormat::twitter, "election"});
    CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  }
  SECTION("scorer mode is a closed enum") {
    cfg.scorers.mode = "remote";
    CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  }
}

TEST_CASE("config parsing enforces the published schema", "[pipeline]") {
  CHECK_THROWS_AS(config::parse_config(nlohmann::json::parse(
                      R"({"synth": {"users": 480}, "turbo": true})")),
                  ConfigError);  // unknown key
  CHECK_THROWS_AS(config::parse_config(nlohmann::json::parse(
                      R"({"inputs": {"path": "x"}})")),
                  ConfigError);  // inputs must be an array
  CHECK_THROWS_AS(config::parse_config(nlohmann::json::parse(
                      R"({"inputs": [{"format": "twitter"}]})")),
                  ConfigError);  // entry without path
  CHECK_THROWS_AS(config::parse_config(nlohmann::json::parse(
                      R"({"synth": {"users": 480}, "engagement_metric": "x"})")),
                  ConfigError);
  CHECK_THROWS_AS(
      config::parse_config(nlohmann::json::parse(
          R"({"inputs": [{"path": "x.ndjson", "topic": "t"}]})")),
      ConfigError);  // no format and no platform default

  auto cfg = config::parse_config(nlohmann::json::parse(R"({
    "platform": "reddit",
    "topic": "election",
    "inputs": [{"path": "a_comments.ndjson"},
               {"path": "a_submissions.ndjson"}],
    "window": {"start": "2016-01-01", "end": "2017-01-01"},
    "q": 250.0,
    "seed": 11,
    "engagement_metric": "pessimism"
  })"));
  REQUIRE(cfg.inputs.size() == 2);
  CHECK(cfg.inputs[0].format == ingest::SourceFormat::pushshift_comments);
  CHECK(cfg.inputs[1].format == ingest::SourceFormat::pushshift_submissions);
  CHECK(cfg.inputs[0].topic == "election");
  CHECK(cfg.q == 250.0);
  CHECK(cfg.seed == 11);
  CHECK(cfg.engagement_pessimism_axis);
  CHECK(cfg.window.start == detail::parse_iso_date("2016-01-01"));

  TempDir td;
  write_text_file(td.file("bad.json"), "{nope");
  CHECK_THROWS_AS(config::load_config(td.file("bad.json")), ConfigError);
  write_text_file(
      td.file("missing.json"),
      R"({"inputs": [{"path": "/no/such/file", "format": "twitter",
          "topic": "t"}]})");
  CHECK_THROWS_AS(config::load_config(td.file("missing.json")), ConfigError);
}

TEST_CASE("stage ordering and workspace locking fail fast", "[pipeline]") {
  TempDir td;
  SECTION("graph before ingest is an error") {
    pipeline::Runner r(synth_cfg(480, 1), td.file("ws"));
    CHECK_THROWS_AS(r.graph_stage(), ConfigError);
  }
  SECTION("a held workspace lock blocks the next taker") {
    io::WorkspaceLock held(td.file("locked"));
    CHECK_THROWS_AS(io::WorkspaceLock(td.file("locked")), IoError);
  }
}

TEST_CASE("dead scorer endpoint falls back to stubs and reports partial",
          "[pipeline]") {
  TempDir td;
  const std::string ws = td.file("ws");
  auto cfg = synth_cfg(120, 5);
  cfg.scorers.mode = "http";
  cfg.scorers.fallback_to_stub = true;
  scoring::ScorerEndpoint ep;
  ep.base_url = "http://127.0.0.1:9";  // nothing listens here
  ep.max_retries = 0;
  ep.requests_per_second = 100000.0;
  ep.scorer_id = "perspective";
  cfg.scorers.toxicity = ep;

  pipeline::Runner r(cfg, ws);
  REQUIRE(r.run_all() == ExitCode::partial);
  const auto& m = r.manifest();
  CHECK(m.status() == "partial");
  CHECK_FALSE(m.failures.empty());
  // the fallback kept every artifact complete
  CHECK(m.scorer_ids.at("toxicity") == "stub");
  CHECK(m.scorer_ids.at("pessimism") == "stub");
  CHECK(m.top_scorer_id() == "stub");
  CHECK(m.report_summary.at("bubble_rows").get<size_t>() == 12);
  for (const auto& token : kTokens) {
    INFO(token);
    CHECK(data_rows(ws + "/scores." + token + ".csv") ==
          data_rows(ws + "/classes." + token + ".csv"));
  }
}
