#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "polarlens/scorer_client.hpp"
#include "test_util.hpp"

using namespace polarlens;
using scoring::ScoreCache;
using scoring::ScorerEndpoint;
using scoring::TokenBucket;
using scoring::UserDocument;

namespace {

UserDocument make_doc(const std::string& user, const std::string& text) {
  UserDocument d;
  d.user_id = user;
  d.texts = {text};
  d.total_chars = text.size();
  return d;
}

// Local scorer double; each handler invocation counts one request.
struct TestServer {
  httplib::Server svr;
  std::thread th;
  int port = 0;
  std::atomic<int> requests{0};

  explicit TestServer(
      std::function<void(const nlohmann::json&, nlohmann::json&)> score_fn,
      int fail_first_n_with = 0, int fail_status = 429) {
    svr.Post("/score", [this, score_fn, fail_first_n_with, fail_status](
                            const httplib::Request& req,
                            httplib::Response& res) {
      int seq = ++requests;
      if (seq <= fail_first_n_with) {
        res.status = fail_status;
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json scores = nlohmann::json::array();
      for (const auto& t : body["texts"]) {
        nlohmann::json s;
        score_fn(t, s);
        scores.push_back(s);
      }
      nlohmann::json out;
      out["scores"] = scores;
      res.set_content(out.dump(), "application/json");
    });
    port = svr.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }
  ~TestServer() {
    svr.stop();
    th.join();
  }

  ScorerEndpoint endpoint() const {
    ScorerEndpoint ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port);
    ep.requests_per_second = 500.0;  // keep tests fast
    ep.scorer_id = "test";
    ep.scorer_version = "1";
    return ep;
  }
};

void constant_score(const nlohmann::json&, nlohmann::json& out) { out = 0.25; }

}  // namespace

TEST_CASE("token bucket spaces requests at the configured rate",
          "[scorer-client]") {
  double fake_now = 0.0;
  double slept = 0.0;
  TokenBucket bucket(
      2.0, [&] { return fake_now; },
      [&](double s) {
        slept += s;
        fake_now += s;
      });
  for (int i = 0; i < 10; ++i) bucket.acquire();
  // 10 requests at 2/s: first free, then 9 waits of 0.5 s
  CHECK(slept == Catch::Approx(4.5).epsilon(1e-9));
  CHECK_THROWS_AS(TokenBucket(0.0), ConfigError);
}

TEST_CASE("cache persists scores across instances", "[scorer-client]") {
  TempDir dir;
  const std::string path = dir.file("cache.ndjson");
  {
    ScoreCache cache(path);
    CHECK_FALSE(cache.get("h1", "tox", "1").has_value());
    cache.put("h1", "tox", "1", 0.5);
    cache.put("h1", "tox", "1", 0.9);  // duplicate put ignored
    cache.put("h2", "pol", "2", nlohmann::json::array({0.1, 0.2, 0.7}));
    REQUIRE(cache.get("h1", "tox", "1").has_value());
    CHECK(cache.get("h1", "tox", "1")->get<double>() == 0.5);
  }
  ScoreCache reloaded(path);
  CHECK(reloaded.size() == 2);
  REQUIRE(reloaded.get("h1", "tox", "1").has_value());
  CHECK(reloaded.get("h1", "tox", "1")->get<double>() == 0.5);
  CHECK_FALSE(reloaded.get("h1", "tox", "2").has_value());  // version keyed
  auto pol = reloaded.get("h2", "pol", "2");
  REQUIRE(pol.has_value());
  CHECK(pol->is_array());
}

TEST_CASE("external scores fetch once then serve from cache",
          "[scorer-client]") {
  TestServer server(constant_score);
  TempDir dir;
  std::map<std::string, UserDocument> docs;
  for (int i = 0; i < 3; ++i) {
    std::string u = "u" + std::to_string(i);
    docs[u] = make_doc(u, "text number " + std::to_string(i));
  }

  auto ep = server.endpoint();
  {
    ScoreCache cache(dir.file("cache.ndjson"));
    auto res = scoring::fetch_external_scores(docs, ep, cache);
    CHECK(res.failures.empty());
    CHECK(res.http_requests == 3);  // one request per document
    REQUIRE(res.scores.size() == 3);
    for (const auto& [_, s] : res.scores) CHECK(s == 0.25);
  }
  {
    // fresh cache object over the same file: all hits, zero requests
    ScoreCache cache(dir.file("cache.ndjson"));
    int before = server.requests.load();
    auto res = scoring::fetch_external_scores(docs, ep, cache);
    CHECK(res.failures.empty());
    CHECK(res.http_requests == 0);
    CHECK(server.requests.load() == before);
    CHECK(res.cache_hits == 3);
    REQUIRE(res.scores.size() == 3);
    for (const auto& [_, s] : res.scores) CHECK(s == 0.25);
  }
}

TEST_CASE("chunked documents combine by length-weighted mean",
          "[scorer-client]") {
  // score = chunk length scaled into [0,1] so the combination is checkable
  TestServer server([](const nlohmann::json& t, nlohmann::json& out) {
    out = static_cast<double>(t.get<std::string>().size()) / 100.0;
  });
  TempDir dir;
  ScoreCache cache(dir.file("cache.ndjson"));
  auto ep = server.endpoint();
  ep.max_chars_per_request = 10;

  std::string text = "aaaa bbbb cccc";  // chunks "aaaa bbbb" (9), "cccc" (4)
  std::map<std::string, UserDocument> docs = {{"u", make_doc("u", text)}};
  auto res = scoring::fetch_external_scores(docs, ep, cache);
  REQUIRE(res.failures.empty());
  REQUIRE(res.scores.count("u") == 1);
  double expect = (0.09 * 9.0 + 0.04 * 4.0) / 13.0;
  CHECK(res.scores.at("u") == Catch::Approx(expect).epsilon(1e-12));
  CHECK(res.http_requests == 1);  // both chunks in one request
  CHECK(cache.size() == 2);       // cached per chunk
}

TEST_CASE("429 responses retry with backoff and then succeed",
          "[scorer-client]") {
  TestServer server(constant_score, 1, 429);
  TempDir dir;
  ScoreCache cache(dir.file("cache.ndjson"));
  auto ep = server.endpoint();
  ep.max_retries = 2;
  std::map<std::string, UserDocument> docs = {{"u", make_doc("u", "hello")}};
  auto res = scoring::fetch_external_scores(docs, ep, cache);
  CHECK(res.failures.empty());
  REQUIRE(res.scores.count("u") == 1);
  CHECK(server.requests.load() == 2);  // one 429, one success
}

TEST_CASE("persistent failures land in the failure summary",
          "[scorer-client]") {
  TempDir dir;
  ScoreCache cache(dir.file("cache.ndjson"));
  ScorerEndpoint ep;
  ep.base_url = "http://127.0.0.1:9";  // discard port: nothing listens
  ep.requests_per_second = 1000.0;
  ep.max_retries = 0;
  std::map<std::string, UserDocument> docs = {
      {"u1", make_doc("u1", "a")},
      {"u2", make_doc("u2", "b")},
  };
  auto res = scoring::fetch_external_scores(docs, ep, cache);
  CHECK(res.scores.empty());
  REQUIRE(res.failures.size() == 2);
  CHECK(res.failures[0].user_id == "u1");
  CHECK(res.failures[1].user_id == "u2");
}

TEST_CASE("malformed scorer responses fail that user only",
          "[scorer-client]") {
  TestServer server([](const nlohmann::json&, nlohmann::json& out) {
    out = "not a number";
  });
  TempDir dir;
  ScoreCache cache(dir.file("cache.ndjson"));
  std::map<std::string, UserDocument> docs = {{"u", make_doc("u", "hello")}};
  auto res = scoring::fetch_external_scores(docs, server.endpoint(), cache);
  CHECK(res.scores.empty());
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].user_id == "u");
}

TEST_CASE("authorization header carries the named env var",
          "[scorer-client]") {
  std::atomic<bool> saw_key{false};
  httplib::Server svr;
  svr.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    if (req.get_header_value("Authorization") == "Bearer sesame")
      saw_key = true;
    nlohmann::json out;
    out["scores"] = nlohmann::json::array({0.5});
    res.set_content(out.dump(), "application/json");
  });
  int port = svr.bind_to_any_port("127.0.0.1");
  std::thread th([&] { svr.listen_after_bind(); });
  svr.wait_until_ready();

  setenv("POLARLENS_TEST_KEY", "Bearer sesame", 1);
  TempDir dir;
  ScoreCache cache(dir.file("cache.ndjson"));
  ScorerEndpoint ep;
  ep.base_url = "http://127.0.0.1:" + std::to_string(port);
  ep.requests_per_second = 500.0;
  ep.api_key_env = "POLARLENS_TEST_KEY";
  std::map<std::string, UserDocument> docs = {{"u", make_doc("u", "hi")}};
  auto res = scoring::fetch_external_scores(docs, ep, cache);
  CHECK(res.failures.empty());
  CHECK(saw_key.load());
  unsetenv("POLARLENS_TEST_KEY");
  svr.stop();
  th.join();
}

TEST_CASE("political classification maps probability triples",
          "[scorer-client]") {
  TestServer server([](const nlohmann::json& t, nlohmann::json& out) {
    std::string text = t.get<std::string>();
    if (text.find("left") != std::string::npos)
      out = nlohmann::json::array({0.8, 0.1, 0.1});
    else if (text.find("right") != std::string::npos)
      out = nlohmann::json::array({0.1, 0.1, 0.8});
    else
      out = nlohmann::json::array({0.34, 0.33, 0.33});
  });
  TempDir dir;
  ScoreCache cache(dir.file("cache.ndjson"));
  std::map<std::string, UserDocument> docs = {
      {"d", make_doc("d", "left talking points")},
      {"r", make_doc("r", "right talking points")},
      {"m", make_doc("m", "mixed bag")},
  };
  std::vector<scoring::FetchFailure> failures;
  auto ep = server.endpoint();
  auto affs = scoring::classify_affiliations_http(docs, ep, cache, failures);
  CHECK(failures.empty());
  CHECK(affs.at("d") == Affiliation::democratic);
  CHECK(affs.at("r") == Affiliation::republican);
  CHECK(affs.at("m") == Affiliation::unknown);
  int before = server.requests.load();
  auto affs2 = scoring::classify_affiliations_http(docs, ep, cache, failures);
  CHECK(server.requests.load() == before);  // cache hits
  CHECK(affs2 == affs);
}
