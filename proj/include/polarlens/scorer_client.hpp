#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "polarlens/detail/sha256.hpp"
#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/scoring.hpp"

namespace polarlens::scoring {

struct ScorerEndpoint {
  std::string base_url;         // e.g. http://127.0.0.1:8080
  std::string path = "/score";
  std::string api_key_env;      // name of the env var holding the key
  size_t max_chars_per_request = 4000;
  double requests_per_second = 2.0;
  int max_retries = 3;
  int concurrency = 4;
  std::string scorer_id = "http";
  std::string scorer_version = "1";

  void validate() const {
    if (requests_per_second <= 0.0)
      throw ConfigError("scorer requests_per_second must be > 0");
    if (max_chars_per_request == 0)
      throw ConfigError("scorer max_chars_per_request must be > 0");
  }
};

// Token bucket with capacity 1: consecutive requests are spaced at least
// 1/rate seconds apart. Clock and sleep are injectable for tests.
class TokenBucket {
 public:
  using NowFn = std::function<double()>;
  using SleepFn = std::function<void(double)>;

  explicit TokenBucket(double rate_per_sec, NowFn now = {}, SleepFn sleep = {})
      : rate_(rate_per_sec), now_(std::move(now)), sleep_(std::move(sleep)) {
    if (rate_ <= 0.0) throw ConfigError("rate must be positive");
    if (!now_) {
      now_ = [] {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
      };
    }
    if (!sleep_) {
      sleep_ = [](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
      };
    }
  }

  // Blocks until a slot is available, then consumes it.
  void acquire() {
    double wait = 0.0;
    {
      std::lock_guard<std::mutex> lock(mu_);
      double now = now_();
      double slot = std::max(now, next_free_);
      next_free_ = slot + 1.0 / rate_;
      wait = slot - now;
    }
    if (wait > 0.0) sleep_(wait);
  }

 private:
  double rate_;
  NowFn now_;
  SleepFn sleep_;
  std::mutex mu_;
  double next_free_ = 0.0;
};

// Append-only NDJSON cache of {hash, scorer_id, scorer_version, score}.
// The score value is whatever JSON the scorer returned for that chunk
// (a float, or an array for the political classifier).
class ScoreCache {
 public:
  explicit ScoreCache(std::string path) : path_(std::move(path)) { load(); }

  std::optional<nlohmann::json> get(const std::string& hash,
                                    const std::string& scorer_id,
                                    const std::string& scorer_version) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key(hash, scorer_id, scorer_version));
    if (it == map_.end()) return std::nullopt;
    return std::make_optional(it->second);
  }

  void put(const std::string& hash, const std::string& scorer_id,
           const std::string& scorer_version, const nlohmann::json& score) {
    std::lock_guard<std::mutex> lock(mu_);
    auto k = key(hash, scorer_id, scorer_version);
    if (map_.count(k)) return;
    map_[k] = score;
    nlohmann::ordered_json j;
    j["hash"] = hash;
    j["scorer_id"] = scorer_id;
    j["scorer_version"] = scorer_version;
    j["score"] = score;
    io::append_line(path_, j.dump());
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
  }

 private:
  static std::string key(const std::string& h, const std::string& id,
                         const std::string& v) {
    return h + "\x1f" + id + "\x1f" + v;
  }

  void load() {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return;
    for (const auto& line : io::read_lines(path_)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) continue;
      if (!j.contains("hash") || !j.contains("scorer_id") ||
          !j.contains("scorer_version") || !j.contains("score"))
        continue;
      map_[key(j["hash"].get<std::string>(),
               j["scorer_id"].get<std::string>(),
               j["scorer_version"].get<std::string>())] = j["score"];
    }
  }

  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> map_;
};

struct FetchFailure {
  std::string user_id;
  std::string message;
};

struct FetchResult {
  std::map<std::string, double> scores;   // per user, chunk-combined
  std::vector<FetchFailure> failures;
  uint64_t http_requests = 0;
  uint64_t cache_hits = 0;
};

namespace impl {

// One POST {"texts": [...]} -> {"scores": [...]} exchange with retry and
// exponential backoff on 429/transport errors.
inline nlohmann::json post_texts(httplib::Client& client,
                                 const ScorerEndpoint& ep,
                                 const std::vector<std::string>& texts,
                                 TokenBucket& bucket,
                                 std::atomic<uint64_t>& request_count) {
  nlohmann::json body;
  body["texts"] = texts;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!ep.api_key_env.empty()) {
    const char* key = std::getenv(ep.api_key_env.c_str());
    if (key && *key) headers.emplace("Authorization", key);
  }

  double backoff = 0.25;
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    bucket.acquire();
    ++request_count;
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (res && res->status == 200) {
      nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.contains("scores") ||
          !j["scores"].is_array() || j["scores"].size() != texts.size()) {
        throw Error("scorer returned malformed response");
      }
      return j["scores"];
    }
    bool retryable = !res || res->status == 429 || res->status >= 500;
    if (!retryable) {
      throw Error("scorer rejected request with status " +
                  std::to_string(res->status));
    }
    if (attempt == ep.max_retries) break;
    std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
    backoff *= 2.0;
  }
  throw Error("scorer unreachable after " + std::to_string(ep.max_retries + 1) +
              " attempts");
}

}  // namespace impl

// Scores every document against an external endpoint: per-chunk content
// hashes consult the cache first; uncached chunks go out in one request per
// document under bounded concurrency and shared rate limiting. Per-user
// failures are collected, never thrown.
inline FetchResult fetch_external_scores(
    const std::map<std::string, UserDocument>& docs, const ScorerEndpoint& ep,
    ScoreCache& cache, TokenBucket* bucket_override = nullptr) {
  ep.validate();
  FetchResult result;
  TokenBucket local_bucket(ep.requests_per_second);
  TokenBucket& bucket = bucket_override ? *bucket_override : local_bucket;
  std::atomic<uint64_t> request_count{0};
  std::atomic<uint64_t> cache_hits{0};

  std::vector<const UserDocument*> work;
  work.reserve(docs.size());
  for (const auto& [_, doc] : docs) work.push_back(&doc);

  std::mutex result_mu;
  std::atomic<size_t> next{0};
  int n_threads = std::max(1, std::min<int>(ep.concurrency,
                                            static_cast<int>(work.size())));

  auto worker = [&]() {
    httplib::Client client(ep.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= work.size()) break;
      const UserDocument& doc = *work[i];
      try {
        auto chunks = chunk_text(doc.combined_text(), ep.max_chars_per_request);
        if (chunks.empty())
          throw Error("document produced no scoreable text");
        std::vector<std::string> hashes(chunks.size());
        std::vector<double> scores(chunks.size(), 0.0);
        std::vector<size_t> lengths(chunks.size(), 0);
        std::vector<size_t> missing;
        for (size_t c = 0; c < chunks.size(); ++c) {
          hashes[c] = detail::Sha256::hex(chunks[c]);
          lengths[c] = chunks[c].size();
          auto hit = cache.get(hashes[c], ep.scorer_id, ep.scorer_version);
          if (hit && hit->is_number()) {
            scores[c] = hit->get<double>();
            ++cache_hits;
          } else {
            missing.push_back(c);
          }
        }
        if (!missing.empty()) {
          std::vector<std::string> req_texts;
          req_texts.reserve(missing.size());
          for (size_t m : missing) req_texts.push_back(chunks[m]);
          auto arr =
              impl::post_texts(client, ep, req_texts, bucket, request_count);
          for (size_t k = 0; k < missing.size(); ++k) {
            if (!arr[k].is_number())
              throw Error("scorer returned a non-numeric score");
            scores[missing[k]] = arr[k].get<double>();
            cache.put(hashes[missing[k]], ep.scorer_id, ep.scorer_version,
                      arr[k]);
          }
        }
        double combined = combine_chunk_scores(scores, lengths);
        std::lock_guard<std::mutex> lock(result_mu);
        result.scores[doc.user_id] = combined;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(result_mu);
        result.failures.push_back({doc.user_id, e.what()});
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  result.http_requests = request_count.load();
  result.cache_hits = cache_hits.load();
  std::sort(result.failures.begin(), result.failures.end(),
            [](const FetchFailure& a, const FetchFailure& b) {
              return a.user_id < b.user_id;
            });
  return result;
}

// Political classifier: one request per document over the first chunk of
// combined text; response elements are [left, center, right]. Failures map
// to unknown and are recorded.
inline std::map<std::string, Affiliation> classify_affiliations_http(
    const std::map<std::string, UserDocument>& docs, const ScorerEndpoint& ep,
    ScoreCache& cache, std::vector<FetchFailure>& failures) {
  ep.validate();
  std::map<std::string, Affiliation> out;
  TokenBucket bucket(ep.requests_per_second);
  std::atomic<uint64_t> request_count{0};
  httplib::Client client(ep.base_url);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  for (const auto& [user, doc] : docs) {
    out[user] = Affiliation::unknown;
    try {
      auto chunks = chunk_text(doc.combined_text(), ep.max_chars_per_request);
      if (chunks.empty()) continue;
      const std::string& head = chunks.front();
      std::string hash = detail::Sha256::hex(head);
      nlohmann::json probs;
      auto hit = cache.get(hash, ep.scorer_id, ep.scorer_version);
      if (hit && hit->is_array() && hit->size() == 3) {
        probs = *hit;
      } else {
        auto arr = impl::post_texts(client, ep, {head}, bucket, request_count);
        if (!arr[0].is_array() || arr[0].size() != 3)
          throw Error("political scorer must return [left, center, right]");
        probs = arr[0];
        cache.put(hash, ep.scorer_id, ep.scorer_version, probs);
      }
      out[user] = affiliation_from_probs(probs[0].get<double>(),
                                         probs[1].get<double>(),
                                         probs[2].get<double>());
    } catch (const std::exception& e) {
      failures.push_back({user, e.what()});
    }
  }
  return out;
}

}  // namespace polarlens::scoring
