#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/detail/time.hpp"
#include "polarlens/error.hpp"
#include "polarlens/ingest.hpp"
#include "polarlens/io.hpp"
#include "polarlens/scorer_client.hpp"

namespace polarlens::config {

struct ScorerSettings {
  std::string mode = "stub";  // "stub" or "http"
  bool fallback_to_stub = true;
  std::string cache_path;  // empty resolves to <workspace>/score_cache.ndjson
  std::optional<scoring::ScorerEndpoint> toxicity;
  std::optional<scoring::ScorerEndpoint> pessimism;
  std::optional<scoring::ScorerEndpoint> sentiment;
  std::optional<scoring::ScorerEndpoint> affiliation;
};

// The whole run in one JSON document. Dates are ISO (YYYY-MM-DD); the
// window default covers 2016-01-01 up to (not including) 2021-03-01.
struct RunConfig {
  std::vector<ingest::InputSpec> inputs;
  std::vector<std::string> keywords;  // empty means the built-in list
  ingest::TimeWindow window{detail::parse_iso_date("2016-01-01"),
                            detail::parse_iso_date("2021-03-01")};
  bool quotes_as_retweets = false;
  std::string seeds_path;
  ScorerSettings scorers;
  double q = 500.0;
  int segment_days = 90;
  std::vector<int64_t> event_days = {
      detail::parse_iso_date("2016-11-08") / 86400,
      detail::parse_iso_date("2020-11-03") / 86400,
      detail::parse_iso_date("2021-01-06") / 86400};
  bool engagement_pessimism_axis = false;  // regress pessimism, not toxicity
  std::string output_dir = "out";
  uint64_t seed = 0;
  bool svg = false;
  size_t synth_users = 0;  // > 0 generates a corpus before ingesting

  // check_paths also demands that referenced files exist right now
  void validate(bool check_paths = true) const {
    if (inputs.empty() && synth_users == 0)
      throw ConfigError("config needs inputs or a synth block");
    if (!inputs.empty() && synth_users > 0)
      throw ConfigError("inputs and synth are mutually exclusive");
    if (!(q > 0.0)) throw ConfigError("q must be positive");
    if (segment_days < 1) throw ConfigError("segment_days must be >= 1");
    if (window.start >= window.end)
      throw ConfigError("window start must precede window end");
    if (scorers.mode != "stub" && scorers.mode != "http")
      throw ConfigError("scorers.mode must be \"stub\" or \"http\"");
    if (scorers.mode == "http" && !scorers.toxicity && !scorers.pessimism &&
        !scorers.sentiment && !scorers.affiliation)
      throw ConfigError("scorers.mode \"http\" needs at least one endpoint");
    // 12 planted cohorts; each needs enough users for a 3-node ring core
    if (synth_users > 0 && synth_users < 96)
      throw ConfigError("synth.users must be at least 96");
    for (const auto& in : inputs) {
      if (in.topic.empty())
        throw ConfigError("input " + in.path + " has no topic");
    }
    if (check_paths) {
      for (const auto& in : inputs) {
        if (!std::filesystem::exists(in.path))
          throw ConfigError("input path does not exist: " + in.path);
      }
      if (!seeds_path.empty() && !std::filesystem::exists(seeds_path))
        throw ConfigError("seeds path does not exist: " + seeds_path);
    }
  }
};

namespace impl {

inline void expect_keys(const nlohmann::json& j,
                        const std::set<std::string>& allowed,
                        const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field \"") + key + "\" has the wrong type");
  }
}

inline scoring::ScorerEndpoint parse_endpoint(const nlohmann::json& j,
                                              const std::string& which) {
  if (!j.is_object())
    throw ConfigError("scorers." + which + " must be an object");
  expect_keys(j,
              {"base_url", "path", "api_key_env", "max_chars_per_request",
               "requests_per_second", "max_retries", "concurrency",
               "scorer_id", "scorer_version"},
              "scorers." + which);
  scoring::ScorerEndpoint ep;
  if (!j.contains("base_url"))
    throw ConfigError("scorers." + which + " needs base_url");
  ep.base_url = j.at("base_url").get<std::string>();
  ep.path = field_or<std::string>(j, "path", ep.path);
  ep.api_key_env = field_or<std::string>(j, "api_key_env", ep.api_key_env);
  ep.max_chars_per_request =
      field_or<size_t>(j, "max_chars_per_request", ep.max_chars_per_request);
  ep.requests_per_second =
      field_or<double>(j, "requests_per_second", ep.requests_per_second);
  ep.max_retries = field_or<int>(j, "max_retries", ep.max_retries);
  ep.concurrency = field_or<int>(j, "concurrency", ep.concurrency);
  ep.scorer_id = field_or<std::string>(j, "scorer_id", ep.scorer_id);
  ep.scorer_version =
      field_or<std::string>(j, "scorer_version", ep.scorer_version);
  ep.validate();
  return ep;
}

// An input's format comes from its own "format" key, or is inferred from
// the top-level platform default ("reddit" sniffs the filename for the
// comments/submissions split).
inline ingest::SourceFormat infer_format(const nlohmann::json& entry,
                                         const std::string& platform_default) {
  if (entry.contains("format"))
    return ingest::source_format_from_string(
        entry.at("format").get<std::string>());
  if (platform_default == "twitter") return ingest::SourceFormat::twitter;
  if (platform_default == "reddit") {
    const std::string path = entry.at("path").get<std::string>();
    if (path.find("submission") != std::string::npos)
      return ingest::SourceFormat::pushshift_submissions;
    if (path.find("comment") != std::string::npos)
      return ingest::SourceFormat::pushshift_comments;
    throw ConfigError("cannot infer comments/submissions from path: " + path);
  }
  throw ConfigError("input " + entry.at("path").get<std::string>() +
                    " has no format and no platform default applies");
}

}  // namespace impl

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  impl::expect_keys(
      j,
      {"inputs", "platform", "topic", "keywords", "window",
       "quotes_as_retweets", "seeds_path", "scorers", "q", "segment_days",
       "event_dates", "engagement_metric", "output_dir", "seed", "svg",
       "synth"},
      "config");
  RunConfig cfg;
  const std::string platform_default =
      impl::field_or<std::string>(j, "platform", "");
  const std::string topic_default = impl::field_or<std::string>(j, "topic", "");

  if (j.contains("inputs")) {
    if (!j.at("inputs").is_array())
      throw ConfigError("inputs must be an array");
    for (const auto& entry : j.at("inputs")) {
      if (!entry.is_object() || !entry.contains("path"))
        throw ConfigError("each input needs at least a path");
      impl::expect_keys(entry, {"path", "format", "topic"}, "inputs[]");
      ingest::InputSpec spec;
      spec.path = entry.at("path").get<std::string>();
      spec.format = impl::infer_format(entry, platform_default);
      spec.topic = impl::field_or<std::string>(entry, "topic", topic_default);
      cfg.inputs.push_back(std::move(spec));
    }
  }
  cfg.keywords = impl::field_or<std::vector<std::string>>(j, "keywords", {});
  if (j.contains("window")) {
    const auto& w = j.at("window");
    impl::expect_keys(w, {"start", "end"}, "window");
    if (w.contains("start"))
      cfg.window.start =
          detail::parse_iso_date(w.at("start").get<std::string>());
    if (w.contains("end"))
      cfg.window.end = detail::parse_iso_date(w.at("end").get<std::string>());
  }
  cfg.quotes_as_retweets =
      impl::field_or<bool>(j, "quotes_as_retweets", cfg.quotes_as_retweets);
  cfg.seeds_path = impl::field_or<std::string>(j, "seeds_path", "");
  if (j.contains("scorers")) {
    const auto& s = j.at("scorers");
    impl::expect_keys(s,
                      {"mode", "fallback_to_stub", "cache_path", "toxicity",
                       "pessimism", "sentiment", "affiliation"},
                      "scorers");
    cfg.scorers.mode = impl::field_or<std::string>(s, "mode", "stub");
    cfg.scorers.fallback_to_stub =
        impl::field_or<bool>(s, "fallback_to_stub", true);
    cfg.scorers.cache_path = impl::field_or<std::string>(s, "cache_path", "");
    if (s.contains("toxicity"))
      cfg.scorers.toxicity = impl::parse_endpoint(s.at("toxicity"), "toxicity");
    if (s.contains("pessimism"))
      cfg.scorers.pessimism =
          impl::parse_endpoint(s.at("pessimism"), "pessimism");
    if (s.contains("sentiment"))
      cfg.scorers.sentiment =
          impl::parse_endpoint(s.at("sentiment"), "sentiment");
    if (s.contains("affiliation"))
      cfg.scorers.affiliation =
          impl::parse_endpoint(s.at("affiliation"), "affiliation");
  }
  cfg.q = impl::field_or<double>(j, "q", cfg.q);
  cfg.segment_days = impl::field_or<int>(j, "segment_days", cfg.segment_days);
  if (j.contains("event_dates")) {
    if (!j.at("event_dates").is_array())
      throw ConfigError("event_dates must be an array of ISO dates");
    cfg.event_days.clear();
    for (const auto& d : j.at("event_dates"))
      cfg.event_days.push_back(
          detail::parse_iso_date(d.get<std::string>()) / 86400);
  }
  const std::string metric =
      impl::field_or<std::string>(j, "engagement_metric", "toxicity");
  if (metric != "toxicity" && metric != "pessimism")
    throw ConfigError("engagement_metric must be toxicity or pessimism");
  cfg.engagement_pessimism_axis = metric == "pessimism";
  cfg.output_dir = impl::field_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.seed = impl::field_or<uint64_t>(j, "seed", cfg.seed);
  cfg.svg = impl::field_or<bool>(j, "svg", cfg.svg);
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    impl::expect_keys(s, {"users"}, "synth");
    cfg.synth_users = impl::field_or<size_t>(s, "users", 0);
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path, bool check_paths = true) {
  nlohmann::json j = nlohmann::json::parse(io::read_file(path), nullptr, false);
  if (j.is_discarded())
    throw ConfigError("config is not valid JSON: " + path);
  RunConfig cfg = parse_config(j);
  cfg.validate(check_paths);
  return cfg;
}

// Canonical re-serialization used for the manifest's config hash: field
// order is fixed, so equal configs hash equally regardless of input layout.
inline nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& in : cfg.inputs) {
    nlohmann::ordered_json e;
    e["path"] = in.path;
    switch (in.format) {
      case ingest::SourceFormat::twitter:
        e["format"] = "twitter";
        break;
      case ingest::SourceFormat::pushshift_comments:
        e["format"] = "pushshift_comments";
        break;
      case ingest::SourceFormat::pushshift_submissions:
        e["format"] = "pushshift_submissions";
        break;
    }
    e["topic"] = in.topic;
    j["inputs"].push_back(std::move(e));
  }
  j["keywords"] = cfg.keywords;
  j["window"] = {{"start", detail::iso_date(cfg.window.start)},
                 {"end", detail::iso_date(cfg.window.end)}};
  j["quotes_as_retweets"] = cfg.quotes_as_retweets;
  j["seeds_path"] = cfg.seeds_path;
  j["scorers"] = {{"mode", cfg.scorers.mode},
                  {"fallback_to_stub", cfg.scorers.fallback_to_stub},
                  {"cache_path", cfg.scorers.cache_path}};
  auto endpoint_json = [](const scoring::ScorerEndpoint& ep) {
    nlohmann::ordered_json e;
    e["base_url"] = ep.base_url;
    e["path"] = ep.path;
    e["api_key_env"] = ep.api_key_env;
    e["scorer_id"] = ep.scorer_id;
    e["scorer_version"] = ep.scorer_version;
    return e;
  };
  if (cfg.scorers.toxicity)
    j["scorers"]["toxicity"] = endpoint_json(*cfg.scorers.toxicity);
  if (cfg.scorers.pessimism)
    j["scorers"]["pessimism"] = endpoint_json(*cfg.scorers.pessimism);
  if (cfg.scorers.sentiment)
    j["scorers"]["sentiment"] = endpoint_json(*cfg.scorers.sentiment);
  if (cfg.scorers.affiliation)
    j["scorers"]["affiliation"] = endpoint_json(*cfg.scorers.affiliation);
  j["q"] = cfg.q;
  j["segment_days"] = cfg.segment_days;
  {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int64_t d : cfg.event_days) arr.push_back(detail::iso_date(d * 86400));
    j["event_dates"] = std::move(arr);
  }
  j["engagement_metric"] =
      cfg.engagement_pessimism_axis ? "pessimism" : "toxicity";
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["svg"] = cfg.svg;
  j["synth"] = {{"users", cfg.synth_users}};
  return j;
}

}  // namespace polarlens::config
