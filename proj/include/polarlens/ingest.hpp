#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/detail/time.hpp"
#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/record.hpp"
#include "polarlens/text.hpp"

namespace polarlens::ingest {

struct SkipStats {
  uint64_t lines = 0;      // non-blank input lines seen
  uint64_t malformed = 0;  // unparseable lines, skipped
  uint64_t filtered = 0;   // parsed but outside keywords/window
  uint64_t duplicates = 0; // repeated message_id, dropped at merge
  uint64_t emitted = 0;    // records surviving everything

  SkipStats& operator+=(const SkipStats& o) {
    lines += o.lines;
    malformed += o.malformed;
    filtered += o.filtered;
    duplicates += o.duplicates;
    emitted += o.emitted;
    return *this;
  }
};

struct KeywordFilter {
  std::vector<std::string> phrases;  // stored lowercase

  explicit KeywordFilter(std::vector<std::string> p) : phrases(std::move(p)) {
    if (phrases.empty()) throw ConfigError("keyword list must be non-empty");
    for (auto& ph : phrases) ph = text::lower_ascii(ph);
  }

  static KeywordFilter defaults() {
    return KeywordFilter({"fact check", "fact-checking", "fact checker",
                          "fact checkers", "fake news", "misinformation",
                          "disinformation", "debunkers", "debunker",
                          "debunking", "debunk"});
  }

  // Case-insensitive substring on whitespace-normalized text;
  // order-independent over phrases.
  bool matches(const std::string& normalized_text) const {
    for (const auto& p : phrases) {
      if (text::contains_ci(normalized_text, p)) return true;
    }
    return false;
  }
};

struct TimeWindow {
  int64_t start;  // inclusive
  int64_t end;    // exclusive

  TimeWindow(int64_t s, int64_t e) : start(s), end(e) {
    if (!(start < end)) throw ConfigError("time window start must precede end");
  }
  bool contains(int64_t t) const { return t >= start && t < end; }
};

struct IngestOptions {
  bool quotes_as_retweets = false;
};

enum class SourceFormat { twitter, pushshift_comments, pushshift_submissions };

inline SourceFormat source_format_from_string(const std::string& s) {
  if (s == "twitter") return SourceFormat::twitter;
  if (s == "pushshift_comments") return SourceFormat::pushshift_comments;
  if (s == "pushshift_submissions") return SourceFormat::pushshift_submissions;
  throw ConfigError("unknown source format '" + s + "'");
}

namespace impl {

inline std::optional<std::string> json_id(const nlohmann::json& j,
                                          const char* str_key,
                                          const char* num_key) {
  if (j.contains(str_key) && j[str_key].is_string())
    return j[str_key].get<std::string>();
  if (j.contains(num_key)) {
    const auto& v = j[num_key];
    if (v.is_number_unsigned()) return std::to_string(v.get<uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
    if (v.is_string()) return v.get<std::string>();
  }
  return std::nullopt;
}

inline std::optional<int64_t> epoch_from(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return static_cast<int64_t>(v.get<uint64_t>());
  if (v.is_number_integer()) return v.get<int64_t>();
  if (v.is_number_float()) return static_cast<int64_t>(v.get<double>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    int64_t t = 0;
    if (detail::parse_legacy_timestamp(s, t)) return t;
    try {
      size_t pos = 0;
      t = std::stoll(s, &pos);
      if (pos == s.size()) return t;
    } catch (...) {
    }
  }
  return std::nullopt;
}

}  // namespace impl

// One line of an X API v1.1 style archive -> record. Returns false for
// malformed lines (caller counts them); never throws on bad content.
inline bool parse_twitter_line(const std::string& line,
                               const std::string& topic,
                               const IngestOptions& opts,
                               InteractionRecord& out) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;

  auto id = impl::json_id(j, "id_str", "id");
  if (!id) return false;
  if (!j.contains("user") || !j["user"].is_object()) return false;
  auto uid = impl::json_id(j["user"], "id_str", "id");
  if (!uid) return false;
  if (!j.contains("created_at")) return false;
  auto ts = impl::epoch_from(j["created_at"]);
  if (!ts || *ts <= 0) return false;

  std::string raw_text;
  if (j.contains("full_text") && j["full_text"].is_string()) {
    raw_text = j["full_text"].get<std::string>();
  } else if (j.contains("extended_tweet") && j["extended_tweet"].is_object() &&
             j["extended_tweet"].contains("full_text") &&
             j["extended_tweet"]["full_text"].is_string()) {
    raw_text = j["extended_tweet"]["full_text"].get<std::string>();
  } else if (j.contains("text") && j["text"].is_string()) {
    raw_text = j["text"].get<std::string>();
  } else {
    return false;
  }

  out = InteractionRecord{};
  out.platform = Platform::twitter;
  out.topic = topic;
  out.message_id = *id;
  out.author_id = *uid;
  out.created_at = *ts;
  out.text = text::normalize_whitespace(raw_text);
  out.kind = Kind::post;

  if (j.contains("retweeted_status") && j["retweeted_status"].is_object()) {
    out.kind = Kind::retweet;
    const auto& rs = j["retweeted_status"];
    if (rs.contains("user") && rs["user"].is_object()) {
      if (auto tid = impl::json_id(rs["user"], "id_str", "id"))
        out.target_author_id = *tid;
    }
  } else if (j.contains("in_reply_to_user_id_str") &&
             j["in_reply_to_user_id_str"].is_string() &&
             !j["in_reply_to_user_id_str"].get<std::string>().empty()) {
    out.kind = Kind::reply;
    out.target_author_id = j["in_reply_to_user_id_str"].get<std::string>();
  } else if (j.contains("in_reply_to_user_id") &&
             j["in_reply_to_user_id"].is_number()) {
    out.kind = Kind::reply;
    out.target_author_id =
        std::to_string(j["in_reply_to_user_id"].get<int64_t>());
  } else if (opts.quotes_as_retweets && j.contains("quoted_status") &&
             j["quoted_status"].is_object()) {
    out.kind = Kind::retweet;
    const auto& qs = j["quoted_status"];
    if (qs.contains("user") && qs["user"].is_object()) {
      if (auto tid = impl::json_id(qs["user"], "id_str", "id"))
        out.target_author_id = *tid;
    }
  }
  return true;
}

// One line of a Pushshift dump. Comment targets stay unresolved here: the
// parent pointer is preserved and the graph stage resolves it in-corpus.
// message_id carries the fullname prefix (t1_/t3_) so comments and
// submissions never collide and parent pointers match directly.
inline bool parse_pushshift_line(const std::string& line, SourceFormat kind,
                                 const std::string& topic,
                                 InteractionRecord& out) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;

  auto id = impl::json_id(j, "id", "id");
  if (!id) return false;
  if (!j.contains("author") || !j["author"].is_string()) return false;
  if (!j.contains("created_utc")) return false;
  auto ts = impl::epoch_from(j["created_utc"]);
  if (!ts || *ts <= 0) return false;

  out = InteractionRecord{};
  out.platform = Platform::reddit;
  out.topic = topic;
  out.author_id = j["author"].get<std::string>();
  out.created_at = *ts;
  out.ineligible =
      (out.author_id == "[deleted]" || out.author_id == "[removed]");

  if (kind == SourceFormat::pushshift_comments) {
    if (!j.contains("body") || !j["body"].is_string()) return false;
    out.kind = Kind::comment;
    out.message_id = "t1_" + *id;
    out.text = text::normalize_whitespace(j["body"].get<std::string>());
    if (j.contains("parent_id") && j["parent_id"].is_string())
      out.parent_ref = j["parent_id"].get<std::string>();
  } else {
    if (!j.contains("title") || !j["title"].is_string()) return false;
    out.kind = Kind::submission;
    out.message_id = "t3_" + *id;
    std::string raw = j["title"].get<std::string>();
    if (j.contains("selftext") && j["selftext"].is_string()) {
      const std::string st = j["selftext"].get<std::string>();
      if (!st.empty()) raw += "\n" + st;
    }
    out.text = text::normalize_whitespace(raw);
  }
  return true;
}

// Passes iff created_at is inside the window (end exclusive) and the
// normalized text contains at least one phrase.
inline bool passes_filter(const InteractionRecord& r, const KeywordFilter& kf,
                          const TimeWindow& window) {
  return window.contains(r.created_at) && kf.matches(r.text);
}

// Streams one file; filtered records go to the sink in file order.
inline SkipStats ingest_file(
    const std::string& path, SourceFormat format, const std::string& topic,
    const KeywordFilter& kf, const TimeWindow& window,
    const IngestOptions& opts,
    const std::function<void(InteractionRecord&&)>& sink) {
  SkipStats stats;
  io::LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    ++stats.lines;
    InteractionRecord rec;
    bool ok = (format == SourceFormat::twitter)
                  ? parse_twitter_line(line, topic, opts, rec)
                  : parse_pushshift_line(line, format, topic, rec);
    if (!ok) {
      ++stats.malformed;
      continue;
    }
    if (!passes_filter(rec, kf, window)) {
      ++stats.filtered;
      continue;
    }
    ++stats.emitted;
    sink(std::move(rec));
  }
  return stats;
}

// Stable global order + message_id dedup. Sorting by (created_at,
// message_id) first makes the survivor of a duplicate id deterministic
// regardless of file order; SkipStats.duplicates counts the drops.
inline void sort_and_dedup(std::vector<InteractionRecord>& records,
                           SkipStats& stats) {
  std::sort(records.begin(), records.end());
  std::unordered_set<std::string> seen;
  seen.reserve(records.size() * 2);
  std::vector<InteractionRecord> kept;
  kept.reserve(records.size());
  for (auto& r : records) {
    if (seen.insert(r.message_id).second) {
      kept.push_back(std::move(r));
    } else {
      ++stats.duplicates;
      --stats.emitted;
    }
  }
  records = std::move(kept);
}

struct InputSpec {
  std::string path;
  SourceFormat format;
  std::string topic;
};

inline std::vector<InteractionRecord> ingest_inputs(
    const std::vector<InputSpec>& inputs, const KeywordFilter& kf,
    const TimeWindow& window, const IngestOptions& opts, SkipStats& stats) {
  std::vector<InteractionRecord> records;
  for (const auto& in : inputs) {
    stats += ingest_file(in.path, in.format, in.topic, kf, window, opts,
                         [&](InteractionRecord&& r) {
                           records.push_back(std::move(r));
                         });
  }
  sort_and_dedup(records, stats);
  return records;
}

}  // namespace polarlens::ingest
