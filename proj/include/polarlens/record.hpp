#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "polarlens/error.hpp"

namespace polarlens {

enum class Platform { twitter, reddit };
enum class Kind { post, retweet, reply, comment, submission };
enum class Affiliation { republican, democratic, unknown };
enum class DegreeClass { two_core, one_degree };
enum class Side { authored, received };

inline const char* to_string(Platform p) {
  return p == Platform::twitter ? "twitter" : "reddit";
}

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::post: return "post";
    case Kind::retweet: return "retweet";
    case Kind::reply: return "reply";
    case Kind::comment: return "comment";
    case Kind::submission: return "submission";
  }
  return "post";
}

inline const char* to_string(Affiliation a) {
  switch (a) {
    case Affiliation::republican: return "republican";
    case Affiliation::democratic: return "democratic";
    case Affiliation::unknown: return "unknown";
  }
  return "unknown";
}

inline const char* to_string(DegreeClass c) {
  return c == DegreeClass::two_core ? "two_core" : "one_degree";
}

inline Platform platform_from_string(const std::string& s) {
  if (s == "twitter") return Platform::twitter;
  if (s == "reddit") return Platform::reddit;
  throw ConfigError("unknown platform '" + s + "'");
}

inline Kind kind_from_string(const std::string& s) {
  if (s == "post") return Kind::post;
  if (s == "retweet") return Kind::retweet;
  if (s == "reply") return Kind::reply;
  if (s == "comment") return Kind::comment;
  if (s == "submission") return Kind::submission;
  throw ConfigError("unknown kind '" + s + "'");
}

inline Affiliation affiliation_from_string(const std::string& s) {
  if (s == "republican") return Affiliation::republican;
  if (s == "democratic") return Affiliation::democratic;
  if (s == "unknown") return Affiliation::unknown;
  throw ConfigError("unknown affiliation '" + s + "'");
}

// One normalized post/retweet/reply/comment/submission.
struct InteractionRecord {
  Platform platform = Platform::twitter;
  std::string topic;
  std::string message_id;
  std::string author_id;
  int64_t created_at = 0;  // UTC epoch seconds
  std::string text;        // whitespace-normalized UTF-8
  Kind kind = Kind::post;
  std::optional<std::string> target_author_id;
  // Raw parent pointer ("t1_..."/"t3_...") for in-corpus resolution of
  // comment targets; absent for records that carry an explicit target.
  std::optional<std::string> parent_ref;
  bool ineligible = false;  // "[deleted]"/"[removed]" author

  std::tuple<int64_t, const std::string&> sort_key() const {
    return {created_at, message_id};
  }
  bool operator<(const InteractionRecord& o) const {
    return sort_key() < o.sort_key();
  }
};

// Keys in fixed order so serialized records are byte-stable.
inline nlohmann::ordered_json record_to_json(const InteractionRecord& r) {
  nlohmann::ordered_json j;
  j["platform"] = to_string(r.platform);
  j["topic"] = r.topic;
  j["message_id"] = r.message_id;
  j["author_id"] = r.author_id;
  j["created_at"] = r.created_at;
  j["text"] = r.text;
  j["kind"] = to_string(r.kind);
  if (r.target_author_id) j["target_author_id"] = *r.target_author_id;
  if (r.parent_ref) j["parent_ref"] = *r.parent_ref;
  if (r.ineligible) j["ineligible"] = true;
  return j;
}

inline std::string record_to_line(const InteractionRecord& r) {
  return record_to_json(r).dump();
}

inline InteractionRecord record_from_json(const nlohmann::json& j) {
  InteractionRecord r;
  r.platform = platform_from_string(j.at("platform").get<std::string>());
  r.topic = j.at("topic").get<std::string>();
  r.message_id = j.at("message_id").get<std::string>();
  r.author_id = j.at("author_id").get<std::string>();
  r.created_at = j.at("created_at").get<int64_t>();
  r.text = j.at("text").get<std::string>();
  r.kind = kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("target_author_id"))
    r.target_author_id = j["target_author_id"].get<std::string>();
  if (j.contains("parent_ref"))
    r.parent_ref = j["parent_ref"].get<std::string>();
  if (j.contains("ineligible")) r.ineligible = j["ineligible"].get<bool>();
  return r;
}

}  // namespace polarlens
