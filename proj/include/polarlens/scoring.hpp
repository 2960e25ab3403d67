#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polarlens/error.hpp"
#include "polarlens/record.hpp"
#include "polarlens/text.hpp"

namespace polarlens::scoring {

// A user's ordered, deduplicated texts for one side of the conversation.
struct UserDocument {
  std::string user_id;
  Platform platform = Platform::twitter;
  Side side = Side::authored;
  std::vector<std::string> texts;  // unique after whitespace normalization
  uint64_t total_chars = 0;

  std::string combined_text() const {
    std::string out;
    out.reserve(total_chars + texts.size());
    for (size_t i = 0; i < texts.size(); ++i) {
      if (i) out.push_back('\n');
      out += texts[i];
    }
    return out;
  }
};

struct ScoreRecord {
  std::string user_id;
  double toxicity = 0.0;        // [0, 1]
  double compound = 0.0;        // [-1, 1]
  double pessimism_prob = 0.0;  // [0, 1]
  bool pessimism_label = false; // prob >= 0.5
  double entropy_bits = 0.0;    // >= 0
};

inline void validate_score_record(const ScoreRecord& s) {
  auto bad = [&](const char* what) {
    throw ContractError(std::string("score bounds violated (") + what +
                        ") for user " + s.user_id);
  };
  if (!(s.toxicity >= 0.0 && s.toxicity <= 1.0)) bad("toxicity");
  if (!(s.compound >= -1.0 && s.compound <= 1.0)) bad("compound");
  if (!(s.pessimism_prob >= 0.0 && s.pessimism_prob <= 1.0)) bad("pessimism");
  if (s.pessimism_label != (s.pessimism_prob >= 0.5)) bad("pessimism label");
  if (!(s.entropy_bits >= 0.0)) bad("entropy");
}

// Groups texts per user. authored: every eligible record by author.
// received: reply/comment records grouped by their target user. Exact
// duplicates after whitespace normalization are dropped, first occurrence
// (in the records' sorted order) wins.
inline std::map<std::string, UserDocument> aggregate_user_text(
    const std::vector<InteractionRecord>& records, Side side,
    bool dedup = true) {
  std::map<std::string, UserDocument> docs;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  for (const auto& r : records) {
    const std::string* user = nullptr;
    if (side == Side::authored) {
      if (r.ineligible) continue;
      user = &r.author_id;
    } else {
      if (r.kind != Kind::reply && r.kind != Kind::comment) continue;
      if (!r.target_author_id) continue;
      if (*r.target_author_id == "[deleted]" ||
          *r.target_author_id == "[removed]")
        continue;
      user = &r.target_author_id.value();
    }
    if (r.text.empty()) continue;
    if (dedup && !seen[*user].insert(r.text).second) continue;
    auto& doc = docs[*user];
    if (doc.texts.empty()) {
      doc.user_id = *user;
      doc.platform = r.platform;
      doc.side = side;
    }
    doc.texts.push_back(r.text);
    doc.total_chars += r.text.size();
  }
  return docs;
}

// Plain-text lexicon: "word score" per line, score defaults to 1,
// '#' starts a comment.
struct Lexicon {
  std::unordered_map<std::string, double> entries;

  static Lexicon parse(const std::vector<std::string>& lines) {
    Lexicon lex;
    for (const auto& raw : lines) {
      std::string line =
          text::normalize_whitespace(raw.substr(0, raw.find('#')));
      if (line.empty()) continue;
      size_t sp = line.find(' ');
      std::string word = text::lower_ascii(
          sp == std::string::npos ? line : line.substr(0, sp));
      double score = 1.0;
      if (sp != std::string::npos) {
        try {
          score = std::stod(line.substr(sp + 1));
        } catch (...) {
          score = 1.0;
        }
      }
      lex.entries[word] = score;
    }
    return lex;
  }

  bool contains(const std::string& token) const {
    return entries.count(token) != 0;
  }
  double value(const std::string& token) const {
    auto it = entries.find(token);
    return it == entries.end() ? 0.0 : it->second;
  }
};

// Built-in lexicons for the deterministic stub scorers.
inline const Lexicon& default_sentiment_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    l.entries = {
        {"good", 1.0},     {"great", 2.0},   {"excellent", 3.0},
        {"love", 3.0},     {"hope", 1.0},    {"happy", 2.0},
        {"win", 1.0},      {"best", 2.0},    {"nice", 1.0},
        {"right", 1.0},    {"true", 1.0},    {"honest", 2.0},
        {"bad", -1.0},     {"terrible", -2.0}, {"hate", -3.0},
        {"wrong", -1.0},   {"sad", -1.0},    {"worst", -2.0},
        {"angry", -2.0},   {"fail", -1.0},   {"disgusting", -3.0},
        {"lie", -2.0},     {"liar", -2.0},   {"fraud", -2.0},
    };
    return l;
  }();
  return lex;
}

inline const Lexicon& default_toxicity_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    for (const char* w :
         {"idiot", "stupid", "moron", "trash", "garbage", "pathetic", "clown",
          "dumb", "loser", "shut", "scum", "troll", "disgrace", "imbecile"}) {
      l.entries[w] = 1.0;
    }
    return l;
  }();
  return lex;
}

inline const Lexicon& default_pessimism_lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    for (const char* w :
         {"hopeless", "doomed", "pointless", "bleak", "despair", "ruined",
          "worthless", "futile", "grim", "dread", "collapse", "nothing"}) {
      l.entries[w] = 1.0;
    }
    return l;
  }();
  return lex;
}

namespace impl {

inline std::vector<std::string> doc_tokens(const UserDocument& doc) {
  std::vector<std::string> all;
  for (const auto& t : doc.texts) {
    auto tk = text::tokenize(t);
    all.insert(all.end(), tk.begin(), tk.end());
  }
  return all;
}

}  // namespace impl

// Signed lexicon sum normalized as s / sqrt(s^2 + 15); the built-in scorer
// for the compound measure.
inline double stub_sentiment(const UserDocument& doc, const Lexicon& lex) {
  if (doc.texts.empty())
    throw ContractError("stub_sentiment: empty document for " + doc.user_id);
  double s = 0.0;
  for (const auto& tok : impl::doc_tokens(doc)) s += lex.value(tok);
  if (s == 0.0) return 0.0;
  return s / std::sqrt(s * s + 15.0);
}

// Fraction of tokens found in the lexicon, clamped to [0,1]; the built-in
// scorer for toxicity and pessimism probabilities.
inline double stub_fraction(const UserDocument& doc, const Lexicon& lex) {
  if (doc.texts.empty())
    throw ContractError("stub_fraction: empty document for " + doc.user_id);
  auto tokens = impl::doc_tokens(doc);
  if (tokens.empty()) return 0.0;
  uint64_t hits = 0;
  for (const auto& tok : tokens) {
    if (lex.contains(tok)) ++hits;
  }
  double frac = static_cast<double>(hits) / static_cast<double>(tokens.size());
  return std::clamp(frac, 0.0, 1.0);
}

inline bool pessimism_label_from_prob(double prob) { return prob >= 0.5; }

// Splits text into chunks of at most max_chars bytes, preferring whitespace
// boundaries and never splitting a UTF-8 sequence.
inline std::vector<std::string> chunk_text(const std::string& s,
                                           size_t max_chars) {
  if (max_chars == 0) throw ContractError("chunk_text: max_chars must be > 0");
  std::vector<std::string> chunks;
  size_t i = 0;
  while (i < s.size()) {
    size_t end = std::min(s.size(), i + max_chars);
    if (end < s.size()) {
      size_t cut = end;
      while (cut > i && !text::is_space(static_cast<unsigned char>(s[cut - 1])))
        --cut;
      if (cut == i) {
        cut = end;  // one giant token: hard cut, but respect UTF-8
        while (cut > i + 1 &&
               (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80)
          --cut;
      }
      end = cut;
    }
    std::string chunk = s.substr(i, end - i);
    // trim the separator we cut at
    while (!chunk.empty() &&
           text::is_space(static_cast<unsigned char>(chunk.back())))
      chunk.pop_back();
    if (!chunk.empty()) chunks.push_back(std::move(chunk));
    i = end;
    while (i < s.size() && text::is_space(static_cast<unsigned char>(s[i])))
      ++i;
  }
  return chunks;
}

// Length-weighted mean of per-chunk probabilities; weights are chunk sizes
// in bytes, preserving the per-character expectation.
inline double combine_chunk_scores(const std::vector<double>& scores,
                                   const std::vector<size_t>& lengths) {
  if (scores.size() != lengths.size() || scores.empty())
    throw ContractError("combine_chunk_scores: mismatched chunking");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    num += scores[i] * static_cast<double>(lengths[i]);
    den += static_cast<double>(lengths[i]);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

// left/center/right probabilities -> affiliation; center wins or a margin
// under 0.1 yields unknown.
inline Affiliation affiliation_from_probs(double left, double center,
                                          double right) {
  double top = std::max({left, center, right});
  if (top == center) return Affiliation::unknown;
  double second = center;
  if (top == left) second = std::max(center, right);
  else second = std::max(center, left);
  if (top - second < 0.1) return Affiliation::unknown;
  return top == left ? Affiliation::democratic : Affiliation::republican;
}

// Stub political classifier over partisan cue words.
inline Affiliation stub_affiliation(const UserDocument& doc) {
  static const std::unordered_set<std::string> left_words = {
      "democrat", "democrats", "liberal", "progressive", "blue"};
  static const std::unordered_set<std::string> right_words = {
      "republican", "republicans", "conservative", "maga", "red"};
  double l = 0, r = 0;
  for (const auto& tok : impl::doc_tokens(doc)) {
    if (left_words.count(tok)) ++l;
    if (right_words.count(tok)) ++r;
  }
  double total = l + r;
  if (total == 0) return Affiliation::unknown;
  return affiliation_from_probs(l / total, 0.0, r / total);
}

}  // namespace polarlens::scoring
