#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace polarlens::text {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline char to_lower_ascii(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

// Collapses whitespace runs to single spaces and trims the ends. UTF-8 bytes
// outside the ASCII range pass through untouched.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower_ascii(static_cast<unsigned char>(c));
  return out;
}

// Case-insensitive (ASCII fold) substring test.
inline bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  if (needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() &&
           to_lower_ascii(static_cast<unsigned char>(haystack[i + j])) ==
               to_lower_ascii(static_cast<unsigned char>(needle[j]))) {
      ++j;
    }
    if (j == needle.size()) return true;
  }
  return false;
}

inline bool is_url_token(std::string_view tok) {
  auto starts = [&](std::string_view p) {
    return tok.size() >= p.size() &&
           lower_ascii(tok.substr(0, p.size())) == p;
  };
  return starts("http://") || starts("https://") || starts("www.");
}

// Tokenizer shared by the lexicon scorers and the entropy measure: lowercase,
// split on whitespace, strip leading/trailing ASCII punctuation, drop URLs.
// '#' and '@' survive as token heads so hashtags and mentions stay distinct.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = i;
    while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      std::string_view raw = s.substr(i, j - i);
      if (!is_url_token(raw)) {
        size_t b = 0, e = raw.size();
        auto strippable = [&](size_t k) {
          unsigned char c = static_cast<unsigned char>(raw[k]);
          if (c >= 0x80) return false;  // keep non-ASCII bytes
          if (std::isalnum(c)) return false;
          if ((c == '#' || c == '@') && k == b) return false;
          return std::ispunct(c) != 0;
        };
        while (b < e && strippable(b)) ++b;
        while (e > b && e - 1 > b && strippable(e - 1)) --e;
        if (e > b && !(e - b == 1 && std::ispunct(
                                         static_cast<unsigned char>(raw[b])))) {
          tokens.push_back(lower_ascii(raw.substr(b, e - b)));
        }
      }
    }
    i = j;
  }
  return tokens;
}

}  // namespace polarlens::text
