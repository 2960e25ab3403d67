#include <catch2/catch_amalgamated.hpp>

#include "polarlens/text.hpp"

using namespace polarlens;

TEST_CASE("whitespace normalization collapses and trims", "[text]") {
  CHECK(text::normalize_whitespace("  a\t b\nc  ") == "a b c");
  CHECK(text::normalize_whitespace("") == "");
  CHECK(text::normalize_whitespace(" \t\r\n ") == "");
  CHECK(text::normalize_whitespace("plain") == "plain");
  CHECK(text::normalize_whitespace("a\r\nb") == "a b");
}

TEST_CASE("case-insensitive substring match", "[text]") {
  CHECK(text::contains_ci("This is FAKE NEWS", "fake news"));
  CHECK_FALSE(text::contains_ci("fakenews", "fake news"));
  CHECK(text::contains_ci("Debunking the myth", "debunk"));
  CHECK(text::contains_ci("anything", ""));
  CHECK_FALSE(text::contains_ci("ab", "abc"));
}

TEST_CASE("tokenizer lowercases, strips punctuation, drops urls", "[text]") {
  auto t = text::tokenize("You IDIOT, you!");
  REQUIRE(t == std::vector<std::string>{"you", "idiot", "you"});

  t = text::tokenize("check https://example.com/x out");
  REQUIRE(t == std::vector<std::string>{"check", "out"});

  t = text::tokenize("#FactCheck @user (good) don't -");
  REQUIRE(t ==
          std::vector<std::string>{"#factcheck", "@user", "good", "don't"});

  CHECK(text::tokenize("").empty());
  CHECK(text::tokenize("  ...  ").empty());
}

TEST_CASE("tokenizer keeps multi-byte utf-8 intact", "[text]") {
  auto t = text::tokenize("caf\xc3\xa9 time");
  REQUIRE(t.size() == 2);
  CHECK(t[0] == "caf\xc3\xa9");
}
