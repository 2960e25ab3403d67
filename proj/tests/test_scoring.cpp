#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polarlens/scoring.hpp"

using namespace polarlens;
using scoring::Lexicon;
using scoring::UserDocument;

namespace {

UserDocument doc_of(std::vector<std::string> texts) {
  UserDocument d;
  d.user_id = "u";
  for (auto& t : texts) {
    d.total_chars += t.size();
    d.texts.push_back(std::move(t));
  }
  return d;
}

InteractionRecord rec(const std::string& author, const std::string& text,
                      Kind kind = Kind::post, const std::string& target = "",
                      bool ineligible = false) {
  InteractionRecord r;
  static int seq = 0;
  r.message_id = "m" + std::to_string(seq++);
  r.author_id = author;
  r.text = text;
  r.kind = kind;
  r.created_at = 100;
  r.ineligible = ineligible;
  if (!target.empty()) r.target_author_id = target;
  return r;
}

}  // namespace

TEST_CASE("lexicon parsing: scores, defaults, comments", "[scoring]") {
  auto lex = Lexicon::parse({"good 2", "BAD -2", "plain", "# comment",
                             "  spaced  1.5  # trailing", ""});
  CHECK(lex.value("good") == 2.0);
  CHECK(lex.value("bad") == -2.0);
  CHECK(lex.value("plain") == 1.0);
  CHECK(lex.value("spaced") == 1.5);
  CHECK(lex.value("missing") == 0.0);
  CHECK(lex.contains("good"));
  CHECK_FALSE(lex.contains("comment"));
}

TEST_CASE("compound normalization matches hand-computed values", "[scoring]") {
  auto good2 = Lexicon::parse({"good 2"});
  CHECK(scoring::stub_sentiment(doc_of({"good good"}), good2) ==
        Catch::Approx(4.0 / std::sqrt(31.0)).epsilon(1e-12));

  auto bad2 = Lexicon::parse({"bad -2"});
  CHECK(scoring::stub_sentiment(doc_of({"bad"}), bad2) ==
        Catch::Approx(-2.0 / std::sqrt(19.0)).epsilon(1e-12));

  CHECK(scoring::stub_sentiment(doc_of({"nothing matches here"}), good2) ==
        0.0);
  CHECK_THROWS_AS(scoring::stub_sentiment(UserDocument{}, good2),
                  ContractError);
}

TEST_CASE("compound stays inside [-1, 1]", "[scoring]") {
  auto lex = Lexicon::parse({"good 3"});
  std::string many;
  for (int i = 0; i < 500; ++i) many += "good ";
  double c = scoring::stub_sentiment(doc_of({many}), lex);
  CHECK(c > 0.99);
  CHECK(c <= 1.0);
}

TEST_CASE("toxicity stub is the lexicon token fraction", "[scoring]") {
  auto lex = Lexicon::parse({"idiot"});
  CHECK(scoring::stub_fraction(doc_of({"you idiot you"}), lex) ==
        Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(scoring::stub_fraction(doc_of({"all polite words"}), lex) == 0.0);
}

TEST_CASE("pessimism threshold is inclusive at 0.5", "[scoring]") {
  CHECK(scoring::pessimism_label_from_prob(0.7));
  CHECK(scoring::pessimism_label_from_prob(0.5));
  CHECK_FALSE(scoring::pessimism_label_from_prob(0.49));
}

TEST_CASE("chunk scores combine by length weight", "[scoring]") {
  CHECK(scoring::combine_chunk_scores({0.2, 0.6}, {100, 300}) ==
        Catch::Approx(0.5).epsilon(1e-12));
  CHECK(scoring::combine_chunk_scores({0.4}, {50}) == 0.4);
  CHECK_THROWS_AS(scoring::combine_chunk_scores({0.2}, {100, 300}),
                  ContractError);
}

TEST_CASE("chunking respects bounds, whitespace and UTF-8", "[scoring]") {
  auto chunks = scoring::chunk_text("aaa bbb ccc ddd", 7);
  REQUIRE(chunks.size() >= 2);
  std::string rejoined;
  for (size_t i = 0; i < chunks.size(); ++i) {
    if (i) rejoined += " ";
    rejoined += chunks[i];
    CHECK(chunks[i].size() <= 7);
  }
  CHECK(rejoined == "aaa bbb ccc ddd");

  // 2-byte code points; a cut at max_chars=3 would split one
  std::string utf8 = "\xC3\xA9\xC3\xA9\xC3\xA9";  // three é
  auto uc = scoring::chunk_text(utf8, 3);
  for (const auto& c : uc) {
    CHECK(c.size() % 2 == 0);  // never half a sequence
  }
  std::string joined;
  for (const auto& c : uc) joined += c;
  CHECK(joined == utf8);

  CHECK(scoring::chunk_text("", 10).empty());
  CHECK_THROWS_AS(scoring::chunk_text("abc", 0), ContractError);
}

TEST_CASE("authored aggregation dedups exact texts, first wins", "[scoring]") {
  std::vector<InteractionRecord> recs = {
      rec("u1", "fake news"),
      rec("u1", "fake news"),
      rec("u1", "another take"),
      rec("u2", "fake news"),
  };
  auto docs = scoring::aggregate_user_text(recs, Side::authored);
  REQUIRE(docs.count("u1") == 1);
  CHECK(docs.at("u1").texts ==
        std::vector<std::string>{"fake news", "another take"});
  CHECK(docs.at("u2").texts == std::vector<std::string>{"fake news"});

  // dedup idempotence: aggregating the aggregated texts changes nothing
  std::vector<InteractionRecord> again;
  for (const auto& t : docs.at("u1").texts) again.push_back(rec("u1", t));
  auto docs2 = scoring::aggregate_user_text(again, Side::authored);
  CHECK(docs2.at("u1").texts == docs.at("u1").texts);
}

TEST_CASE("received aggregation groups by target", "[scoring]") {
  std::vector<InteractionRecord> recs = {
      rec("x", "a", Kind::reply, "u2"),
      rec("y", "b", Kind::comment, "u2"),
      rec("z", "ignored post", Kind::post, "u2"),   // wrong kind
      rec("w", "c", Kind::reply),                    // no target
      rec("v", "d", Kind::reply, "[deleted]"),       // pseudo-user target
  };
  auto docs = scoring::aggregate_user_text(recs, Side::received);
  REQUIRE(docs.count("u2") == 1);
  CHECK(docs.at("u2").texts == std::vector<std::string>{"a", "b"});
  CHECK(docs.at("u2").side == Side::received);
  CHECK(docs.size() == 1);
}

TEST_CASE("ineligible records contribute to no document", "[scoring]") {
  std::vector<InteractionRecord> recs = {
      rec("[deleted]", "debunk text", Kind::comment, "", true),
  };
  auto docs = scoring::aggregate_user_text(recs, Side::authored);
  CHECK(docs.empty());
}

TEST_CASE("score bounds are validated with the offending user", "[scoring]") {
  scoring::ScoreRecord s;
  s.user_id = "culprit";
  s.toxicity = 0.5;
  s.compound = 0.0;
  s.pessimism_prob = 0.6;
  s.pessimism_label = true;
  s.entropy_bits = 1.0;
  CHECK_NOTHROW(scoring::validate_score_record(s));
  s.toxicity = 1.5;
  CHECK_THROWS_WITH(scoring::validate_score_record(s),
                    Catch::Matchers::ContainsSubstring("culprit"));
  s.toxicity = 0.5;
  s.pessimism_label = false;  // contradicts prob 0.6
  CHECK_THROWS_AS(scoring::validate_score_record(s), ContractError);
}

TEST_CASE("affiliation from class probabilities", "[scoring]") {
  CHECK(scoring::affiliation_from_probs(0.8, 0.1, 0.1) ==
        Affiliation::democratic);
  CHECK(scoring::affiliation_from_probs(0.1, 0.1, 0.8) ==
        Affiliation::republican);
  CHECK(scoring::affiliation_from_probs(0.34, 0.33, 0.33) ==
        Affiliation::unknown);  // margin < 0.1
  CHECK(scoring::affiliation_from_probs(0.2, 0.6, 0.2) ==
        Affiliation::unknown);  // center wins
  CHECK(scoring::affiliation_from_probs(0.55, 0.1, 0.35) ==
        Affiliation::democratic);
}

TEST_CASE("stub scorers are pure", "[scoring]") {
  auto doc = doc_of({"the idiot spreading fake news is hopeless"});
  auto& tox = scoring::default_toxicity_lexicon();
  auto& pess = scoring::default_pessimism_lexicon();
  auto& sent = scoring::default_sentiment_lexicon();
  for (int i = 0; i < 3; ++i) {
    CHECK(scoring::stub_fraction(doc, tox) ==
          scoring::stub_fraction(doc, tox));
    CHECK(scoring::stub_fraction(doc, pess) ==
          scoring::stub_fraction(doc, pess));
    CHECK(scoring::stub_sentiment(doc, sent) ==
          scoring::stub_sentiment(doc, sent));
  }
}
