#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/detail/rng.hpp"
#include "polarlens/detail/special.hpp"
#include "polarlens/detail/time.hpp"
#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/record.hpp"
#include "polarlens/scoring.hpp"

namespace polarlens::synth {

struct UniformMarginal {
  double lo = 0.0;
  double hi = 1.0;
};

// Expected Pearson r after a normal-scale copula correlation is pushed
// through uniform marginals (rank structure survives, linearity does not).
inline double uniform_attenuated_r(double rho) {
  return (6.0 / std::numbers::pi) * std::asin(rho / 2.0);
}

// Bivariate samples with the given uniform marginals and a Gaussian copula
// at normal-scale correlation rho. rho must lie in the open interval (-1, 1).
inline std::vector<std::pair<double, double>> plant_correlation(
    size_t n, UniformMarginal a, UniformMarginal b, double rho, uint64_t seed) {
  if (!(rho > -1.0 && rho < 1.0))
    throw ContractError("plant_correlation: rho must be inside (-1, 1)");
  if (!(a.lo <= a.hi) || !(b.lo <= b.hi))
    throw ContractError("plant_correlation: marginal lo must not exceed hi");
  detail::Rng rng(seed);
  const double mix = std::sqrt(1.0 - rho * rho);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    double u = rng.uniform01_open();
    double z1 = detail::normal_quantile(u);
    double z2 = detail::normal_quantile(rng.uniform01_open());
    double w = rho * z1 + mix * z2;
    out.emplace_back(a.lo + (a.hi - a.lo) * u,
                     b.lo + (b.hi - b.lo) * detail::normal_cdf(w));
  }
  return out;
}

// Two equal-width uniform samples whose population Cliff's delta (first
// argument vs second) equals `delta` exactly; +-1 are realized as disjoint
// ranges, so the sample statistic is exact there too. Values stay in [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> plant_effect(
    size_t n_per_group, double delta, uint64_t seed) {
  if (n_per_group == 0) throw ContractError("plant_effect: empty groups");
  if (!(delta >= -1.0 && delta <= 1.0))
    throw ContractError("plant_effect: delta must lie in [-1, 1]");
  const double width = 0.4;
  // offset of the second range; delta = (width-|off|)^2/width^2 - 1, signed
  double off = delta <= 0.0 ? width * (1.0 - std::sqrt(1.0 + delta))
                            : -width * (1.0 - std::sqrt(1.0 - delta));
  const double x_lo = 0.05 + std::max(0.0, -off);
  const double y_lo = x_lo + off;
  detail::Rng rng(seed);
  std::vector<double> xs(n_per_group), ys(n_per_group);
  for (auto& v : xs) v = x_lo + width * rng.uniform01();
  for (auto& v : ys) v = y_lo + width * rng.uniform01();
  return {std::move(xs), std::move(ys)};
}

struct ReplyCountModel {
  double concentration = 1.0;        // Zipf exponent over core targets
  uint32_t max_replies_per_user = 3; // extra reply fan-out per leaf (twitter)
};

struct CohortSpec {
  Platform platform = Platform::twitter;
  std::string topic = "election";
  Affiliation affiliation = Affiliation::democratic;
  std::string keyword = "fake news"; // must match the ingest filter in use
  size_t n_users = 100;
  double two_core_fraction = 0.3262;
  size_t vocabulary = 32;      // filler token alphabet size
  size_t tokens_per_user = 240;
  UniformMarginal toxicity{0.02, 0.10};
  UniformMarginal pessimism{0.00, 0.12};
  double rho = -0.216;         // toxicity-pessimism copula correlation
  double positive_weight = 0.3187; // compound mixture masses
  double negative_weight = 0.3394;
};

struct SynthConfig {
  std::vector<CohortSpec> cohorts;
  int64_t window_start = 0;
  int64_t window_end = 0;
  ReplyCountModel replies;
  std::optional<uint64_t> seed; // mandatory: generation is always replayable

  void validate() const;
};

struct SynthOutput {
  // file name -> NDJSON lines, in deterministic first-touch order
  std::vector<std::pair<std::string, std::vector<std::string>>> files;
  std::map<std::string, Affiliation> seeds; // label-propagation anchors
  nlohmann::ordered_json ground_truth;
};

namespace impl {

inline std::string slug(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if ((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9')) {
      out += ch;
    } else if (ch >= 'A' && ch <= 'Z') {
      out += static_cast<char>(ch - 'A' + 'a');
    } else {
      out += '_';
    }
  }
  return out;
}

inline size_t keyword_tokens(const std::string& kw) {
  size_t n = 0;
  bool in = false;
  for (char ch : kw) {
    bool ws = ch == ' ' || ch == '\t';
    if (!ws && !in) ++n;
    in = !ws;
  }
  return n;
}

// "Wed Oct 10 20:19:24 +0000 2018" for a UTC epoch; inverse of the legacy
// timestamp parser.
inline std::string format_legacy_timestamp(int64_t epoch) {
  static const char* kDow[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
  static const char* kMon[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                               "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  int64_t days = epoch >= 0 ? epoch / 86400 : (epoch - 86399) / 86400;
  int64_t sec = epoch - days * 86400;
  auto cd = detail::civil_from_days(days);
  int dow = static_cast<int>(((days % 7) + 7 + 4) % 7); // day 0 was a Thursday
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s %s %02u %02d:%02d:%02d +0000 %d",
                kDow[dow], kMon[cd.month - 1], cd.day,
                static_cast<int>(sec / 3600), static_cast<int>((sec / 60) % 60),
                static_cast<int>(sec % 60), cd.year);
  return buf;
}

inline size_t planted_core_size(const CohortSpec& c) {
  return static_cast<size_t>(
      std::llround(c.two_core_fraction * static_cast<double>(c.n_users)));
}

// Sorted snapshots of the built-in lexicons: generation must not depend on
// hash-map iteration order.
inline const std::vector<std::string>& lexicon_words(
    const scoring::Lexicon& lex) {
  static std::map<const scoring::Lexicon*, std::vector<std::string>> cache;
  auto it = cache.find(&lex);
  if (it == cache.end()) {
    std::vector<std::string> w;
    w.reserve(lex.entries.size());
    for (const auto& [word, _] : lex.entries) w.push_back(word);
    std::sort(w.begin(), w.end());
    it = cache.emplace(&lex, std::move(w)).first;
  }
  return it->second;
}

// One document's token stream. Counts are clamped in declaration order so a
// tight budget degrades deterministically instead of overflowing.
inline std::string build_text(detail::Rng& rng, const CohortSpec& spec,
                              double tox, double pess, int sent_sign,
                              size_t sent_count, size_t len) {
  std::vector<std::string> toks;
  toks.reserve(len);
  {
    std::string word;
    for (char ch : spec.keyword + " ") {
      if (ch == ' ' || ch == '\t') {
        if (!word.empty()) toks.push_back(word);
        word.clear();
      } else {
        word += ch;
      }
    }
  }
  auto room = [&] { return len > toks.size() ? len - toks.size() : 0; };
  const auto& tox_words = lexicon_words(scoring::default_toxicity_lexicon());
  const auto& pess_words = lexicon_words(scoring::default_pessimism_lexicon());
  size_t n_tox = std::min<size_t>(
      static_cast<size_t>(std::llround(tox * static_cast<double>(len))),
      room());
  size_t base = rng.below(tox_words.size());
  for (size_t j = 0; j < n_tox; ++j)
    toks.push_back(tox_words[(base + j) % tox_words.size()]);
  size_t n_pess = std::min<size_t>(
      static_cast<size_t>(std::llround(pess * static_cast<double>(len))),
      room());
  base = rng.below(pess_words.size());
  for (size_t j = 0; j < n_pess; ++j)
    toks.push_back(pess_words[(base + j) % pess_words.size()]);
  if (sent_sign != 0) {
    size_t n_sent = std::min<size_t>(sent_count, room());
    for (size_t j = 0; j < n_sent; ++j)
      toks.push_back(sent_sign > 0 ? "good" : "bad");
  }
  size_t n_fill = room();
  for (size_t j = 0; j < n_fill; ++j)
    toks.push_back("w" + std::to_string(rng.below(spec.vocabulary)));
  std::string out;
  for (size_t j = 0; j < toks.size(); ++j) {
    if (j) out += ' ';
    out += toks[j];
  }
  return out;
}

// Cumulative Zipf weights over core indices for reply-target sampling.
inline std::vector<double> reply_weights(size_t core, double concentration) {
  std::vector<double> cum(core);
  double acc = 0.0;
  for (size_t j = 0; j < core; ++j) {
    acc += std::pow(static_cast<double>(j + 1), -concentration);
    cum[j] = acc;
  }
  return cum;
}

inline size_t sample_index(detail::Rng& rng, const std::vector<double>& cum) {
  double x = rng.uniform01() * cum.back();
  return static_cast<size_t>(
      std::lower_bound(cum.begin(), cum.end(), x) - cum.begin());
}

}  // namespace impl

inline void SynthConfig::validate() const {
  if (!seed) throw ConfigError("synth seed is mandatory");
  if (cohorts.empty()) throw ConfigError("synth config needs cohorts");
  if (!(window_start < window_end))
    throw ConfigError("synth window start must precede end");
  if (!(replies.concentration >= 0.0))
    throw ConfigError("reply concentration must be non-negative");
  std::set<std::string> ids;
  for (const auto& c : cohorts) {
    const std::string ident = std::string(to_string(c.platform)) + "/" +
                              c.topic + "/" + to_string(c.affiliation);
    if (!ids.insert(ident).second)
      throw ConfigError("duplicate cohort " + ident);
    if (c.affiliation == Affiliation::unknown)
      throw ConfigError("cohort affiliation must be planted, got unknown");
    if (c.topic.empty()) throw ConfigError("cohort topic must be non-empty");
    if (c.keyword.empty()) throw ConfigError("cohort keyword must be non-empty");
    if (c.n_users < 4)
      throw ConfigError("cohort " + ident + " needs at least 4 users");
    if (!(c.two_core_fraction >= 0.0 && c.two_core_fraction <= 1.0))
      throw ConfigError("two-core fraction must lie in [0, 1]");
    size_t core = impl::planted_core_size(c);
    if (core == 1 || core == 2)
      throw ConfigError("cohort " + ident + ": a 2-core of " +
                        std::to_string(core) +
                        " users cannot exist; grow the cohort or the fraction");
    if (c.vocabulary < 1) throw ConfigError("vocabulary must be at least 1");
    if (!(c.rho > -1.0 && c.rho < 1.0))
      throw ConfigError("rho must lie inside (-1, 1)");
    for (const auto& m : {c.toxicity, c.pessimism}) {
      if (!(m.lo >= 0.0 && m.lo <= m.hi && m.hi <= 1.0))
        throw ConfigError("marginal bounds must satisfy 0 <= lo <= hi <= 1");
    }
    if (!(c.positive_weight >= 0.0 && c.negative_weight >= 0.0 &&
          c.positive_weight + c.negative_weight <= 1.0))
      throw ConfigError("sentiment weights must be non-negative, sum <= 1");
    size_t budget = impl::keyword_tokens(c.keyword) + 8 +
                    static_cast<size_t>(
                        std::ceil(c.toxicity.hi *
                                  static_cast<double>(c.tokens_per_user))) +
                    static_cast<size_t>(
                        std::ceil(c.pessimism.hi *
                                  static_cast<double>(c.tokens_per_user)));
    if (c.tokens_per_user < 16 || budget > c.tokens_per_user)
      throw ConfigError("cohort " + ident +
                        ": token budget too small for the planted marginals");
  }
}

// Raw-format corpus with planted degree structure, score marginals, copula
// correlation, sentiment mixture, and vocabulary entropy. Everything is a
// pure function of the config seed.
inline SynthOutput generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthOutput out;
  auto& gt = out.ground_truth;
  gt["seed"] = *cfg.seed;
  gt["window"] = {{"start", detail::iso_date(cfg.window_start)},
                  {"end", detail::iso_date(cfg.window_end)},
                  {"start_epoch", cfg.window_start},
                  {"end_epoch", cfg.window_end}};
  gt["replies"] = {{"concentration", cfg.replies.concentration},
                   {"max_replies_per_user", cfg.replies.max_replies_per_user}};
  gt["cohorts"] = nlohmann::ordered_json::array();

  auto file_lines = [&](const std::string& name) -> std::vector<std::string>& {
    for (auto& [n, lines] : out.files) {
      if (n == name) return lines;
    }
    out.files.emplace_back(name, std::vector<std::string>{});
    return out.files.back().second;
  };

  const int64_t span = cfg.window_end - cfg.window_start;
  size_t total_users = 0, total_core = 0;

  for (size_t ci = 0; ci < cfg.cohorts.size(); ++ci) {
    const auto& spec = cfg.cohorts[ci];
    detail::Rng rng(detail::derive_seed(*cfg.seed, ci));
    const size_t n = spec.n_users;
    const size_t core = impl::planted_core_size(spec);
    const bool twitter = spec.platform == Platform::twitter;
    const std::string tslug = impl::slug(spec.topic);
    const std::string prefix =
        std::string(twitter ? "t" : "r") + "_" + tslug + "_" +
        (spec.affiliation == Affiliation::democratic ? "d" : "r") + "_";
    auto uid = [&](size_t i) { return prefix + "u" + std::to_string(i); };
    auto post_id = [&](size_t i) { return prefix + (twitter ? "p" : "s") +
                                          std::to_string(i); };

    // per-user planted values
    std::vector<double> tox(n), pess(n);
    std::vector<int> sign(n);
    std::vector<size_t> sent_count(n);
    size_t n_pos = 0, n_neg = 0;
    const double mix = std::sqrt(1.0 - spec.rho * spec.rho);
    for (size_t i = 0; i < n; ++i) {
      double u = rng.uniform01_open();
      double z1 = detail::normal_quantile(u);
      double z2 = detail::normal_quantile(rng.uniform01_open());
      tox[i] = spec.toxicity.lo + (spec.toxicity.hi - spec.toxicity.lo) * u;
      pess[i] = spec.pessimism.lo +
                (spec.pessimism.hi - spec.pessimism.lo) *
                    detail::normal_cdf(spec.rho * z1 + mix * z2);
      double v = rng.uniform01();
      sign[i] = v < spec.positive_weight                        ? 1
                : v < spec.positive_weight + spec.negative_weight ? -1
                                                                  : 0;
      n_pos += sign[i] == 1;
      n_neg += sign[i] == -1;
      sent_count[i] = 3 + rng.below(6); // signed sum 3..8, clear of zero
    }

    auto stamp = [&] {
      return cfg.window_start + static_cast<int64_t>(
                                    rng.below(static_cast<uint64_t>(span)));
    };

    const std::string tw_file = "twitter_" + tslug + ".ndjson";
    const std::string rc_file = "reddit_" + tslug + "_comments.ndjson";
    const std::string rs_file = "reddit_" + tslug + "_submissions.ndjson";

    auto emit_twitter = [&](size_t author, const std::string& mid,
                            const std::string& text, int edge_kind,
                            size_t target) {
      nlohmann::ordered_json j;
      j["created_at"] = impl::format_legacy_timestamp(stamp());
      j["id_str"] = mid;
      j["full_text"] = text;
      j["user"] = {{"id_str", uid(author)}, {"screen_name", uid(author)}};
      if (edge_kind == 1) { // retweet
        nlohmann::ordered_json rs;
        rs["id_str"] = post_id(target);
        rs["user"] = {{"id_str", uid(target)}};
        j["retweeted_status"] = rs;
      } else if (edge_kind == 2) { // reply
        j["in_reply_to_user_id_str"] = uid(target);
        j["in_reply_to_status_id_str"] = post_id(target);
      }
      file_lines(tw_file).push_back(j.dump());
    };

    auto emit_submission = [&](size_t author, const std::string& text) {
      nlohmann::ordered_json j;
      j["id"] = post_id(author);
      j["author"] = uid(author);
      j["created_utc"] = stamp();
      size_t cut = text.find(' ');
      cut = text.find(' ', cut == std::string::npos ? 0 : cut + 1);
      if (cut == std::string::npos) {
        j["title"] = text;
        j["selftext"] = "";
      } else {
        j["title"] = text.substr(0, cut);
        j["selftext"] = text.substr(cut + 1);
      }
      file_lines(rs_file).push_back(j.dump());
    };

    auto emit_comment = [&](size_t author, const std::string& cid,
                            const std::string& text, size_t target) {
      nlohmann::ordered_json j;
      j["id"] = cid;
      j["author"] = uid(author);
      j["created_utc"] = stamp();
      j["body"] = text;
      j["parent_id"] = "t3_" + post_id(target);
      j["link_id"] = "t3_" + post_id(target);
      file_lines(rc_file).push_back(j.dump());
    };

    auto long_text = [&](size_t i) {
      return impl::build_text(rng, spec, tox[i], pess[i], sign[i],
                              sent_count[i], spec.tokens_per_user);
    };
    auto short_text = [&](size_t i) {
      return impl::build_text(rng, spec, tox[i], pess[i], 0, 0, 12);
    };

    // one long post or submission per user
    for (size_t i = 0; i < n; ++i) {
      if (twitter) {
        emit_twitter(i, post_id(i), long_text(i), 0, 0);
      } else {
        emit_submission(i, long_text(i));
      }
    }

    // core ring of triangles: i -> i+1 and i -> i+2 keeps every core node at
    // undirected degree 4, so pruning to the 2-core removes exactly the leaves
    size_t edge_seq = 0;
    auto emit_edge = [&](size_t src, size_t dst, bool as_reply) {
      const std::string id = prefix + (twitter ? (as_reply ? "rp" : "rt") : "c") +
                             std::to_string(edge_seq++);
      if (twitter) {
        emit_twitter(src, id, short_text(src), as_reply ? 2 : 1, dst);
      } else {
        emit_comment(src, id, short_text(src), dst);
      }
    };
    for (size_t i = 0; core >= 3 && i < core; ++i) {
      emit_edge(i, (i + 1) % core, false);
      emit_edge(i, (i + 2) % core, false);
    }

    // leaves: exactly one structural edge each, Zipf-weighted over the core
    std::vector<double> cum =
        impl::reply_weights(std::max<size_t>(core, 1), cfg.replies.concentration);
    // without a core the first user is the star hub and emits no edge itself
    for (size_t p = core >= 3 ? core : 1; p < n; ++p) {
      size_t target = core >= 3 ? impl::sample_index(rng, cum) : 0;
      if (!twitter || core < 3) {
        emit_edge(p, target, false);
        continue;
      }
      emit_edge(p, target, false);
      // reply fan-out rides on top of the retweet graph without touching it
      size_t extra = rng.below(cfg.replies.max_replies_per_user + 1);
      extra = std::min(extra, core);
      std::set<size_t> used;
      for (size_t k = 0; k < extra; ++k) {
        size_t t = impl::sample_index(rng, cum);
        for (size_t tries = 0; used.count(t) && tries < 16; ++tries)
          t = impl::sample_index(rng, cum);
        while (used.count(t)) t = (t + 1) % core;
        used.insert(t);
        emit_edge(p, t, true);
      }
    }

    // label anchors: every 32nd core user keeps propagation short
    nlohmann::ordered_json seed_users = nlohmann::ordered_json::array();
    if (core >= 3) {
      for (size_t i = 0; i < core; i += 32) {
        out.seeds[uid(i)] = spec.affiliation;
        seed_users.push_back(uid(i));
      }
    } else {
      out.seeds[uid(0)] = spec.affiliation;
      seed_users.push_back(uid(0));
    }

    total_users += n;
    total_core += core;

    nlohmann::ordered_json cj;
    cj["platform"] = to_string(spec.platform);
    cj["topic"] = spec.topic;
    cj["affiliation"] = to_string(spec.affiliation);
    cj["user_prefix"] = prefix;
    cj["files"] = twitter ? nlohmann::ordered_json::array({tw_file})
                          : nlohmann::ordered_json::array({rc_file, rs_file});
    cj["keyword"] = spec.keyword;
    cj["n_users"] = n;
    cj["two_core_users"] = core;
    cj["two_core_fraction"] = {
        {"target", spec.two_core_fraction},
        {"planted", static_cast<double>(core) / static_cast<double>(n)}};
    cj["vocabulary"] = spec.vocabulary;
    cj["tokens_per_user"] = spec.tokens_per_user;
    cj["expected_entropy_bits"] = std::log2(static_cast<double>(spec.vocabulary));
    cj["toxicity"] = {{"lo", spec.toxicity.lo}, {"hi", spec.toxicity.hi}};
    cj["pessimism"] = {{"lo", spec.pessimism.lo}, {"hi", spec.pessimism.hi}};
    cj["rho"] = spec.rho;
    cj["expected_pearson_r"] = uniform_attenuated_r(spec.rho);
    cj["positive_weight"] = spec.positive_weight;
    cj["negative_weight"] = spec.negative_weight;
    cj["sentiment_counts"] = {{"positive", n_pos},
                              {"negative", n_neg},
                              {"neutral", n - n_pos - n_neg}};
    cj["seed_users"] = seed_users;
    gt["cohorts"].push_back(std::move(cj));
  }

  gt["totals"] = {
      {"users", total_users},
      {"two_core_users", total_core},
      {"two_core_fraction",
       static_cast<double>(total_core) / static_cast<double>(total_users)}};
  return out;
}

// Default layout: 2 platforms x 3 topics x 2 affiliations, the population
// split evenly, per-cohort vocabularies spread so every cohort owns a
// distinct entropy level.
inline SynthConfig default_config(size_t total_users, uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.window_start = detail::parse_iso_date("2016-01-01");
  cfg.window_end = detail::parse_iso_date("2021-03-01");
  const char* topics[3] = {"election", "vaccines", "climate"};
  size_t idx = 0;
  for (Platform pf : {Platform::twitter, Platform::reddit}) {
    for (const char* topic : topics) {
      for (Affiliation aff :
           {Affiliation::democratic, Affiliation::republican}) {
        CohortSpec c;
        c.platform = pf;
        c.topic = topic;
        c.affiliation = aff;
        c.keyword = pf == Platform::twitter ? "fake news" : "debunking";
        c.n_users = total_users / 12 + (idx < total_users % 12 ? 1 : 0);
        c.vocabulary = 16 + 12 * idx;
        cfg.cohorts.push_back(std::move(c));
        ++idx;
      }
    }
  }
  return cfg;
}

inline void write_corpus(const SynthOutput& out, const std::string& dir) {
  for (const auto& [name, lines] : out.files) {
    std::string body;
    for (const auto& l : lines) {
      body += l;
      body += '\n';
    }
    io::atomic_write(dir + "/" + name, body);
  }
  std::string seeds = "user_id,affiliation\n";
  for (const auto& [u, a] : out.seeds) {
    seeds += io::csv_row({u, to_string(a)}) + "\n";
  }
  io::atomic_write(dir + "/seeds.csv", seeds);
  io::atomic_write(dir + "/ground_truth.json", out.ground_truth.dump(2) + "\n");
}

}  // namespace polarlens::synth
