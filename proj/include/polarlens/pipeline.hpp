#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/config.hpp"
#include "polarlens/detail/rng.hpp"
#include "polarlens/detail/sha256.hpp"
#include "polarlens/entropy.hpp"
#include "polarlens/error.hpp"
#include "polarlens/graph.hpp"
#include "polarlens/ingest.hpp"
#include "polarlens/io.hpp"
#include "polarlens/record.hpp"
#include "polarlens/report.hpp"
#include "polarlens/scorer_client.hpp"
#include "polarlens/scoring.hpp"
#include "polarlens/stats.hpp"
#include "polarlens/synth.hpp"
#include "polarlens/temporal.hpp"
#include "polarlens/version.hpp"

namespace polarlens::pipeline {

namespace impl {

inline std::string sanitize_token(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
    else
      out.push_back('_');
  }
  return out;
}

inline DegreeClass degree_class_from_string(const std::string& s) {
  if (s == "two_core") return DegreeClass::two_core;
  if (s == "one_degree") return DegreeClass::one_degree;
  throw IoError("unknown degree class '" + s + "'");
}

}  // namespace impl

// A cohort is one (platform, topic) slice; its token names every artifact
// belonging to it: <stage>.<token>.<ext>.
struct CohortKey {
  Platform platform = Platform::twitter;
  std::string topic;

  std::string token() const {
    return std::string(to_string(platform)) + "_" + impl::sanitize_token(topic);
  }
  bool operator<(const CohortKey& o) const {
    return std::tie(platform, topic) < std::tie(o.platform, o.topic);
  }
};

inline CohortKey cohort_from_token(const std::string& token) {
  auto us = token.find('_');
  if (us == std::string::npos)
    throw IoError("malformed cohort token '" + token + "'");
  CohortKey key;
  key.platform = platform_from_string(token.substr(0, us));
  key.topic = token.substr(us + 1);
  return key;
}

struct FailureEntry {
  std::string stage;
  std::string user_id;
  std::string message;

  bool operator<(const FailureEntry& o) const {
    return std::tie(stage, user_id, message) <
           std::tie(o.stage, o.user_id, o.message);
  }
};

// Artifact index for one workspace. Deliberately carries no timestamps so
// reruns with identical inputs, config, and seed serialize byte-identically.
struct Manifest {
  struct Artifact {
    std::string sha256;
    uint64_t bytes = 0;
  };

  std::map<std::string, Artifact> artifacts;  // filename -> digest
  std::set<std::string> warnings;
  std::set<FailureEntry> failures;
  std::map<std::string, std::string> scorer_ids;  // metric -> id
  std::string config_sha256;
  uint64_t seed = 0;
  bool svg = false;
  nlohmann::ordered_json report_summary = nlohmann::ordered_json::object();

  std::string top_scorer_id() const {
    for (const auto& [_, id] : scorer_ids)
      if (id != "stub") return "http";
    return "stub";
  }

  std::string status() const { return failures.empty() ? "success" : "partial"; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = std::string("polarlens ") + kVersion;
    j["seed"] = seed;
    j["config_sha256"] = config_sha256;
    j["scorer_id"] = top_scorer_id();
    j["scorers"] = scorer_ids;
    j["svg"] = svg;
    j["status"] = status();
    j["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& [file, a] : artifacts) {
      j["artifacts"].push_back(
          {{"file", file}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    }
    j["warnings"] = warnings;
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : failures) {
      j["failures"].push_back({{"stage", f.stage},
                               {"user_id", f.user_id},
                               {"message", f.message}});
    }
    if (!report_summary.empty()) j["report"] = report_summary;
    return j;
  }

  static Manifest from_json(const nlohmann::json& j) {
    Manifest m;
    m.seed = j.value("seed", uint64_t{0});
    m.config_sha256 = j.value("config_sha256", std::string());
    m.svg = j.value("svg", false);
    if (j.contains("scorers"))
      for (const auto& [k, v] : j.at("scorers").items())
        m.scorer_ids[k] = v.get<std::string>();
    if (j.contains("artifacts"))
      for (const auto& a : j.at("artifacts"))
        m.artifacts[a.at("file").get<std::string>()] = {
            a.at("sha256").get<std::string>(), a.at("bytes").get<uint64_t>()};
    if (j.contains("warnings"))
      for (const auto& w : j.at("warnings"))
        m.warnings.insert(w.get<std::string>());
    if (j.contains("failures"))
      for (const auto& f : j.at("failures"))
        m.failures.insert({f.at("stage").get<std::string>(),
                           f.at("user_id").get<std::string>(),
                           f.at("message").get<std::string>()});
    if (j.contains("report")) m.report_summary = j.at("report");
    return m;
  }
};

// Per-user row of the scores artifact.
struct ScoreRow {
  std::string user_id;
  Affiliation affiliation = Affiliation::unknown;
  DegreeClass degree_class = DegreeClass::one_degree;
  double toxicity = 0.0;
  double compound = 0.0;
  double pessimism_prob = 0.0;
  bool pessimism_label = false;
};

// Runs stages over a shared workspace directory. Every stage reads its
// prerequisites from files and writes its outputs atomically, so each is
// individually re-runnable and a crash never corrupts finished artifacts.
class Runner {
 public:
  Runner(config::RunConfig cfg, std::string workspace)
      : cfg_(std::move(cfg)), ws_(std::move(workspace)) {
    std::filesystem::create_directories(ws_);
    manifest_ = load_manifest();
    manifest_.seed = cfg_.seed;
    manifest_.svg = cfg_.svg;
    manifest_.config_sha256 =
        detail::Sha256::hex(config::config_to_json(cfg_).dump());
  }

  const Manifest& manifest() const { return manifest_; }
  const std::string& workspace() const { return ws_; }

  // --- stages ------------------------------------------------------------

  void synth_stage() {
    if (cfg_.synth_users == 0)
      throw ConfigError("synth stage needs a synth block in the config");
    synth::SynthConfig sc = synth::default_config(cfg_.synth_users, cfg_.seed);
    sc.window_start = cfg_.window.start;
    sc.window_end = cfg_.window.end;
    auto out = synth::generate_corpus(sc);
    const std::string corpus_dir = ws_ + "/corpus";
    synth::write_corpus(out, corpus_dir);

    // index what write_corpus produced
    for (const auto& [name, lines] : out.files) {
      std::string body;
      for (const auto& l : lines) {
        body += l;
        body += '\n';
      }
      note_artifact("corpus/" + name, body);
    }
    note_artifact("corpus/seeds.csv",
                  io::read_file(corpus_dir + "/seeds.csv"));
    note_artifact("corpus/ground_truth.json",
                  io::read_file(corpus_dir + "/ground_truth.json"));

    // the effective input list for the ingest stage; paths stay relative to
    // the workspace so same-seed runs hash identically wherever they land
    nlohmann::ordered_json resolved;
    resolved["seeds_path"] = "corpus/seeds.csv";
    resolved["inputs"] = nlohmann::ordered_json::array();
    std::set<std::string> seen;
    for (const auto& cohort : out.ground_truth.at("cohorts")) {
      const std::string platform = cohort.at("platform").get<std::string>();
      const std::string topic = cohort.at("topic").get<std::string>();
      for (const auto& f : cohort.at("files")) {
        const std::string name = f.get<std::string>();
        if (!seen.insert(name).second) continue;
        std::string format = "twitter";
        if (platform == "reddit")
          format = name.find("_comments") != std::string::npos
                       ? "pushshift_comments"
                       : "pushshift_submissions";
        resolved["inputs"].push_back({{"path", "corpus/" + name},
                                      {"format", format},
                                      {"topic", topic}});
      }
    }
    write_artifact("inputs.resolved.json", resolved.dump(2) + "\n");
    save_manifest();
  }

  void ingest_stage() {
    auto [inputs, seeds_path] = effective_inputs();
    ingest::KeywordFilter kf =
        cfg_.keywords.empty() ? ingest::KeywordFilter::defaults()
                              : ingest::KeywordFilter(cfg_.keywords);
    ingest::IngestOptions opts;
    opts.quotes_as_retweets = cfg_.quotes_as_retweets;

    std::vector<InteractionRecord> records;
    nlohmann::ordered_json per_input = nlohmann::ordered_json::array();
    ingest::SkipStats totals;
    for (const auto& in : inputs) {
      ingest::SkipStats st = ingest::ingest_file(
          locate(in.path), in.format, in.topic, kf, cfg_.window, opts,
          [&](InteractionRecord&& r) { records.push_back(std::move(r)); });
      per_input.push_back({{"path", in.path},
                           {"topic", in.topic},
                           {"lines", st.lines},
                           {"malformed", st.malformed},
                           {"filtered", st.filtered},
                           {"emitted", st.emitted}});
      totals += st;
    }
    ingest::sort_and_dedup(records, totals);
    graph::resolve_comment_targets(records);

    std::map<CohortKey, std::vector<const InteractionRecord*>> by_cohort;
    for (const auto& r : records)
      by_cohort[{r.platform, r.topic}].push_back(&r);

    nlohmann::ordered_json cohorts = nlohmann::ordered_json::array();
    for (const auto& [key, rows] : by_cohort) {
      std::string body;
      for (const auto* r : rows) {
        body += record_to_line(*r);
        body += '\n';
      }
      write_artifact("ingest." + key.token() + ".ndjson", body);
      cohorts.push_back({{"cohort", key.token()},
                         {"platform", to_string(key.platform)},
                         {"topic", key.topic},
                         {"records", rows.size()}});
    }

    nlohmann::ordered_json summary;
    summary["inputs"] = std::move(per_input);
    summary["totals"] = {{"lines", totals.lines},
                         {"malformed", totals.malformed},
                         {"filtered", totals.filtered},
                         {"duplicates", totals.duplicates},
                         {"emitted", totals.emitted}};
    summary["cohorts"] = std::move(cohorts);
    if (!seeds_path.empty()) summary["seeds_path"] = seeds_path;
    write_artifact("ingest.summary.json", summary.dump(2) + "\n");
    save_manifest();
  }

  void graph_stage() {
    auto seeds = load_seeds();
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    for (const auto& token : cohort_tokens()) {
      const CohortKey key = cohort_from_token(token);
      auto records = load_records(token);
      const graph::GraphMode mode = key.platform == Platform::twitter
                                        ? graph::GraphMode::retweet
                                        : graph::GraphMode::reply;
      auto g = graph::build_interaction_graph(records, mode);
      auto core = graph::k_core(g, 2);
      auto one_deg = graph::one_degree_users(g.nodes, core);

      std::map<std::string, Affiliation> affiliations;
      if (!seeds.empty()) {
        // label propagation over the full interaction graph reaches the
        // periphery one round after the core settles
        if (!g.nodes.empty()) affiliations = graph::cluster_partition(g, seeds);
      } else {
        affiliations = classify_without_seeds(records, g.nodes, token);
      }

      auto classes = graph::assign_classes(g.nodes, core, affiliations);
      write_artifact("edges." + token + ".csv", graph::edges_to_csv(g));
      write_artifact("classes." + token + ".csv",
                     graph::classes_to_csv(classes));

      size_t n_dem = 0, n_rep = 0, n_unknown = 0;
      for (const auto& c : classes) {
        if (c.affiliation == Affiliation::democratic) ++n_dem;
        else if (c.affiliation == Affiliation::republican) ++n_rep;
        else ++n_unknown;
      }
      summary[token] = {{"nodes", g.nodes.size()},
                        {"edges", g.edges.size()},
                        {"two_core", core.size()},
                        {"one_degree", one_deg.size()},
                        {"democratic", n_dem},
                        {"republican", n_rep},
                        {"unknown", n_unknown}};
      if (g.nodes.empty())
        warn("graph: cohort " + token + " has no interaction edges");
    }
    write_artifact("graph.summary.json", summary.dump(2) + "\n");
    save_manifest();
  }

  void score_stage() {
    for (const auto& token : cohort_tokens()) {
      auto records = load_records(token);
      auto classes = load_classes(token);
      auto docs = scoring::aggregate_user_text(records, Side::authored);

      std::map<std::string, scoring::UserDocument> scoreable;
      size_t unscored = 0;
      for (const auto& [user, klass] : classes) {
        auto it = docs.find(user);
        if (it == docs.end()) {
          ++unscored;
          continue;
        }
        scoreable.emplace(user, it->second);
      }
      if (unscored > 0)
        warn("score: cohort " + token + ": " + std::to_string(unscored) +
             " graph users have no authored text");

      auto tox = resolve_metric(token, "toxicity", scoreable,
                                cfg_.scorers.toxicity, [](const auto& d) {
                                  return scoring::stub_fraction(
                                      d, scoring::default_toxicity_lexicon());
                                });
      auto pess = resolve_metric(token, "pessimism", scoreable,
                                 cfg_.scorers.pessimism, [](const auto& d) {
                                   return scoring::stub_fraction(
                                       d,
                                       scoring::default_pessimism_lexicon());
                                 });
      auto comp = resolve_metric(token, "sentiment", scoreable,
                                 cfg_.scorers.sentiment, [](const auto& d) {
                                   return scoring::stub_sentiment(
                                       d,
                                       scoring::default_sentiment_lexicon());
                                 });

      std::string body =
          "user_id,affiliation,degree_class,toxicity,compound,"
          "pessimism_prob,pessimism_label\n";
      for (const auto& [user, klass] : classes) {
        auto t = tox.find(user);
        auto p = pess.find(user);
        auto c = comp.find(user);
        if (t == tox.end() || p == pess.end() || c == comp.end()) continue;
        bool label = scoring::pessimism_label_from_prob(p->second);
        body += io::csv_row({user, to_string(klass.second),
                             to_string(klass.first),
                             io::format_double(t->second),
                             io::format_double(c->second),
                             io::format_double(p->second),
                             label ? "true" : "false"}) +
                "\n";
      }
      write_artifact("scores." + token + ".csv", body);
    }
    save_manifest();
  }

  void entropy_stage() {
    for (const auto& token : cohort_tokens()) {
      auto records = load_records(token);
      auto classes = load_classes(token);
      auto docs = scoring::aggregate_user_text(records, Side::authored);

      std::vector<entropy::EntropySample> samples;
      std::map<std::string, double> by_user;
      for (const auto& [user, doc] : docs) {
        if (!classes.count(user)) continue;
        auto s = entropy::shannon_entropy(doc);
        by_user[user] = s.entropy_bits;
        samples.push_back(std::move(s));
      }
      write_artifact("entropy." + token + ".csv",
                     entropy::samples_to_csv(samples));

      nlohmann::ordered_json intervals = nlohmann::ordered_json::object();
      for (Affiliation a :
           {Affiliation::democratic, Affiliation::republican}) {
        std::vector<double> values;
        for (const auto& [user, klass] : classes) {
          if (klass.second != a) continue;
          auto it = by_user.find(user);
          if (it != by_user.end()) values.push_back(it->second);
        }
        nlohmann::ordered_json entry;
        entry["n"] = values.size();
        if (values.empty()) {
          entry["interval"] = nullptr;
          warn("entropy: cohort " + token + ": no " +
               std::string(to_string(a)) + " users to scan");
        } else {
          try {
            entry["interval"] =
                entropy::interval_to_json(entropy::find_minimum_interval(values));
          } catch (const NotFoundError& e) {
            entry["interval"] = nullptr;
            warn("entropy: cohort " + token + " " + to_string(a) + ": " +
                 e.what());
          }
        }
        intervals[to_string(a)] = std::move(entry);
      }
      write_artifact("intervals." + token + ".json",
                     intervals.dump(2) + "\n");
    }
    save_manifest();
  }

  void stats_stage() {
    const auto tokens = cohort_tokens();
    static constexpr const char* kMetrics[] = {"toxicity", "compound",
                                               "pessimism", "entropy"};

    // Bonferroni over every rank comparison planned for this run
    struct CohortData {
      std::map<std::string, std::vector<double>> core, one_deg;
      std::vector<ScoreRow> rows;
      std::map<std::string, double> entropy;
    };
    std::map<std::string, CohortData> data;
    int comparisons = 0;
    for (const auto& token : tokens) {
      CohortData d;
      d.rows = load_scores(token);
      d.entropy = load_entropy(token);
      for (const auto& r : d.rows) {
        auto& side =
            r.degree_class == DegreeClass::two_core ? d.core : d.one_deg;
        side["toxicity"].push_back(r.toxicity);
        side["compound"].push_back(r.compound);
        side["pessimism"].push_back(r.pessimism_prob);
        auto it = d.entropy.find(r.user_id);
        if (it != d.entropy.end()) side["entropy"].push_back(it->second);
      }
      bool comparable = !d.core["toxicity"].empty() &&
                        !d.one_deg["toxicity"].empty();
      if (comparable) comparisons += 4;
      data[token] = std::move(d);
    }
    if (comparisons == 0) comparisons = 1;

    size_t cohort_index = 0;
    for (const auto& token : tokens) {
      auto& d = data[token];
      nlohmann::ordered_json out;
      out["cohort"] = token;
      out["n"] = {{"two_core", d.core["toxicity"].size()},
                  {"one_degree", d.one_deg["toxicity"].size()}};
      out["comparisons"] = comparisons;
      out["tests"] = nlohmann::ordered_json::object();

      for (const char* metric : kMetrics) {
        const auto& a = d.core[metric];
        const auto& b = d.one_deg[metric];
        nlohmann::ordered_json t = nlohmann::ordered_json::object();
        if (a.empty() || b.empty()) {
          warn("stats: cohort " + token + " metric " + metric +
               ": a degree class is empty, tests skipped");
        } else {
          t["mann_whitney"] = stats::test_result_to_json(
              stats::mann_whitney_u(a, b, comparisons));
          t["ks"] = stats::test_result_to_json(stats::ks_two_sample(a, b));
          auto eff = stats::cliffs_delta(a, b);
          t["cliffs_delta"] = {{"delta", eff.cliffs_delta},
                               {"magnitude", eff.magnitude}};
          t["fligner"] =
              stats::test_result_to_json(stats::fligner_killeen({a, b}));
        }
        out["tests"][metric] = std::move(t);
      }

      // multimodality of the sentiment mixture, overall and per affiliation
      out["dip_compound"] = nlohmann::ordered_json::object();
      {
        std::map<std::string, std::vector<double>> groups;
        for (const auto& r : d.rows) {
          groups["all"].push_back(r.compound);
          if (r.affiliation != Affiliation::unknown)
            groups[to_string(r.affiliation)].push_back(r.compound);
        }
        size_t gi = 0;
        for (const auto& [name, values] : groups) {
          if (values.size() < 4) {
            warn("stats: cohort " + token + " dip(" + name +
                 "): fewer than 4 observations");
            ++gi;
            continue;
          }
          uint64_t seed = detail::derive_seed(
              cfg_.seed, 0xd1b0000 + cohort_index * 16 + gi);
          out["dip_compound"][name] = stats::test_result_to_json(
              stats::hartigan_dip(values, 1000, seed));
          ++gi;
        }
      }

      out["pearson_toxicity_pessimism"] = nlohmann::ordered_json::object();
      for (Affiliation a :
           {Affiliation::democratic, Affiliation::republican}) {
        std::vector<double> xs, ys;
        for (const auto& r : d.rows) {
          if (r.affiliation != a) continue;
          xs.push_back(r.toxicity);
          ys.push_back(r.pessimism_prob);
        }
        try {
          auto pr = stats::pearson(xs, ys);
          out["pearson_toxicity_pessimism"][to_string(a)] = {
              {"r", pr.r}, {"p", pr.p}, {"n", pr.n}};
        } catch (const ContractError& e) {
          warn("stats: cohort " + token + " pearson(" + to_string(a) +
               "): " + e.what());
        }
      }

      write_artifact("stats." + token + ".json", out.dump(2) + "\n");
      ++cohort_index;
    }
    save_manifest();
  }

  void temporal_stage() {
    auto scorer = make_doc_scorer();
    for (const auto& token : cohort_tokens()) {
      auto records = load_records(token);
      auto classes = load_classes(token);

      auto daily = temporal::daily_aggregate(records, scorer);
      write_artifact("daily." + token + ".csv", temporal::daily_to_csv(daily));

      temporal::UserClassAssignment uca;
      for (const auto& [user, klass] : classes) {
        if (klass.first == DegreeClass::two_core)
          uca.two_core.insert(user);
        else
          uca.one_degree.insert(user);
      }
      auto segments = temporal::segment_counts(
          records, uca, cfg_.segment_days, cfg_.window.start, cfg_.window.end);
      write_artifact("segments." + token + ".csv",
                     temporal::segments_to_csv(segments));

      std::vector<temporal::EventWindowPoint> events;
      for (int64_t day : cfg_.event_days) {
        try {
          events.push_back(temporal::event_window(daily, day));
        } catch (const NotFoundError&) {
          warn("temporal: cohort " + token + ": no data within 7 days of " +
               detail::iso_date(day * 86400));
        }
      }
      write_artifact("events." + token + ".csv",
                     temporal::events_to_csv(events));

      auto engagement = temporal::reply_engagement_curve(records, scorer);
      write_artifact("engagement." + token + ".csv",
                     temporal::engagement_to_csv(engagement));
      if (engagement.empty())
        warn("temporal: cohort " + token + " has no reply engagement");
    }
    save_manifest();
  }

  void report_stage() {
    std::vector<report::CohortScores> groups;
    for (const auto& token : cohort_tokens()) {
      const CohortKey key = cohort_from_token(token);
      auto rows = load_scores(token);
      auto ent = load_entropy(token);

      for (Affiliation a :
           {Affiliation::democratic, Affiliation::republican}) {
        report::CohortScores g;
        g.platform = key.platform;
        g.topic = key.topic;
        g.affiliation = a;
        for (const auto& r : rows) {
          if (r.affiliation != a) continue;
          auto it = ent.find(r.user_id);
          if (it == ent.end()) continue;
          g.toxicity.push_back(r.toxicity);
          g.pessimism.push_back(r.pessimism_prob);
          g.entropy.push_back(it->second);
        }
        groups.push_back(std::move(g));
      }

      // toxicity vs sentiment density over every scored user in the cohort
      std::vector<double> tox, comp;
      for (const auto& r : rows) {
        tox.push_back(r.toxicity);
        comp.push_back(r.compound);
      }
      if (tox.size() >= 1) {
        auto grid = report::emit_density_grid(tox, comp, 20, 20);
        write_artifact("density." + token + ".json",
                       report::grid_to_json(grid).dump(2) + "\n");
      } else {
        warn("report: cohort " + token + " has no scored users; no density");
      }

      emit_cohort_regression(token, rows);
    }

    auto table = report::emit_bubble_table(groups, cfg_.q);
    for (const auto& w : table.warnings) warn("report: " + w);
    write_artifact("bubbles.all.csv", report::bubbles_to_csv(table));

    auto violins = report::emit_violin_summary(groups);
    write_artifact("violins.all.csv", report::violins_to_csv(violins));

    manifest_.report_summary = nlohmann::ordered_json::object();
    manifest_.report_summary["bubble_rows"] = table.rows.size();
    manifest_.report_summary["min_median_entropy"] = table.min_median_entropy;
    manifest_.report_summary["violin_rows"] = violins.size();
    save_manifest();
  }

  // Lock is the caller's concern: take one io::WorkspaceLock per process
  // invocation around whichever stages run.
  ExitCode run_all() {
    if (cfg_.synth_users > 0) synth_stage();
    ingest_stage();
    graph_stage();
    score_stage();
    entropy_stage();
    stats_stage();
    temporal_stage();
    report_stage();
    return manifest_.failures.empty() ? ExitCode::success : ExitCode::partial;
  }

  // --- shared lookups ----------------------------------------------------

  std::vector<std::string> cohort_tokens() const {
    std::vector<std::string> tokens;
    for (const auto& entry : std::filesystem::directory_iterator(ws_)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("ingest.", 0) != 0) continue;
      if (name.size() <= 7 + 7) continue;
      if (name.substr(name.size() - 7) != ".ndjson") continue;
      tokens.push_back(name.substr(7, name.size() - 7 - 7));
    }
    std::sort(tokens.begin(), tokens.end());
    if (tokens.empty())
      throw ConfigError("no ingested cohorts in workspace " + ws_ +
                        "; run the ingest stage first");
    return tokens;
  }

  std::vector<InteractionRecord> load_records(const std::string& token) const {
    std::vector<InteractionRecord> records;
    for (const auto& line : io::read_lines(ws_ + "/ingest." + token +
                                           ".ndjson")) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw IoError("corrupt record in ingest." + token + ".ndjson");
      records.push_back(record_from_json(j));
    }
    return records;
  }

  // user -> (degree class, affiliation)
  std::map<std::string, std::pair<DegreeClass, Affiliation>> load_classes(
      const std::string& token) const {
    std::map<std::string, std::pair<DegreeClass, Affiliation>> out;
    auto lines = io::read_lines(ws_ + "/classes." + token + ".csv");
    for (size_t i = 0; i < lines.size(); ++i) {
      if (i == 0 && lines[i].rfind("user_id,", 0) == 0) continue;
      if (lines[i].empty()) continue;
      auto f = io::csv_split(lines[i]);
      if (f.size() != 3)
        throw IoError("bad class row: " + lines[i]);
      out[f[0]] = {impl::degree_class_from_string(f[1]),
                   affiliation_from_string(f[2])};
    }
    return out;
  }

  std::vector<ScoreRow> load_scores(const std::string& token) const {
    std::vector<ScoreRow> out;
    auto lines = io::read_lines(ws_ + "/scores." + token + ".csv");
    for (size_t i = 0; i < lines.size(); ++i) {
      if (i == 0 && lines[i].rfind("user_id,", 0) == 0) continue;
      if (lines[i].empty()) continue;
      auto f = io::csv_split(lines[i]);
      if (f.size() != 7) throw IoError("bad score row: " + lines[i]);
      ScoreRow r;
      r.user_id = f[0];
      r.affiliation = affiliation_from_string(f[1]);
      r.degree_class = impl::degree_class_from_string(f[2]);
      r.toxicity = std::stod(f[3]);
      r.compound = std::stod(f[4]);
      r.pessimism_prob = std::stod(f[5]);
      r.pessimism_label = f[6] == "true";
      out.push_back(std::move(r));
    }
    return out;
  }

  std::map<std::string, double> load_entropy(const std::string& token) const {
    std::map<std::string, double> out;
    auto lines = io::read_lines(ws_ + "/entropy." + token + ".csv");
    for (size_t i = 0; i < lines.size(); ++i) {
      if (i == 0 && lines[i].rfind("user_id,", 0) == 0) continue;
      if (lines[i].empty()) continue;
      auto f = io::csv_split(lines[i]);
      if (f.size() != 3) throw IoError("bad entropy row: " + lines[i]);
      out[f[0]] = std::stod(f[1]);
    }
    return out;
  }

 private:
  // inputs come from the config, or from the synth stage's resolution file
  // stored paths may be workspace-relative; open them via the workspace when
  // they exist there, else fall through to the caller's working directory
  std::string locate(const std::string& p) const {
    if (std::filesystem::path(p).is_absolute()) return p;
    const std::string in_ws = ws_ + "/" + p;
    if (std::filesystem::exists(in_ws)) return in_ws;
    return p;
  }

  std::pair<std::vector<ingest::InputSpec>, std::string> effective_inputs()
      const {
    if (!cfg_.inputs.empty()) return {cfg_.inputs, cfg_.seeds_path};
    const std::string path = ws_ + "/inputs.resolved.json";
    if (!std::filesystem::exists(path))
      throw ConfigError(
          "config has no inputs and no generated corpus was found; run the "
          "synth stage first");
    nlohmann::json j = nlohmann::json::parse(io::read_file(path));
    std::vector<ingest::InputSpec> inputs;
    for (const auto& e : j.at("inputs")) {
      inputs.push_back({e.at("path").get<std::string>(),
                        ingest::source_format_from_string(
                            e.at("format").get<std::string>()),
                        e.at("topic").get<std::string>()});
    }
    std::string seeds = cfg_.seeds_path.empty()
                            ? j.value("seeds_path", std::string())
                            : cfg_.seeds_path;
    return {inputs, seeds};
  }

  std::map<std::string, Affiliation> load_seeds() const {
    auto [_, seeds_path] = effective_inputs();
    if (seeds_path.empty()) return {};
    return graph::seeds_from_csv(io::read_lines(locate(seeds_path)));
  }

  // seedless fallback: the configured political endpoint, else the cue-word
  // stub, applied to authored text of every graph member
  std::map<std::string, Affiliation> classify_without_seeds(
      const std::vector<InteractionRecord>& records,
      const std::set<std::string>& nodes, const std::string& token) {
    auto docs = scoring::aggregate_user_text(records, Side::authored);
    std::map<std::string, Affiliation> out;
    if (cfg_.scorers.mode == "http" && cfg_.scorers.affiliation) {
      std::map<std::string, scoring::UserDocument> subset;
      for (const auto& n : nodes) {
        auto it = docs.find(n);
        if (it != docs.end()) subset.emplace(n, it->second);
      }
      std::vector<scoring::FetchFailure> failures;
      out = scoring::classify_affiliations_http(
          subset, *cfg_.scorers.affiliation, score_cache(), failures);
      for (const auto& f : failures)
        fail("graph", f.user_id, "affiliation: " + f.message);
      manifest_.scorer_ids["affiliation"] = cfg_.scorers.affiliation->scorer_id;
      return out;
    }
    for (const auto& n : nodes) {
      auto it = docs.find(n);
      out[n] = it == docs.end() ? Affiliation::unknown
                                : scoring::stub_affiliation(it->second);
    }
    manifest_.scorer_ids["affiliation"] = "stub";
    warn("graph: cohort " + token +
         " has no seed file; affiliations from text classification");
    return out;
  }

  template <typename StubFn>
  std::map<std::string, double> resolve_metric(
      const std::string& token, const std::string& metric,
      const std::map<std::string, scoring::UserDocument>& docs,
      const std::optional<scoring::ScorerEndpoint>& endpoint, StubFn stub) {
    std::map<std::string, double> out;
    if (cfg_.scorers.mode == "http" && endpoint) {
      manifest_.scorer_ids[metric] = endpoint->scorer_id;
      auto res = scoring::fetch_external_scores(docs, *endpoint, score_cache());
      out = std::move(res.scores);
      for (const auto& f : res.failures) {
        fail("score", f.user_id, metric + ": " + f.message);
        if (cfg_.scorers.fallback_to_stub) {
          auto it = docs.find(f.user_id);
          if (it != docs.end()) out[f.user_id] = stub(it->second);
        }
      }
      if (!res.failures.empty() && cfg_.scorers.fallback_to_stub) {
        warn("score: cohort " + token + " " + metric + ": " +
             std::to_string(res.failures.size()) +
             " users fell back to the built-in scorer");
        manifest_.scorer_ids[metric] = "stub";
      }
      return out;
    }
    manifest_.scorer_ids[metric] = "stub";
    for (const auto& [user, doc] : docs) out[user] = stub(doc);
    return out;
  }

  temporal::DocScorer make_doc_scorer() {
    if (cfg_.scorers.mode != "http" ||
        (!cfg_.scorers.toxicity && !cfg_.scorers.pessimism &&
         !cfg_.scorers.sentiment)) {
      return temporal::stub_scorer();
    }
    // per-document endpoint calls through the shared cache; any failure
    // falls back to the built-in scorers for that document
    auto stub = temporal::stub_scorer();
    return [this, stub](const scoring::UserDocument& doc) {
      temporal::TemporalScores s = stub(doc);
      std::map<std::string, scoring::UserDocument> one;
      one.emplace(doc.user_id, doc);
      auto pull = [&](const std::optional<scoring::ScorerEndpoint>& ep,
                      double& slot) {
        if (!ep) return;
        auto res = scoring::fetch_external_scores(one, *ep, score_cache());
        auto it = res.scores.find(doc.user_id);
        if (it != res.scores.end())
          slot = it->second;
        else
          warn("temporal: scorer miss for " + doc.user_id +
               "; built-in value used");
      };
      pull(cfg_.scorers.toxicity, s.toxicity);
      pull(cfg_.scorers.pessimism, s.pessimism);
      pull(cfg_.scorers.sentiment, s.compound);
      return s;
    };
  }

  void emit_cohort_regression(const std::string& token,
                              const std::vector<ScoreRow>& rows) {
    std::map<std::string, Affiliation> affiliation_of;
    for (const auto& r : rows) affiliation_of[r.user_id] = r.affiliation;

    std::vector<temporal::ReplyEngagement> engagement;
    auto lines = io::read_lines(ws_ + "/engagement." + token + ".csv");
    for (size_t i = 0; i < lines.size(); ++i) {
      if (i == 0 && lines[i].rfind("user_id,", 0) == 0) continue;
      if (lines[i].empty()) continue;
      auto f = io::csv_split(lines[i]);
      if (f.size() != 4) throw IoError("bad engagement row: " + lines[i]);
      engagement.push_back({f[0], static_cast<size_t>(std::stoull(f[1])),
                            std::stod(f[2]), std::stod(f[3])});
    }

    std::vector<report::LabeledFit> fits;
    for (Affiliation a : {Affiliation::democratic, Affiliation::republican}) {
      std::vector<temporal::ReplyEngagement> side;
      for (const auto& e : engagement) {
        auto it = affiliation_of.find(e.user_id);
        if (it != affiliation_of.end() && it->second == a)
          side.push_back(e);
      }
      if (side.size() < 3) {
        warn("report: cohort " + token + " " + to_string(a) +
             ": too few engaged users for a fit");
        continue;
      }
      auto [x, y] =
          temporal::engagement_xy(side, cfg_.engagement_pessimism_axis);
      try {
        auto fit = stats::ols_fit(x, y);
        fits.push_back({token + "/" + to_string(a), fit, std::move(x),
                        std::move(y)});
      } catch (const ContractError& e) {
        warn("report: cohort " + token + " " + to_string(a) + ": " + e.what());
      }
    }
    if (fits.empty()) {
      warn("report: cohort " + token + " has no engagement fits");
      return;
    }
    auto rep = report::emit_regression_report(fits, cfg_.svg);
    write_artifact("regression." + token + ".csv", rep.csv);
    if (rep.svg)
      write_artifact("regression." + token + ".svg", *rep.svg);
  }

  scoring::ScoreCache& score_cache() {
    if (!cache_) {
      std::string path = cfg_.scorers.cache_path.empty()
                             ? ws_ + "/score_cache.ndjson"
                             : cfg_.scorers.cache_path;
      cache_ = std::make_unique<scoring::ScoreCache>(path);
    }
    return *cache_;
  }

  // --- manifest plumbing --------------------------------------------------

  Manifest load_manifest() const {
    const std::string path = ws_ + "/manifest.json";
    if (!std::filesystem::exists(path)) return {};
    nlohmann::json j = nlohmann::json::parse(io::read_file(path), nullptr,
                                             false);
    if (j.is_discarded()) return {};
    return Manifest::from_json(j);
  }

  void save_manifest() {
    io::atomic_write(ws_ + "/manifest.json",
                     manifest_.to_json().dump(2) + "\n");
  }

  void note_artifact(const std::string& rel, const std::string& content) {
    manifest_.artifacts[rel] = {detail::Sha256::hex(content), content.size()};
  }

  void write_artifact(const std::string& rel, const std::string& content) {
    io::atomic_write(ws_ + "/" + rel, content);
    note_artifact(rel, content);
  }

  void warn(const std::string& message) { manifest_.warnings.insert(message); }

  void fail(const std::string& stage, const std::string& user,
            const std::string& message) {
    manifest_.failures.insert({stage, user, message});
  }

  config::RunConfig cfg_;
  std::string ws_;
  Manifest manifest_;
  std::unique_ptr<scoring::ScoreCache> cache_;
};

}  // namespace polarlens::pipeline
