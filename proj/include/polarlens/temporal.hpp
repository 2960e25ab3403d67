#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "polarlens/detail/time.hpp"
#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/record.hpp"
#include "polarlens/scoring.hpp"
#include "polarlens/stats.hpp"

namespace polarlens::temporal {

struct DailyPoint {
  int64_t day = 0;  // days since the Unix epoch, UTC
  double mean_toxicity = 0.0;
  double mean_pessimism = 0.0;
  double mean_compound = 0.0;
  size_t user_count = 0;  // users with scoreable text that day, pre-filter

  std::string date() const { return detail::iso_date(day * 86400); }
};

struct EventWindowPoint {
  int64_t event_day = 0;
  double median_toxicity = 0.0;
  double median_pessimism = 0.0;
  size_t covered_days = 0;  // days of the 15 with data

  std::string date() const { return detail::iso_date(event_day * 86400); }
};

struct UserClassAssignment {
  std::set<std::string> two_core;
  std::set<std::string> one_degree;
};

struct SegmentCount {
  int64_t start_day = 0;  // inclusive
  int64_t end_day = 0;    // exclusive
  size_t two_core_active = 0;
  size_t one_degree_active = 0;
};

struct ReplyEngagement {
  std::string user_id;
  size_t replied_times = 0;
  double max_toxicity = 0.0;
  double max_pessimism = 0.0;
};

struct TemporalScores {
  double toxicity = 0.0;
  double pessimism = 0.0;
  double compound = 0.0;
};

using DocScorer = std::function<TemporalScores(const scoring::UserDocument&)>;

inline DocScorer stub_scorer() {
  return [](const scoring::UserDocument& d) {
    return TemporalScores{
        scoring::stub_fraction(d, scoring::default_toxicity_lexicon()),
        scoring::stub_fraction(d, scoring::default_pessimism_lexicon()),
        scoring::stub_sentiment(d, scoring::default_sentiment_lexicon())};
  };
}

inline int64_t epoch_day(int64_t epoch_seconds) {
  return detail::utc_midnight(epoch_seconds) / 86400;
}

namespace impl {

// mean after Tukey fences; samples too small to define quartiles pass
// through unfiltered
inline double fenced_mean(const std::vector<double>& values) {
  if (values.size() < 4) return stats::mean(values);
  return stats::mean(stats::iqr_filter(values));
}

}  // namespace impl

// Per UTC day: aggregate each user's texts, score once per user, drop
// per-metric outliers past the Tukey fences, mean the survivors. Days
// without a scoreable user are omitted.
inline std::vector<DailyPoint> daily_aggregate(
    const std::vector<InteractionRecord>& records, const DocScorer& scorer) {
  if (!scorer) throw ContractError("daily_aggregate: scorer is required");
  std::map<int64_t, std::vector<InteractionRecord>> by_day;
  for (const auto& r : records) by_day[epoch_day(r.created_at)].push_back(r);

  std::vector<DailyPoint> out;
  for (const auto& [day, day_records] : by_day) {
    auto docs = scoring::aggregate_user_text(day_records, Side::authored);
    if (docs.empty()) continue;
    std::vector<double> tox, pess, comp;
    tox.reserve(docs.size());
    pess.reserve(docs.size());
    comp.reserve(docs.size());
    for (const auto& [_, doc] : docs) {
      TemporalScores s = scorer(doc);
      tox.push_back(s.toxicity);
      pess.push_back(s.pessimism);
      comp.push_back(s.compound);
    }
    DailyPoint p;
    p.day = day;
    p.user_count = docs.size();
    p.mean_toxicity = impl::fenced_mean(tox);
    p.mean_pessimism = impl::fenced_mean(pess);
    p.mean_compound = impl::fenced_mean(comp);
    out.push_back(p);
  }
  return out;
}

// Fixed-length segments anchored at the window start; every segment is
// emitted even when empty. A user is active in a segment if they authored
// at least one eligible record inside it.
inline std::vector<SegmentCount> segment_counts(
    const std::vector<InteractionRecord>& records,
    const UserClassAssignment& classes, int segment_days,
    int64_t window_start_epoch, int64_t window_end_epoch) {
  if (segment_days < 1)
    throw ContractError("segment_counts: segment_days must be >= 1");
  if (window_start_epoch >= window_end_epoch)
    throw ContractError("segment_counts: window must be non-empty");

  const int64_t first_day = epoch_day(window_start_epoch);
  const int64_t last_day = epoch_day(window_end_epoch - 1);  // end exclusive
  const int64_t total_days = last_day - first_day + 1;
  const int64_t n_segments = (total_days + segment_days - 1) / segment_days;

  std::vector<SegmentCount> out(static_cast<size_t>(n_segments));
  std::vector<std::unordered_set<std::string>> core_seen(out.size());
  std::vector<std::unordered_set<std::string>> degree_seen(out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].start_day = first_day + static_cast<int64_t>(i) * segment_days;
    out[i].end_day =
        std::min(out[i].start_day + segment_days, last_day + 1);
  }

  for (const auto& r : records) {
    if (r.ineligible) continue;
    if (r.created_at < window_start_epoch || r.created_at >= window_end_epoch)
      continue;
    int64_t day = epoch_day(r.created_at);
    auto idx = static_cast<size_t>((day - first_day) / segment_days);
    if (classes.two_core.count(r.author_id))
      core_seen[idx].insert(r.author_id);
    if (classes.one_degree.count(r.author_id))
      degree_seen[idx].insert(r.author_id);
  }
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].two_core_active = core_seen[i].size();
    out[i].one_degree_active = degree_seen[i].size();
  }
  return out;
}

// Medians of the daily means inside event_day +/- 7; missing days are
// simply absent from the median.
inline EventWindowPoint event_window(const std::vector<DailyPoint>& daily,
                                     int64_t event_day) {
  std::vector<double> tox, pess;
  for (const auto& p : daily) {
    if (p.day >= event_day - 7 && p.day <= event_day + 7) {
      tox.push_back(p.mean_toxicity);
      pess.push_back(p.mean_pessimism);
    }
  }
  if (tox.empty())
    throw NotFoundError("no daily data inside the event window around " +
                        detail::iso_date(event_day * 86400));
  EventWindowPoint ev;
  ev.event_day = event_day;
  ev.median_toxicity = stats::median(tox);
  ev.median_pessimism = stats::median(pess);
  ev.covered_days = tox.size();
  return ev;
}

// Per replied-to user: reply count before dedup and the maximum of the
// per-reply scores. A maximum over an aggregated document is undefined, so
// every reply is scored on its own.
inline std::vector<ReplyEngagement> reply_engagement_curve(
    const std::vector<InteractionRecord>& records, const DocScorer& scorer) {
  if (!scorer)
    throw ContractError("reply_engagement_curve: scorer is required");
  auto received =
      scoring::aggregate_user_text(records, Side::received, /*dedup=*/false);
  std::vector<ReplyEngagement> out;
  out.reserve(received.size());
  for (const auto& [user, doc] : received) {
    ReplyEngagement row;
    row.user_id = user;
    row.replied_times = doc.texts.size();
    for (const auto& reply : doc.texts) {
      scoring::UserDocument one;
      one.user_id = user;
      one.platform = doc.platform;
      one.side = Side::received;
      one.texts = {reply};
      one.total_chars = reply.size();
      TemporalScores s = scorer(one);
      row.max_toxicity = std::max(row.max_toxicity, s.toxicity);
      row.max_pessimism = std::max(row.max_pessimism, s.pessimism);
    }
    out.push_back(std::move(row));
  }
  return out;
}

inline std::string daily_to_csv(const std::vector<DailyPoint>& daily) {
  std::string out =
      "date,mean_toxicity,mean_pessimism,mean_compound,user_count\n";
  for (const auto& p : daily) {
    out += io::csv_row({p.date(), io::format_double(p.mean_toxicity),
                        io::format_double(p.mean_pessimism),
                        io::format_double(p.mean_compound),
                        std::to_string(p.user_count)});
    out += '\n';
  }
  return out;
}

inline std::string events_to_csv(const std::vector<EventWindowPoint>& events) {
  std::string out =
      "event_date,median_toxicity,median_pessimism,covered_days\n";
  for (const auto& e : events) {
    out += io::csv_row({e.date(), io::format_double(e.median_toxicity),
                        io::format_double(e.median_pessimism),
                        std::to_string(e.covered_days)});
    out += '\n';
  }
  return out;
}

inline std::string segments_to_csv(const std::vector<SegmentCount>& segments) {
  std::string out =
      "segment_start,segment_end,two_core_active,one_degree_active\n";
  for (const auto& s : segments) {
    out += io::csv_row({detail::iso_date(s.start_day * 86400),
                        detail::iso_date(s.end_day * 86400),
                        std::to_string(s.two_core_active),
                        std::to_string(s.one_degree_active)});
    out += '\n';
  }
  return out;
}

// Regression inputs from an engagement curve: x is log10 of the reply count
// (counts start at 1, so x >= 0), y the chosen per-user maximum.
inline std::pair<std::vector<double>, std::vector<double>> engagement_xy(
    const std::vector<ReplyEngagement>& rows, bool pessimism_metric) {
  std::vector<double> x, y;
  x.reserve(rows.size());
  y.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.replied_times == 0)
      throw ContractError("engagement_xy: zero reply count for " + r.user_id);
    x.push_back(std::log10(static_cast<double>(r.replied_times)));
    y.push_back(pessimism_metric ? r.max_pessimism : r.max_toxicity);
  }
  return {std::move(x), std::move(y)};
}

inline std::string engagement_to_csv(const std::vector<ReplyEngagement>& rows) {
  std::string out = "user_id,replied_times,max_toxicity,max_pessimism\n";
  for (const auto& r : rows) {
    out += io::csv_row({r.user_id, std::to_string(r.replied_times),
                        io::format_double(r.max_toxicity),
                        io::format_double(r.max_pessimism)});
    out += '\n';
  }
  return out;
}

}  // namespace polarlens::temporal
