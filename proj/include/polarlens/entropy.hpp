#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/scoring.hpp"
#include "polarlens/text.hpp"

namespace polarlens::entropy {

struct EntropySample {
  std::string user_id;
  double entropy_bits = 0.0;  // 0 iff the user has one distinct token
  size_t token_count = 0;
};

// Grid interval held in integer tenths; repeated 0.1 float addition would
// drift off the grid.
struct MinimalInterval {
  long long start_tenths = 0;
  long long end_tenths = 0;
  double proportion = 0.0;  // strict-interior fraction, > 0.5 for results

  double start() const { return static_cast<double>(start_tenths) / 10.0; }
  double end() const { return static_cast<double>(end_tenths) / 10.0; }
  double length() const {
    return static_cast<double>(end_tenths - start_tenths) / 10.0;
  }
};

struct BubbleConfig {
  double q = 500.0;
  double global_min_entropy = 0.0;  // min over cohort medians

  void validate() const {
    if (!(q > 0.0)) throw ContractError("bubble scale q must be positive");
  }
};

using Tokenizer = std::function<std::vector<std::string>(const std::string&)>;

inline double entropy_bits(const std::vector<std::string>& tokens) {
  if (tokens.empty())
    throw ContractError("entropy requires at least one token");
  std::unordered_map<std::string, size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  // summed over sorted counts: the result must not depend on hash order
  std::vector<size_t> freq;
  freq.reserve(counts.size());
  for (const auto& [_, c] : counts) freq.push_back(c);
  std::sort(freq.begin(), freq.end());
  const double n = static_cast<double>(tokens.size());
  double h = 0.0;
  for (size_t c : freq) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

inline EntropySample shannon_entropy(const scoring::UserDocument& doc,
                                     const Tokenizer& tokenizer = {}) {
  auto tokens = tokenizer ? tokenizer(doc.combined_text())
                          : text::tokenize(doc.combined_text());
  if (tokens.empty())
    throw ContractError("user has no tokens: " + doc.user_id);
  return {doc.user_id, entropy_bits(tokens), tokens.size()};
}

// Fraction of data strictly between the bounds; both bounds excluded.
inline double compute_prop(const std::vector<double>& data, double lower,
                           double upper) {
  if (data.empty()) throw ContractError("compute_prop: data must be non-empty");
  size_t inside = 0;
  for (double x : data)
    if (x > lower && x < upper) ++inside;
  return static_cast<double>(inside) / static_cast<double>(data.size());
}

namespace impl {

inline long long to_tenths(double v, const char* what) {
  double scaled = v * 10.0;
  long long t = std::llround(scaled);
  if (std::fabs(scaled - static_cast<double>(t)) > 1e-6)
    throw ContractError(std::string(what) + " must be a multiple of 0.1");
  return t;
}

}  // namespace impl

// Slides a window of the given length along the tenths grid from 0 and
// records every window holding a strict majority in its open interior.
// A well-formed but zero-length window has an empty interior.
inline std::vector<MinimalInterval> find_intervals(
    const std::vector<double>& data, double interval_len) {
  long long len_t = impl::to_tenths(interval_len, "interval_len");
  if (len_t < 0) throw ContractError("interval_len must be >= 0");
  std::vector<MinimalInterval> out;
  if (data.empty() || len_t == 0) return out;

  std::vector<double> sorted(data);
  std::sort(sorted.begin(), sorted.end());
  const double maxv = sorted.back();
  // The last start is the grid point at or just below the maximum, so a
  // window can still capture an off-grid maximum in its interior.
  const long long last_start =
      static_cast<long long>(std::floor(maxv * 10.0 + 1e-9));
  const double n = static_cast<double>(sorted.size());

  for (long long s = 0; s <= last_start; ++s) {
    double lo = static_cast<double>(s) / 10.0;
    double hi = static_cast<double>(s + len_t) / 10.0;
    auto first = std::upper_bound(sorted.begin(), sorted.end(), lo);
    auto last = std::lower_bound(first, sorted.end(), hi);
    double prop = static_cast<double>(last - first) / n;
    if (prop > 0.5) out.push_back({s, s + len_t, prop});
  }
  return out;
}

// Shortest grid window holding a strict majority; among windows of that
// length the one with the largest proportion, ties broken by smaller start.
inline MinimalInterval find_minimum_interval(const std::vector<double>& data) {
  if (data.empty())
    throw ContractError("find_minimum_interval: data must be non-empty");
  const double maxv = *std::max_element(data.begin(), data.end());
  const long long cap =
      static_cast<long long>(std::floor(maxv * 10.0 + 1e-9)) + 1;
  for (long long len_t = 0; len_t <= cap; ++len_t) {
    auto candidates =
        find_intervals(data, static_cast<double>(len_t) / 10.0);
    if (candidates.empty()) continue;
    MinimalInterval best = candidates.front();
    for (const auto& c : candidates)
      if (c.proportion > best.proportion) best = c;
    return best;
  }
  throw NotFoundError("no grid interval holds a strict majority of samples");
}

inline double bubble_size(double h, const BubbleConfig& config) {
  config.validate();
  if (h < 0.0) throw ContractError("entropy must be non-negative");
  return config.q * std::exp2(h - config.global_min_entropy);
}

inline double entropy_diff_from_sizes(double size1, double size2) {
  if (!(size1 > 0.0) || !(size2 > 0.0))
    throw ContractError("bubble sizes must be positive");
  return std::log2(size1 / size2);
}

inline std::string samples_to_csv(const std::vector<EntropySample>& samples) {
  std::string out = "user_id,entropy_bits,token_count\n";
  for (const auto& s : samples) {
    out += io::csv_row({s.user_id, io::format_double(s.entropy_bits),
                        std::to_string(s.token_count)});
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json interval_to_json(const MinimalInterval& iv) {
  nlohmann::ordered_json j;
  j["start"] = iv.start();
  j["end"] = iv.end();
  j["length"] = iv.length();
  j["proportion"] = iv.proportion;
  j["user_rate_percent"] = iv.proportion * 100.0;
  return j;
}

}  // namespace polarlens::entropy
