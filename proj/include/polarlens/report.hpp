#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/entropy.hpp"
#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/record.hpp"
#include "polarlens/stats.hpp"

namespace polarlens::report {

// Per-cohort score columns, one entry per user, indexes aligned.
struct CohortScores {
  Platform platform = Platform::twitter;
  std::string topic;
  Affiliation affiliation = Affiliation::unknown;
  std::vector<double> toxicity;
  std::vector<double> pessimism;
  std::vector<double> entropy;

  std::string label() const {
    return std::string(to_string(platform)) + "/" + topic + "/" +
           to_string(affiliation);
  }
};

struct BubbleRow {
  Platform platform = Platform::twitter;
  std::string topic;
  Affiliation affiliation = Affiliation::unknown;
  double median_toxicity = 0.0;
  double median_pessimism = 0.0;
  double median_entropy = 0.0;
  double bubble_size = 0.0;
};

struct BubbleTable {
  std::vector<BubbleRow> rows;
  std::vector<std::string> warnings;  // one per omitted empty cohort
  double min_median_entropy = 0.0;    // reference point of the size scale
};

// Cohort medians scaled against the global minimum; the minimum cohort's
// bubble is exactly q because exp2(0) is exact.
inline BubbleTable emit_bubble_table(const std::vector<CohortScores>& cohorts,
                                     double q) {
  if (!(q > 0.0)) throw ContractError("bubble scale q must be positive");
  if (cohorts.empty())
    throw ContractError("emit_bubble_table: no cohorts supplied");
  BubbleTable table;
  for (const auto& c : cohorts) {
    if (c.toxicity.size() != c.entropy.size() ||
        c.pessimism.size() != c.entropy.size())
      throw ContractError("emit_bubble_table: ragged cohort " + c.label());
    if (c.entropy.empty()) {
      table.warnings.push_back("cohort " + c.label() +
                               " is empty; row omitted");
      continue;
    }
    BubbleRow row;
    row.platform = c.platform;
    row.topic = c.topic;
    row.affiliation = c.affiliation;
    row.median_toxicity = stats::median(c.toxicity);
    row.median_pessimism = stats::median(c.pessimism);
    row.median_entropy = stats::median(c.entropy);
    table.rows.push_back(row);
  }
  if (table.rows.empty())
    throw ContractError("emit_bubble_table: every cohort is empty");
  double h_min = table.rows.front().median_entropy;
  for (const auto& r : table.rows) h_min = std::min(h_min, r.median_entropy);
  table.min_median_entropy = h_min;
  entropy::BubbleConfig bc{q, h_min};
  for (auto& r : table.rows) {
    r.bubble_size = entropy::bubble_size(r.median_entropy, bc);
  }
  return table;
}

inline std::string bubbles_to_csv(const BubbleTable& table) {
  std::string out =
      "platform,topic,affiliation,median_toxicity,median_pessimism,"
      "median_entropy,bubble_size\n";
  for (const auto& r : table.rows) {
    out += io::csv_row({to_string(r.platform), r.topic,
                        to_string(r.affiliation),
                        io::format_double(r.median_toxicity),
                        io::format_double(r.median_pessimism),
                        io::format_double(r.median_entropy),
                        io::format_double(r.bubble_size)}) +
           "\n";
  }
  return out;
}

// Normalized 2D histogram over the fixed score domain [0,1] x [-1,1].
struct DensityGrid {
  size_t bins_x = 0;  // toxicity axis
  size_t bins_y = 0;  // compound axis
  std::vector<double> x_edges;  // bins_x + 1 ascending
  std::vector<double> y_edges;  // bins_y + 1 ascending
  std::vector<double> mass;     // row-major: mass[iy * bins_x + ix]
  size_t n = 0;
};

inline DensityGrid emit_density_grid(const std::vector<double>& toxicity,
                                     const std::vector<double>& compound,
                                     size_t bins_x, size_t bins_y) {
  if (toxicity.size() != compound.size())
    throw ContractError("emit_density_grid: value lists must pair up");
  if (toxicity.empty())
    throw ContractError("emit_density_grid: values must be non-empty");
  if (bins_x < 2 || bins_y < 2)
    throw ContractError("emit_density_grid: need at least 2 bins per axis");

  DensityGrid g;
  g.bins_x = bins_x;
  g.bins_y = bins_y;
  g.n = toxicity.size();
  g.x_edges.resize(bins_x + 1);
  g.y_edges.resize(bins_y + 1);
  for (size_t i = 0; i <= bins_x; ++i)
    g.x_edges[i] = static_cast<double>(i) / static_cast<double>(bins_x);
  for (size_t i = 0; i <= bins_y; ++i)
    g.y_edges[i] = -1.0 + 2.0 * static_cast<double>(i) /
                              static_cast<double>(bins_y);
  std::vector<uint64_t> counts(bins_x * bins_y, 0);
  auto cell = [](double v, double lo, double hi, size_t bins) {
    double t = (std::clamp(v, lo, hi) - lo) / (hi - lo);
    size_t i = static_cast<size_t>(t * static_cast<double>(bins));
    return std::min(i, bins - 1);  // top edge belongs to the last cell
  };
  for (size_t k = 0; k < g.n; ++k) {
    size_t ix = cell(toxicity[k], 0.0, 1.0, bins_x);
    size_t iy = cell(compound[k], -1.0, 1.0, bins_y);
    ++counts[iy * bins_x + ix];
  }
  g.mass.resize(counts.size());
  const double n = static_cast<double>(g.n);
  for (size_t i = 0; i < counts.size(); ++i)
    g.mass[i] = static_cast<double>(counts[i]) / n;
  return g;
}

inline nlohmann::ordered_json grid_to_json(const DensityGrid& g) {
  nlohmann::ordered_json j;
  j["n"] = g.n;
  j["bins"] = {{"x", g.bins_x}, {"y", g.bins_y}};
  j["x_edges"] = g.x_edges;
  j["y_edges"] = g.y_edges;
  j["mass"] = g.mass;  // row-major, y rows outer
  return j;
}

struct LabeledFit {
  std::string label;
  stats::RegressionFit fit;
  std::vector<double> x;  // scatter points behind the fit (may be empty)
  std::vector<double> y;
};

struct RegressionReport {
  std::string csv;
  std::optional<std::string> svg;
};

namespace impl {

inline const char* fit_color(size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  return kPalette[i % 6];
}

inline std::string render_regression_svg(const std::vector<LabeledFit>& fits) {
  const double W = 640, H = 440, M = 48;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& f : fits) {
    for (double v : f.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : f.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    if (f.x.empty()) {
      xmin = std::min(xmin, f.fit.x_mean - 1.0);
      xmax = std::max(xmax, f.fit.x_mean + 1.0);
      ymin = std::min(ymin, f.fit.y_mean - 1.0);
      ymax = std::max(ymax, f.fit.y_mean + 1.0);
    }
  }
  if (!(xmax > xmin)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymax > ymin)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  auto sx = [&](double x) {
    return M + (x - xmin) / (xmax - xmin) * (W - 2 * M);
  };
  auto sy = [&](double y) {
    return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M);
  };
  auto num = [](double v) { return io::format_double(v); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) +
       "\" height=\"" + num(H) + "\" viewBox=\"0 0 " + num(W) + " " + num(H) +
       "\">\n";
  s += "<rect x=\"" + num(M) + "\" y=\"" + num(M) + "\" width=\"" +
       num(W - 2 * M) + "\" height=\"" + num(H - 2 * M) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    const std::string color = fit_color(i);
    double fx_lo = f.x.empty() ? xmin : *std::min_element(f.x.begin(), f.x.end());
    double fx_hi = f.x.empty() ? xmax : *std::max_element(f.x.begin(), f.x.end());
    if (!(fx_hi > fx_lo)) {
      fx_lo -= 0.5;
      fx_hi += 0.5;
    }
    // confidence band: upper edge left to right, lower edge back
    const size_t K = 64;
    std::string pts;
    for (size_t k = 0; k <= K; ++k) {
      double x = fx_lo + (fx_hi - fx_lo) * static_cast<double>(k) /
                             static_cast<double>(K);
      pts += num(sx(x)) + "," + num(sy(f.fit.ci_upper(x))) + " ";
    }
    for (size_t k = K + 1; k-- > 0;) {
      double x = fx_lo + (fx_hi - fx_lo) * static_cast<double>(k) /
                             static_cast<double>(K);
      pts += num(sx(x)) + "," + num(sy(f.fit.ci_lower(x)));
      if (k) pts += " ";
    }
    s += "<polygon points=\"" + pts + "\" fill=\"" + color +
         "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    s += "<line x1=\"" + num(sx(fx_lo)) + "\" y1=\"" +
         num(sy(f.fit.predict(fx_lo))) + "\" x2=\"" + num(sx(fx_hi)) +
         "\" y2=\"" + num(sy(f.fit.predict(fx_hi))) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    for (size_t k = 0; k < f.x.size(); ++k) {
      s += "<circle cx=\"" + num(sx(f.x[k])) + "\" cy=\"" + num(sy(f.y[k])) +
           "\" r=\"2.5\" fill=\"" + color + "\" fill-opacity=\"0.75\"/>\n";
    }
    s += "<text x=\"" + num(M + 8) + "\" y=\"" +
         num(M + 18 + 16 * static_cast<double>(i)) + "\" fill=\"" + color +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + f.label +
         "</text>\n";
  }
  s += "<text x=\"" + num(M) + "\" y=\"" + num(H - M + 16) +
       "\" font-family=\"sans-serif\" font-size=\"11\">" + num(xmin) +
       "</text>\n";
  s += "<text x=\"" + num(W - M) + "\" y=\"" + num(H - M + 16) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
       num(xmax) + "</text>\n";
  s += "<text x=\"" + num(M - 4) + "\" y=\"" + num(H - M) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
       num(ymin) + "</text>\n";
  s += "<text x=\"" + num(M - 4) + "\" y=\"" + num(M + 4) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
       num(ymax) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace impl

// Tabular rows per fit; when requested, a scatter with fit lines and 95%
// confidence bands, one color per cohort.
inline RegressionReport emit_regression_report(
    const std::vector<LabeledFit>& fits, bool with_svg) {
  if (fits.empty())
    throw ContractError("emit_regression_report: fits must be non-empty");
  RegressionReport rep;
  rep.csv =
      "cohort,slope,intercept,r_squared,slope_p,slope_ci_low,slope_ci_high,"
      "residual_se,n\n";
  for (const auto& f : fits) {
    if (f.x.size() != f.y.size())
      throw ContractError("emit_regression_report: ragged points for " +
                          f.label);
    rep.csv += io::csv_row({f.label, io::format_double(f.fit.slope),
                            io::format_double(f.fit.intercept),
                            io::format_double(f.fit.r_squared),
                            io::format_double(f.fit.slope_p),
                            io::format_double(f.fit.slope_ci_lower()),
                            io::format_double(f.fit.slope_ci_upper()),
                            io::format_double(f.fit.residual_se),
                            std::to_string(f.fit.n)}) +
               "\n";
  }
  if (with_svg) rep.svg = impl::render_regression_svg(fits);
  return rep;
}

// Quantile five-number summaries, the data behind a violin/box figure.
struct ViolinRow {
  std::string cohort;
  std::string metric;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  size_t n = 0;
};

inline std::vector<ViolinRow> emit_violin_summary(
    const std::vector<CohortScores>& cohorts) {
  std::vector<ViolinRow> out;
  for (const auto& c : cohorts) {
    const std::pair<const char*, const std::vector<double>*> metrics[] = {
        {"toxicity", &c.toxicity},
        {"pessimism", &c.pessimism},
        {"entropy", &c.entropy}};
    for (const auto& [name, values] : metrics) {
      if (values->empty()) continue;
      ViolinRow r;
      r.cohort = c.label();
      r.metric = name;
      r.min = stats::quantile_linear(*values, 0.0);
      r.q1 = stats::quantile_linear(*values, 0.25);
      r.median = stats::quantile_linear(*values, 0.5);
      r.q3 = stats::quantile_linear(*values, 0.75);
      r.max = stats::quantile_linear(*values, 1.0);
      r.n = values->size();
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::string violins_to_csv(const std::vector<ViolinRow>& rows) {
  std::string out = "cohort,metric,min,q1,median,q3,max,n\n";
  for (const auto& r : rows) {
    out += io::csv_row({r.cohort, r.metric, io::format_double(r.min),
                        io::format_double(r.q1), io::format_double(r.median),
                        io::format_double(r.q3), io::format_double(r.max),
                        std::to_string(r.n)}) +
           "\n";
  }
  return out;
}

}  // namespace polarlens::report
