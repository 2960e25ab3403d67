#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarlens/detail/rng.hpp"
#include "polarlens/detail/special.hpp"
#include "polarlens/error.hpp"

namespace polarlens::stats {

struct TestResult {
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> p_adjusted;  // present when a correction was applied
  std::vector<size_t> n;
  bool degenerate = false;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

inline nlohmann::ordered_json test_result_to_json(const TestResult& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["statistic"] = r.statistic;
  j["p"] = r.p_value;
  if (r.p_adjusted) j["p_adjusted"] = *r.p_adjusted;
  j["n"] = r.n;
  if (r.degenerate) j["degenerate"] = true;
  j["params"] = r.params;
  return j;
}

inline double bonferroni(double p, int comparisons) {
  if (comparisons < 1)
    throw ContractError("comparisons must be a positive integer");
  return std::min(1.0, p * static_cast<double>(comparisons));
}

// Quantile by linear interpolation on the sorted sample.
inline double quantile_linear(std::vector<double> v, double q) {
  if (v.empty()) throw ContractError("quantile of an empty sample");
  if (q < 0.0 || q > 1.0) throw ContractError("quantile level outside [0,1]");
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = static_cast<size_t>(std::ceil(pos));
  if (lo == hi) return v[lo];
  double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) {
  return quantile_linear(v, 0.5);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw ContractError("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// Ranks 1..N with ties assigned the mean of the positions they occupy.
inline std::vector<double> midranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  size_t n = 0;
};

inline PearsonResult pearson(const std::vector<double>& x,
                             const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ContractError("pearson: samples must have equal length");
  const size_t n = x.size();
  if (n < 3) throw ContractError("pearson: need at least 3 pairs");
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ContractError("pearson: correlation undefined for zero variance");
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  double df = static_cast<double>(n - 2);
  double p;
  if (1.0 - r * r <= 0.0) {
    p = detail::floor_p(0.0);
  } else {
    double t = r * std::sqrt(df / (1.0 - r * r));
    p = std::min(1.0, 2.0 * detail::t_sf(std::fabs(t), df));
    p = detail::floor_p(p);
  }
  return {r, p, n};
}

enum class Alternative { two_sided, less, greater };
enum class MwuMethod { automatic, exact, asymptotic };

namespace impl {

// Exact distribution of the smaller sample's U by enumerating every subset
// of that size over the pooled mid-ranks. Caller guarantees the subset count
// is bounded.
struct ExactTails {
  double p_le = 1.0;  // P(U_small <= u_obs)
  double p_ge = 1.0;  // P(U_small >= u_obs)
};

inline ExactTails mwu_exact_tails(const std::vector<double>& pooled_ranks,
                                  size_t k, double u_obs) {
  const size_t nn = pooled_ranks.size();
  uint64_t total = 0, le = 0, ge = 0;
  const double base = static_cast<double>(k) * static_cast<double>(k + 1) / 2.0;
  std::vector<size_t> c(k);
  std::iota(c.begin(), c.end(), size_t{0});
  while (true) {
    double rsum = 0.0;
    for (size_t idx : c) rsum += pooled_ranks[idx];
    double u = rsum - base;
    ++total;
    if (u <= u_obs + 1e-9) ++le;
    if (u >= u_obs - 1e-9) ++ge;
    // next combination in lexicographic order
    size_t i = k;
    while (i > 0 && c[i - 1] == nn - k + (i - 1)) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return {static_cast<double>(le) / static_cast<double>(total),
          static_cast<double>(ge) / static_cast<double>(total)};
}

inline uint64_t binom_capped(uint64_t n, uint64_t k, uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  uint64_t r = 1;
  for (uint64_t i = 1; i <= k; ++i) {
    // r fits: intermediate product is bounded by cap * n
    r = r * (n - k + i) / i;
    if (r > cap) return cap + 1;
  }
  return r;
}

}  // namespace impl

// U statistic for x with mid-rank ties. Exact enumeration when the smaller
// sample has at most 8 elements and the subset count stays enumerable;
// otherwise the normal approximation with tie and continuity corrections.
inline TestResult mann_whitney_u(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 int comparisons = 1,
                                 Alternative alt = Alternative::two_sided,
                                 MwuMethod method = MwuMethod::automatic) {
  if (x.empty() || y.empty())
    throw ContractError("mann_whitney_u: both samples must be non-empty");
  if (comparisons < 1)
    throw ContractError("comparisons must be a positive integer");
  const size_t n = x.size(), m = y.size(), nn = n + m;
  std::vector<double> pooled;
  pooled.reserve(nn);
  pooled.insert(pooled.end(), x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  auto ranks = midranks(pooled);
  double rx = 0.0;
  for (size_t i = 0; i < n; ++i) rx += ranks[i];
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  const double u_x = rx - static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;

  const size_t k = std::min(n, m);
  const bool enumerable =
      k <= 8 && impl::binom_capped(nn, k, 2'000'000) <= 2'000'000;
  if (method == MwuMethod::exact && !enumerable)
    throw ContractError("mann_whitney_u: exact method not enumerable here");
  const bool exact =
      method == MwuMethod::exact ||
      (method == MwuMethod::automatic && enumerable);

  double p_le_x, p_ge_x;
  std::string method_variant;
  if (exact) {
    method_variant = "exact";
    double u_small = (n <= m) ? u_x : nm - u_x;
    auto tails = impl::mwu_exact_tails(ranks, k, u_small);
    if (n <= m) {
      p_le_x = tails.p_le;
      p_ge_x = tails.p_ge;
    } else {
      // U_x = nm - U_small reverses the tails
      p_le_x = tails.p_ge;
      p_ge_x = tails.p_le;
    }
  } else {
    method_variant = "asymptotic";
    // tie-corrected variance over pooled tie group sizes
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    size_t i = 0;
    while (i < nn) {
      size_t j = i;
      while (j + 1 < nn && sorted[j + 1] == sorted[i]) ++j;
      double t = static_cast<double>(j - i + 1);
      tie_sum += t * t * t - t;
      i = j + 1;
    }
    const double dn = static_cast<double>(nn);
    double sigma2 = nm / 12.0 * ((dn + 1.0) - tie_sum / (dn * (dn - 1.0)));
    if (sigma2 <= 0.0) {
      p_le_x = p_ge_x = 1.0;  // every pooled value identical
    } else {
      double sigma = std::sqrt(sigma2);
      double mu = nm / 2.0;
      auto z_of = [&](double u, double shift) { return (u - mu + shift) / sigma; };
      p_ge_x = std::min(1.0, detail::normal_cdf(-z_of(u_x, -0.5)));
      p_le_x = std::min(1.0, detail::normal_cdf(z_of(u_x, 0.5)));
    }
  }

  double p;
  switch (alt) {
    case Alternative::less: p = p_le_x; break;
    case Alternative::greater: p = p_ge_x; break;
    default: p = std::min(1.0, 2.0 * std::min(p_le_x, p_ge_x)); break;
  }
  p = detail::floor_p(std::min(1.0, p));

  TestResult r;
  r.method = "mann_whitney_u";
  r.statistic = u_x;
  r.p_value = p;
  r.p_adjusted = bonferroni(p, comparisons);
  r.n = {n, m};
  r.params["variant"] = method_variant;
  r.params["comparisons"] = comparisons;
  return r;
}

inline TestResult ks_two_sample(const std::vector<double>& x,
                                const std::vector<double>& y) {
  if (x.empty() || y.empty())
    throw ContractError("ks_two_sample: both samples must be non-empty");
  std::vector<double> xs(x), ys(y);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const size_t n = xs.size(), m = ys.size();
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    double d1 = xs[i], d2 = ys[j];
    if (d1 <= d2)
      while (i < n && xs[i] == d1) ++i;
    if (d2 <= d1)
      while (j < m && ys[j] == d2) ++j;
    double diff = std::fabs(static_cast<double>(i) / static_cast<double>(n) -
                            static_cast<double>(j) / static_cast<double>(m));
    d = std::max(d, diff);
  }
  double ne = static_cast<double>(n) * static_cast<double>(m) /
              static_cast<double>(n + m);
  double p = detail::floor_p(detail::kolmogorov_q(std::sqrt(ne) * d));

  TestResult r;
  r.method = "ks_two_sample";
  r.statistic = d;
  r.p_value = std::min(1.0, p);
  r.n = {n, m};
  r.params["effective_n"] = ne;
  return r;
}

// Rank-based scale test: normal scores of the pooled mid-ranks of centered
// absolute deviations, chi-squared with (#groups - 1) degrees of freedom.
inline TestResult fligner_killeen(
    const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2)
    throw ContractError("fligner_killeen: need at least 2 groups");
  for (const auto& g : groups)
    if (g.size() < 2)
      throw ContractError("fligner_killeen: every group needs >= 2 elements");

  std::vector<double> devs;
  std::vector<size_t> sizes;
  for (const auto& g : groups) {
    double med = median(g);
    for (double v : g) devs.push_back(std::fabs(v - med));
    sizes.push_back(g.size());
  }
  const size_t nn = devs.size();
  const auto [dmin, dmax] = std::minmax_element(devs.begin(), devs.end());
  const bool all_tied = (*dmin == *dmax);
  auto ranks = midranks(devs);
  std::vector<double> a(nn);
  for (size_t i = 0; i < nn; ++i)
    a[i] = detail::normal_quantile(0.5 + ranks[i] /
                                             (2.0 * (static_cast<double>(nn) + 1.0)));
  double grand = mean(a);
  double v = 0.0;
  for (double ai : a) v += (ai - grand) * (ai - grand);
  v /= static_cast<double>(nn - 1);

  TestResult r;
  r.method = "fligner_killeen";
  r.n = sizes;
  // tied deviations checked directly: summing identical scores still leaves
  // rounding noise in v, so a float threshold alone misclassifies
  if (all_tied || v <= 1e-300) {
    r.degenerate = true;
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.params["note"] = "all absolute deviations tied";
    return r;
  }
  double stat = 0.0;
  size_t offset = 0;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    double gm = 0.0;
    for (size_t i = 0; i < sizes[gi]; ++i) gm += a[offset + i];
    gm /= static_cast<double>(sizes[gi]);
    stat += static_cast<double>(sizes[gi]) * (gm - grand) * (gm - grand);
    offset += sizes[gi];
  }
  stat /= v;
  r.statistic = stat;
  r.p_value = detail::floor_p(
      detail::chi2_sf(stat, static_cast<double>(groups.size() - 1)));
  return r;
}

// ---------------------------------------------------------------------------
// Hartigan's dip statistic: greatest-convex-minorant / least-concave-majorant
// construction on the ECDF. Deviations are tracked in count units and the
// statistic is the final maximum over modal-interval iterations, divided by
// 2n. Indices are 0-based throughout.

struct DipWorkspace {
  std::vector<int> mn, mj, gcm, lcm;
  std::vector<double> boot;
};

inline double dip_statistic_sorted(const std::vector<double>& x,
                                   DipWorkspace& ws) {
  const int n = static_cast<int>(x.size());
  if (n < 2 || x[0] == x[n - 1]) return 0.0;
  ws.mn.assign(n, 0);
  ws.mj.assign(n, 0);
  ws.gcm.assign(n + 1, 0);
  ws.lcm.assign(n + 1, 0);
  auto& mn = ws.mn;
  auto& mj = ws.mj;
  auto& gcm = ws.gcm;
  auto& lcm = ws.lcm;

  int low = 0, high = n - 1;
  double dip = 1.0;  // count units; the returned statistic is dip / (2n)

  while (true) {
    mn[low] = low;
    for (int j = low + 1; j <= high; ++j) {
      mn[j] = j - 1;
      while (true) {
        int mnj = mn[j];
        int mnmnj = mn[mnj];
        if (mnj == low ||
            (x[j] - x[mnj]) * static_cast<double>(mnj - mnmnj) <
                (x[mnj] - x[mnmnj]) * static_cast<double>(j - mnj))
          break;
        mn[j] = mnmnj;
      }
    }
    mj[high] = high;
    for (int k = high - 1; k >= low; --k) {
      mj[k] = k + 1;
      while (true) {
        int mjk = mj[k];
        int mjmjk = mj[mjk];
        if (mjk == high ||
            (x[k] - x[mjk]) * static_cast<double>(mjk - mjmjk) <
                (x[mjk] - x[mjmjk]) * static_cast<double>(k - mjk))
          break;
        mj[k] = mjmjk;
      }
    }

    gcm[0] = high;
    int i = 0;
    while (gcm[i] > low) {
      gcm[i + 1] = mn[gcm[i]];
      ++i;
    }
    int ig = i;
    const int l_gcm = i;
    int ix = ig - 1;

    lcm[0] = low;
    i = 0;
    while (lcm[i] < high) {
      lcm[i + 1] = mj[lcm[i]];
      ++i;
    }
    int ih = i;
    const int l_lcm = i;
    int iv = 1;

    double d = 0.0;
    if (l_gcm != 1 || l_lcm != 1) {
      while (true) {
        int gcmix = gcm[ix];
        int lcmiv = lcm[iv];
        if (gcmix > lcmiv) {
          int gcmi1 = gcm[ix + 1];
          double dx;
          if (x[gcmix] != x[gcmi1])
            dx = static_cast<double>(lcmiv - gcmi1 + 1) -
                 (x[lcmiv] - x[gcmi1]) * static_cast<double>(gcmix - gcmi1) /
                     (x[gcmix] - x[gcmi1]);
          else
            dx = static_cast<double>(lcmiv - gcmi1 + 1) -
                 static_cast<double>(gcmix - gcmi1);
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          int lcmiv1 = lcm[iv - 1];
          double dx;
          if (x[lcmiv] != x[lcmiv1])
            dx = (x[gcmix] - x[lcmiv1]) * static_cast<double>(lcmiv - lcmiv1) /
                     (x[lcmiv] - x[lcmiv1]) -
                 static_cast<double>(gcmix - lcmiv1 - 1);
          else
            dx = static_cast<double>(lcmiv - lcmiv1) -
                 static_cast<double>(gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 0) ix = 0;
        if (iv > l_lcm) iv = l_lcm;
        if (gcm[ix] == lcm[iv]) break;
      }
    } else {
      d = 1.0;
    }
    if (d < dip) break;

    // ECDF deviation above the minorant left of the modal interval
    double dip_l = 0.0;
    for (int jj = ig; jj < l_gcm; ++jj) {
      double max_t = 1.0;
      int j_ = gcm[jj];
      int jb = gcm[jj + 1];
      if (j_ - jb > 1 && x[j_] != x[jb]) {
        double c = static_cast<double>(j_ - jb) / (x[j_] - x[jb]);
        for (int jr = jb; jr <= j_; ++jr) {
          double tt = static_cast<double>(jr - jb + 1) - (x[jr] - x[jb]) * c;
          if (max_t < tt) max_t = tt;
        }
      }
      if (dip_l < max_t) dip_l = max_t;
    }
    // ECDF deviation below the majorant right of the modal interval
    double dip_u = 0.0;
    for (int jj = ih; jj < l_lcm; ++jj) {
      double max_t = 1.0;
      int jb = lcm[jj];
      int j_ = lcm[jj + 1];
      if (j_ - jb > 1 && x[j_] != x[jb]) {
        double c = static_cast<double>(j_ - jb) / (x[j_] - x[jb]);
        for (int jr = jb; jr <= j_; ++jr) {
          double tt = (x[jr] - x[jb]) * c - static_cast<double>(jr - jb - 1);
          if (max_t < tt) max_t = tt;
        }
      }
      if (dip_u < max_t) dip_u = max_t;
    }
    double dipnew = std::max(dip_l, dip_u);
    if (dip < dipnew) dip = dipnew;
    if (low == gcm[ig] && high == lcm[ih]) break;
    low = gcm[ig];
    high = lcm[ih];
  }
  return dip / (2.0 * static_cast<double>(n));
}

inline double dip_statistic(std::vector<double> x) {
  if (x.size() < 2)
    throw ContractError("dip statistic requires at least 2 observations");
  std::sort(x.begin(), x.end());
  DipWorkspace ws;
  return dip_statistic_sorted(x, ws);
}

// Monte Carlo p against uniform null samples of the same size; replicate b
// draws from a seed derived as (seed, b+1) so any evaluation order gives the
// same answer.
inline TestResult hartigan_dip(const std::vector<double>& x, int n_boot,
                               uint64_t seed) {
  if (x.size() < 4)
    throw ContractError("dip test requires at least 4 observations");
  if (n_boot < 1000) throw ContractError("dip test requires n_boot >= 1000");
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  DipWorkspace ws;
  const double dip_obs = dip_statistic_sorted(sorted, ws);

  const size_t n = x.size();
  ws.boot.resize(n);
  std::vector<double> boot(n);
  size_t exceed = 0;
  for (int b = 0; b < n_boot; ++b) {
    detail::Rng rng(detail::derive_seed(seed, static_cast<uint64_t>(b) + 1));
    for (size_t i = 0; i < n; ++i) boot[i] = rng.uniform01();
    std::sort(boot.begin(), boot.end());
    if (dip_statistic_sorted(boot, ws) >= dip_obs) ++exceed;
  }
  double p = static_cast<double>(1 + exceed) / static_cast<double>(n_boot + 1);

  TestResult r;
  r.method = "hartigan_dip";
  r.statistic = dip_obs;
  r.p_value = p;
  r.n = {n};
  r.params["n_boot"] = n_boot;
  r.params["seed"] = seed;
  return r;
}

struct EffectSize {
  double cliffs_delta = 0.0;
  std::string magnitude;  // negligible / small / medium / large
};

inline std::string delta_magnitude(double delta) {
  double a = std::fabs(delta);
  if (a < 0.147) return "negligible";
  if (a < 0.33) return "small";
  if (a < 0.474) return "medium";
  return "large";
}

inline EffectSize cliffs_delta(const std::vector<double>& x,
                               const std::vector<double>& y) {
  if (x.empty() || y.empty())
    throw ContractError("cliffs_delta: both samples must be non-empty");
  std::vector<double> ys(y);
  std::sort(ys.begin(), ys.end());
  long long net = 0;
  for (double xi : x) {
    auto lo = std::lower_bound(ys.begin(), ys.end(), xi);
    auto hi = std::upper_bound(lo, ys.end(), xi);
    long long less = lo - ys.begin();                 // y_j < x_i
    long long greater = ys.end() - hi;                // y_j > x_i
    net += less - greater;
  }
  double delta = static_cast<double>(net) /
                 (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  return {delta, delta_magnitude(delta)};
}

// Least-squares fit stored around the sample means so the prediction at
// x_mean is y_mean exactly; the band is the 95% CI of the conditional mean.
struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual_se = 0.0;
  double x_mean = 0.0;
  double y_mean = 0.0;
  double sxx = 0.0;
  double t_crit = 0.0;  // two-sided 95%, n-2 degrees of freedom
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double slope_p = 1.0;
  size_t n = 0;

  double predict(double x0) const { return y_mean + slope * (x0 - x_mean); }
  double band_half_width(double x0) const {
    double dx = x0 - x_mean;
    return t_crit * residual_se *
           std::sqrt(1.0 / static_cast<double>(n) + dx * dx / sxx);
  }
  double ci_lower(double x0) const { return predict(x0) - band_half_width(x0); }
  double ci_upper(double x0) const { return predict(x0) + band_half_width(x0); }
  double slope_ci_lower() const { return slope - t_crit * slope_stderr; }
  double slope_ci_upper() const { return slope + t_crit * slope_stderr; }
};

inline RegressionFit ols_fit(const std::vector<double>& x,
                             const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ContractError("ols_fit: samples must have equal length");
  const size_t n = x.size();
  if (n < 3) throw ContractError("ols_fit: need at least 3 points");
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ContractError("ols_fit: zero variance in x");

  RegressionFit fit;
  fit.n = n;
  fit.x_mean = mx;
  fit.y_mean = my;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;

  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double e = y[i] - fit.predict(x[i]);
    ss_res += e * e;
  }
  fit.r_squared = (syy == 0.0) ? 0.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  double df = static_cast<double>(n - 2);
  fit.residual_se = std::sqrt(std::max(ss_res, 0.0) / df);
  fit.t_crit = detail::t_quantile(0.975, df);
  fit.slope_stderr = fit.residual_se / std::sqrt(sxx);
  fit.intercept_stderr =
      fit.residual_se *
      std::sqrt(1.0 / static_cast<double>(n) + mx * mx / sxx);
  if (fit.slope_stderr > 0.0) {
    double t = fit.slope / fit.slope_stderr;
    fit.slope_p = detail::floor_p(
        std::min(1.0, 2.0 * detail::t_sf(std::fabs(t), df)));
  } else {
    fit.slope_p = (fit.slope == 0.0) ? 1.0 : detail::floor_p(0.0);
  }
  return fit;
}

// Tukey fences with linearly interpolated quartiles; order is preserved.
inline std::vector<double> iqr_filter(const std::vector<double>& x) {
  if (x.size() < 4) throw ContractError("iqr_filter: need at least 4 values");
  double q1 = quantile_linear(x, 0.25);
  double q3 = quantile_linear(x, 0.75);
  double iqr = q3 - q1;
  double lo = q1 - 1.5 * iqr, hi = q3 + 1.5 * iqr;
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x)
    if (v >= lo && v <= hi) out.push_back(v);
  return out;
}

struct ValueRange {
  double lo = 0.0;
  double hi = 0.0;  // closed interval [lo, hi]
};

struct DistributionShares {
  std::vector<double> shares;
  double total = 0.0;
};

inline DistributionShares distribution_share(
    const std::vector<double>& values, const std::vector<ValueRange>& ranges) {
  if (values.empty())
    throw ContractError("distribution_share: values must be non-empty");
  for (const auto& r : ranges)
    if (r.lo > r.hi) throw ContractError("distribution_share: invalid range");
  std::vector<ValueRange> sorted(ranges);
  std::sort(sorted.begin(), sorted.end(),
            [](const ValueRange& a, const ValueRange& b) { return a.lo < b.lo; });
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].lo <= sorted[i - 1].hi)
      throw ContractError("distribution_share: ranges must be disjoint");

  DistributionShares out;
  out.shares.resize(ranges.size(), 0.0);
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < ranges.size(); ++i) {
    size_t c = 0;
    for (double v : values)
      if (v >= ranges[i].lo && v <= ranges[i].hi) ++c;
    out.shares[i] = static_cast<double>(c) / n;
    out.total += out.shares[i];
  }
  return out;
}

}  // namespace polarlens::stats
