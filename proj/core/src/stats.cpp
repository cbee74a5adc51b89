#include "fzp300/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fzp300 {

namespace {

// Continued fraction for the incomplete beta, modified Lentz algorithm.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("incomplete_beta: a, b must be positive");
  if (x < 0.0 || x > 1.0) throw ConfigError("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  // Use the symmetry that keeps the continued fraction converging fast.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw ConfigError("student_t: df must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(df / 2.0, 0.5, x);
}

double f_sf(double f, double d1, double d2) {
  if (d1 <= 0.0 || d2 <= 0.0) throw ConfigError("f_sf: degrees of freedom must be positive");
  if (f <= 0.0) return 1.0;
  if (!std::isfinite(f)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ConfigError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw ConfigError("sample_variance needs at least 2 values");
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

AnovaResult one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw ConfigError("one_way_anova: need at least 2 groups");
  std::size_t n_total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw ConfigError("one_way_anova: every group needs >= 2 values");
    n_total += g.size();
  }

  double grand = 0.0;
  for (const auto& g : groups) grand += std::accumulate(g.begin(), g.end(), 0.0);
  grand /= static_cast<double>(n_total);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double gm = mean(g);
    ss_between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
    for (double x : g) ss_within += (x - gm) * (x - gm);
  }

  AnovaResult out;
  out.df_between = static_cast<double>(groups.size() - 1);
  out.df_within = static_cast<double>(n_total - groups.size());
  if (ss_within <= 0.0) {
    out.degenerate = true;
    out.f = std::numeric_limits<double>::quiet_NaN();
    out.p = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.f = (ss_between / out.df_between) / (ss_within / out.df_within);
  out.p = f_sf(out.f, out.df_between, out.df_within);
  return out;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ConfigError("welch_t_test: both samples need >= 2 values");
  }
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());

  WelchResult out;
  const double se2 = va + vb;
  if (se2 <= 0.0) {
    out.degenerate = true;
    out.t = 0.0;
    out.df = static_cast<double>(a.size() + b.size() - 2);
    out.p = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.t = (ma - mb) / std::sqrt(se2);
  out.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) +
            vb * vb / static_cast<double>(b.size() - 1));
  out.p = student_t_two_sided_p(out.t, out.df);
  return out;
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });

  std::vector<double> adjusted(m, 0.0);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const std::size_t idx = order[rank];
    const double scaled =
        std::min(1.0, static_cast<double>(m - rank) * p_values[idx]);
    running = std::max(running, scaled);
    adjusted[idx] = running;
  }
  return adjusted;
}

}  // namespace fzp300
