#include <doctest.h>

#include <cmath>

#include "fzp300/rng.hpp"
#include "fzp300/stats.hpp"

using namespace fzp300;

TEST_CASE("hand ANOVA: groups {1,2},{3,4},{5,6} give F = 16 with df (2,3)") {
  const std::vector<std::vector<double>> groups = {{1, 2}, {3, 4}, {5, 6}};
  const AnovaResult r = one_way_anova(groups);
  CHECK(r.f == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(r.df_between == 2.0);
  CHECK(r.df_within == 3.0);
  CHECK_FALSE(r.degenerate);
  CHECK(r.p > 0.0);
  CHECK(r.p < 1.0);
}

TEST_CASE("identical groups give F = 0 and p = 1") {
  const std::vector<std::vector<double>> groups = {{1, 2}, {1, 2}, {1, 2}};
  const AnovaResult r = one_way_anova(groups);
  CHECK(r.f == doctest::Approx(0.0));
  CHECK(r.p == doctest::Approx(1.0));
}

TEST_CASE("zero within-group variance is degenerate") {
  const std::vector<std::vector<double>> groups = {{1, 1}, {2, 2}};
  const AnovaResult r = one_way_anova(groups);
  CHECK(r.degenerate);
  CHECK(std::isnan(r.p));
}

TEST_CASE("two groups: F equals the squared pooled t statistic") {
  Rng rng(101);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> a(6), b(8);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal() + 0.5;
    const AnovaResult r = one_way_anova(std::vector<std::vector<double>>{a, b});

    // Pooled two-sample t (equal-variance form).
    const double ma = mean(a), mb = mean(b);
    const double na = 6, nb = 8;
    const double sp2 = ((na - 1) * sample_variance(a) + (nb - 1) * sample_variance(b)) /
                       (na + nb - 2);
    const double t = (ma - mb) / std::sqrt(sp2 * (1 / na + 1 / nb));
    CHECK(r.f == doctest::Approx(t * t).epsilon(1e-9));
  }
}

TEST_CASE("ANOVA F is invariant to shifting and scaling all values") {
  Rng rng(102);
  std::vector<std::vector<double>> groups(3);
  for (auto& g : groups) {
    g.resize(5);
    for (double& v : g) v = rng.normal();
  }
  const double f0 = one_way_anova(groups).f;
  std::vector<std::vector<double>> moved = groups;
  for (auto& g : moved) {
    for (double& v : g) v = 3.5 * v + 11.0;
  }
  CHECK(one_way_anova(moved).f == doctest::Approx(f0).epsilon(1e-9));
}

TEST_CASE("incomplete beta sanity values") {
  // I_x(1, 1) = x.
  CHECK(incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  // I_x(a, b) + I_{1-x}(b, a) = 1.
  CHECK(incomplete_beta(2.5, 1.5, 0.4) + incomplete_beta(1.5, 2.5, 0.6) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
}

TEST_CASE("student t two-sided p against known quantiles") {
  // t = 2.776 at df = 4 is the 97.5% quantile: two-sided p = 0.05.
  CHECK(student_t_two_sided_p(2.776445105, 4.0) == doctest::Approx(0.05).epsilon(1e-6));
  // t = 0 gives p = 1.
  CHECK(student_t_two_sided_p(0.0, 7.0) == doctest::Approx(1.0));
  // Large t gives small p.
  CHECK(student_t_two_sided_p(50.0, 5.0) < 1e-6);
}

TEST_CASE("F survival function against a known quantile") {
  // F(2, 3) upper 5% critical value is 9.5521.
  CHECK(f_sf(9.5521, 2.0, 3.0) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(f_sf(0.0, 2.0, 3.0) == 1.0);
}

TEST_CASE("welch test on equal-variance samples approximates the pooled test") {
  const std::vector<double> a = {1.1, 0.9, 1.2, 1.0, 0.8};
  const std::vector<double> b = {1.6, 1.4, 1.7, 1.5, 1.3};
  const WelchResult r = welch_t_test(a, b);
  CHECK(r.t < 0.0);
  CHECK(r.p < 0.01);
  CHECK(r.df > 6.0);
  CHECK(r.df <= 8.0);
}

TEST_CASE("welch degenerate when both variances vanish") {
  const std::vector<double> a = {1.0, 1.0};
  const std::vector<double> b = {2.0, 2.0};
  const WelchResult r = welch_t_test(a, b);
  CHECK(r.degenerate);
}

TEST_CASE("holm adjustment never lowers a p-value and is monotone") {
  Rng rng(103);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + rng.below(6);
    std::vector<double> p(m);
    for (double& v : p) v = rng.uniform();
    const std::vector<double> adj = holm_adjust(p);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(adj[i] >= p[i]);
      CHECK(adj[i] <= 1.0);
    }
    // Step-down monotonicity: the adjusted values sorted by raw p are
    // non-decreasing.
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return p[x] < p[y]; });
    for (std::size_t i = 1; i < m; ++i) {
      CHECK(adj[order[i]] >= adj[order[i - 1]] - 1e-15);
    }
  }
}

TEST_CASE("holm worked example") {
  // Raw (0.01, 0.04): adjusted (0.02, 0.04).
  const std::vector<double> adj = holm_adjust(std::vector<double>{0.01, 0.04});
  CHECK(adj[0] == doctest::Approx(0.02));
  CHECK(adj[1] == doctest::Approx(0.04));
}
