#pragma once

#include <span>
#include <vector>

#include "fzp300/errors.hpp"

namespace fzp300 {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (Lentz). Domain x in [0, 1], a, b > 0.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Survival function of the F distribution: P(F_{d1,d2} >= f).
double f_sf(double f, double d1, double d2);

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  double df_between = 0.0;
  double df_within = 0.0;
  bool degenerate = false;  // zero within-group variance
};

// One-way fixed-effects ANOVA across groups of scalars. Zero within-group
// variance marks the result degenerate (f/p meaningless, p reported NaN).
AnovaResult one_way_anova(std::span<const std::vector<double>> groups);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;  // both sample variances zero
};

// Welch two-sample t-test (unequal variances), two-sided.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Holm step-down adjustment. Output order matches input order; adjusted
// values never fall below the raw ones and are capped at 1.
std::vector<double> holm_adjust(std::span<const double> p_values);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // n-1 denominator

}  // namespace fzp300
