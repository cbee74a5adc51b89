#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fzp300/errors.hpp"

namespace fzp300 {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

// Tie rule: a probability equal to the threshold predicts positive.
ConfusionCounts confusion(std::span<const double> p_hat,
                          std::span<const std::uint8_t> labels, double threshold = 0.5);

struct Scores {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Plain binary scores with zero-denominator conventions (0, not NaN).
Scores scores(const ConfusionCounts& c);

// Support-weighted averages over both classes (weighted recall equals
// accuracy by construction); reported alongside the plain binary scores.
Scores weighted_scores(const ConfusionCounts& c);

struct PairedTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero variance of the differences
};

// Two-sided paired t-test on per-subject score differences a - b.
// Zero difference variance yields a flagged result with the p = 1 convention.
PairedTestResult paired_test(std::span<const double> scores_a,
                             std::span<const double> scores_b);

// Per-subject metrics plus mean (standard deviation) per metric, rendered
// as a JSON report string.
std::string metrics_report_json(const std::vector<std::string>& subjects,
                                const std::vector<ConfusionCounts>& counts);

}  // namespace fzp300
