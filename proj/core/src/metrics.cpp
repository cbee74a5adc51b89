#include "fzp300/metrics.hpp"

#include <cmath>

#include <json.hpp>

#include "fzp300/stats.hpp"

namespace fzp300 {

ConfusionCounts confusion(std::span<const double> p_hat,
                          std::span<const std::uint8_t> labels, double threshold) {
  if (p_hat.size() != labels.size()) {
    throw DimensionError("confusion: " + std::to_string(p_hat.size()) +
                         " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const bool predicted = p_hat[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++c.tp;
    else if (predicted && !actual) ++c.fp;
    else if (!predicted && actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Scores scores(const ConfusionCounts& c) {
  if (c.total() == 0) throw ConfigError("scores: empty confusion counts");
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Scores s;
  s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

Scores weighted_scores(const ConfusionCounts& c) {
  if (c.total() == 0) throw ConfigError("weighted_scores: empty confusion counts");
  const Scores pos = scores(c);
  // The negative class viewed as positive.
  const ConfusionCounts flipped{c.tn, c.fn, c.fp, c.tp};
  const Scores neg = scores(flipped);
  const double support_pos = static_cast<double>(c.tp + c.fn);
  const double support_neg = static_cast<double>(c.tn + c.fp);
  const double total = support_pos + support_neg;

  Scores s;
  s.accuracy = pos.accuracy;
  s.precision = (pos.precision * support_pos + neg.precision * support_neg) / total;
  s.recall = (pos.recall * support_pos + neg.recall * support_neg) / total;
  s.f1 = (pos.f1 * support_pos + neg.f1 * support_neg) / total;
  return s;
}

PairedTestResult paired_test(std::span<const double> scores_a,
                             std::span<const double> scores_b) {
  if (scores_a.size() != scores_b.size()) {
    throw DimensionError("paired_test: " + std::to_string(scores_a.size()) + " vs " +
                         std::to_string(scores_b.size()) + " scores");
  }
  if (scores_a.size() < 2) throw ConfigError("paired_test: need at least 2 pairs");

  std::vector<double> diffs(scores_a.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = scores_a[i] - scores_b[i];
  const double n = static_cast<double>(diffs.size());
  const double md = mean(diffs);
  const double var = sample_variance(diffs);

  PairedTestResult out;
  out.df = n - 1.0;
  // Relative tolerance so a constant difference stays degenerate under
  // floating-point rounding of the subtraction.
  if (var <= 1e-24 * std::max(1.0, md * md)) {
    out.degenerate = true;
    out.t = 0.0;
    out.p = 1.0;
    return out;
  }
  out.t = md / std::sqrt(var / n);
  out.p = student_t_two_sided_p(out.t, out.df);
  return out;
}

std::string metrics_report_json(const std::vector<std::string>& subjects,
                                const std::vector<ConfusionCounts>& counts) {
  if (subjects.size() != counts.size()) {
    throw DimensionError("metrics_report: " + std::to_string(subjects.size()) +
                         " subjects vs " + std::to_string(counts.size()) + " counts");
  }
  if (subjects.empty()) throw ConfigError("metrics_report: no subjects");

  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["subjects"] = nlohmann::json::array();
  std::vector<double> acc, prec, rec, f1;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const Scores s = scores(counts[i]);
    const Scores w = weighted_scores(counts[i]);
    acc.push_back(s.accuracy);
    prec.push_back(s.precision);
    rec.push_back(s.recall);
    f1.push_back(s.f1);
    doc["subjects"].push_back({{"subject", subjects[i]},
                               {"confusion",
                                {{"tp", counts[i].tp},
                                 {"fp", counts[i].fp},
                                 {"fn", counts[i].fn},
                                 {"tn", counts[i].tn}}},
                               {"accuracy", s.accuracy},
                               {"precision", s.precision},
                               {"recall", s.recall},
                               {"f1", s.f1},
                               {"weighted",
                                {{"precision", w.precision},
                                 {"recall", w.recall},
                                 {"f1", w.f1}}}});
  }
  const auto mean_sd = [](const std::vector<double>& xs) {
    nlohmann::json j;
    j["mean"] = mean(xs);
    j["sd"] = xs.size() > 1 ? std::sqrt(sample_variance(xs)) : 0.0;
    return j;
  };
  doc["summary"] = {{"accuracy", mean_sd(acc)},
                    {"precision", mean_sd(prec)},
                    {"recall", mean_sd(rec)},
                    {"f1", mean_sd(f1)}};
  return doc.dump(2);
}

}  // namespace fzp300
