#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fzp300/fuzzy.hpp"
#include "fzp300/model.hpp"
#include "fzp300/stats.hpp"

namespace fzp300 {

enum class FilterKind { spatial, temporal };

// A fuzzy prototype mapped back to signal space through the pseudoinverse
// of its rule's query projection: pattern = pinv(P) (center - bias).
struct ReconstructedCenter {
  std::size_t rule = 0;
  FilterKind kind = FilterKind::temporal;
  std::string cohort;
  std::vector<double> pattern;  // length C (spatial) or T (temporal)
  double t0_s = 0.0;            // waveform time axis (temporal kind)
  double sample_rate_hz = 0.0;
};

ReconstructedCenter reconstruct_center(const FuzzyRuleBank& bank, std::size_t rule,
                                       FilterKind kind, const std::string& cohort = "",
                                       double t0_s = 0.0, double sample_rate_hz = 0.0);

// Per-sample statistics across cohort groups of equal-length waveforms.
struct PairwiseStats {
  std::string cohort_a;
  std::string cohort_b;
  std::vector<double> t;
  std::vector<double> p_raw;
  std::vector<double> p_corrected;  // Holm across the pairs, per sample
  std::vector<std::uint8_t> mask;   // corrected p < alpha
};

struct PointwiseStats {
  double alpha = 0.05;
  std::vector<double> f;
  std::vector<double> p;
  std::vector<std::uint8_t> flagged;     // zero within-group variance
  std::vector<std::uint8_t> anova_mask;  // p < alpha and not flagged
  std::vector<PairwiseStats> pairs;
};

// Point-wise one-way ANOVA plus post-hoc Welch pairwise tests with Holm
// correction across the pairs within each sample. When a cohort named
// "NT" is present the pairs are every other cohort against NT; otherwise
// all unordered pairs are tested.
PointwiseStats pointwise_anova(std::span<const std::string> cohort_names,
                               std::span<const std::vector<std::vector<double>>> groups,
                               double alpha = 0.05);

struct CenterEmbedding {
  std::vector<std::string> cohorts;  // one label per embedded center
  Matrix coords;                     // n x 2
  double explained_pc1 = 0.0;
  double explained_pc2 = 0.0;
};

// 2-D principal-component embedding of reconstructed centers.
// Throws ConfigError with fewer than 3 centers.
CenterEmbedding embed_centers(std::span<const ReconstructedCenter> centers);

// One trained replicate (typically one subject's model) within a cohort.
struct CohortModels {
  std::string cohort;
  std::vector<const FuzzyModel*> models;
};

struct CenterReportConfig {
  double window_start_s = 0.25;  // P300 interval flag window
  double window_end_s = 0.50;
  double alpha = 0.05;
  double sample_rate_hz = 0.0;
  double t0_s = 0.0;
};

struct RuleReport {
  std::size_t rule = 0;
  // waveforms[cohort][replicate] is the reconstructed temporal pattern.
  std::vector<std::vector<std::vector<double>>> waveforms;
  PointwiseStats stats;
  CenterEmbedding embedding;
  std::size_t significant_in_window = 0;
  std::size_t significant_pre_stimulus = 0;
};

struct CenterReport {
  std::vector<std::string> cohorts;
  std::vector<RuleReport> rules;  // one per temporal rule
  // topographies[spatial_rule][cohort][replicate]: channel patterns.
  std::vector<std::vector<std::vector<std::vector<double>>>> topographies;
  CenterReportConfig config;
  std::size_t n_samples = 0;
  std::size_t pre_stimulus_samples = 0;
};

// Cohort-level center analysis: reconstruct every temporal rule center of
// every replicate, run the point-wise statistics per rule across cohorts
// and embed the centers in 2-D. Needs >= 2 cohorts with >= 2 replicates
// each (ConfigError naming the offender otherwise).
CenterReport center_report(std::span<const CohortModels> cohorts,
                           const CenterReportConfig& config);

// Writes waveforms.csv, topography.csv, stats.csv, embedding.csv and
// report.json into out_dir (created if missing).
void write_center_report(const CenterReport& report,
                         const std::filesystem::path& out_dir);

}  // namespace fzp300
