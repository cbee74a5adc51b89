#include "fzp300/interpret.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fzp300/linalg.hpp"
#include "fzp300/pca.hpp"

namespace fzp300 {

namespace {

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  return out;
}

}  // namespace

ReconstructedCenter reconstruct_center(const FuzzyRuleBank& bank, std::size_t rule,
                                       FilterKind kind, const std::string& cohort,
                                       double t0_s, double sample_rate_hz) {
  if (rule >= bank.n_rules) {
    throw RangeError("reconstruct_center: rule " + std::to_string(rule) + " of " +
                     std::to_string(bank.n_rules));
  }
  const Matrix& proj = bank.query_proj[rule].value;  // Q x in_dim
  Matrix target(bank.latent_dim, 1);
  for (std::size_t q = 0; q < bank.latent_dim; ++q) {
    target.at(q) = bank.centers.value(rule, q) - bank.query_bias[rule].value.at(q);
  }
  const Matrix pattern = matmul(pseudoinverse(proj), target);  // in_dim x 1

  ReconstructedCenter out;
  out.rule = rule;
  out.kind = kind;
  out.cohort = cohort;
  out.pattern.assign(pattern.values().begin(), pattern.values().end());
  out.t0_s = t0_s;
  out.sample_rate_hz = sample_rate_hz;
  return out;
}

PointwiseStats pointwise_anova(std::span<const std::string> cohort_names,
                               std::span<const std::vector<std::vector<double>>> groups,
                               double alpha) {
  if (groups.size() < 2) throw ConfigError("pointwise_anova: need at least 2 cohorts");
  if (cohort_names.size() != groups.size()) {
    throw DimensionError("pointwise_anova: " + std::to_string(cohort_names.size()) +
                         " names for " + std::to_string(groups.size()) + " groups");
  }
  std::size_t n_samples = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw ConfigError("pointwise_anova: cohort " + cohort_names[g] +
                        " has fewer than 2 waveforms");
    }
    for (const auto& w : groups[g]) {
      if (n_samples == 0) n_samples = w.size();
      if (w.size() != n_samples) {
        throw DimensionError("pointwise_anova: waveform length mismatch in cohort " +
                             cohort_names[g]);
      }
    }
  }

  // Pairs: every cohort against NT when present, otherwise all pairs.
  std::vector<std::pair<std::size_t, std::size_t>> pair_idx;
  const auto nt = std::find(cohort_names.begin(), cohort_names.end(), "NT");
  if (nt != cohort_names.end()) {
    const std::size_t nt_i = static_cast<std::size_t>(nt - cohort_names.begin());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g != nt_i) pair_idx.emplace_back(g, nt_i);
    }
  } else {
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) pair_idx.emplace_back(a, b);
    }
  }

  PointwiseStats out;
  out.alpha = alpha;
  out.f.resize(n_samples);
  out.p.resize(n_samples);
  out.flagged.assign(n_samples, 0);
  out.anova_mask.assign(n_samples, 0);
  out.pairs.resize(pair_idx.size());
  for (std::size_t pi = 0; pi < pair_idx.size(); ++pi) {
    out.pairs[pi].cohort_a = cohort_names[pair_idx[pi].first];
    out.pairs[pi].cohort_b = cohort_names[pair_idx[pi].second];
    out.pairs[pi].t.resize(n_samples);
    out.pairs[pi].p_raw.resize(n_samples);
    out.pairs[pi].p_corrected.resize(n_samples);
    out.pairs[pi].mask.assign(n_samples, 0);
  }

  std::vector<std::vector<double>> column(groups.size());
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      column[g].clear();
      for (const auto& w : groups[g]) column[g].push_back(w[s]);
    }
    const AnovaResult res = one_way_anova(column);
    out.f[s] = res.f;
    out.p[s] = res.p;
    if (res.degenerate) {
      out.flagged[s] = 1;
      for (auto& pair : out.pairs) {
        pair.t[s] = std::numeric_limits<double>::quiet_NaN();
        pair.p_raw[s] = std::numeric_limits<double>::quiet_NaN();
        pair.p_corrected[s] = std::numeric_limits<double>::quiet_NaN();
      }
      continue;
    }
    out.anova_mask[s] = res.p < alpha ? 1 : 0;

    std::vector<double> raw(pair_idx.size());
    bool any_degenerate = false;
    for (std::size_t pi = 0; pi < pair_idx.size(); ++pi) {
      const WelchResult w =
          welch_t_test(column[pair_idx[pi].first], column[pair_idx[pi].second]);
      out.pairs[pi].t[s] = w.t;
      if (w.degenerate) {
        any_degenerate = true;
        raw[pi] = std::numeric_limits<double>::quiet_NaN();
      } else {
        raw[pi] = w.p;
      }
      out.pairs[pi].p_raw[s] = raw[pi];
    }
    if (any_degenerate) {
      for (std::size_t pi = 0; pi < pair_idx.size(); ++pi) {
        out.pairs[pi].p_corrected[s] = raw[pi];
        if (!std::isnan(raw[pi]) && raw[pi] < alpha) out.pairs[pi].mask[s] = 1;
      }
      continue;
    }
    const std::vector<double> corrected = holm_adjust(raw);
    for (std::size_t pi = 0; pi < pair_idx.size(); ++pi) {
      out.pairs[pi].p_corrected[s] = corrected[pi];
      out.pairs[pi].mask[s] = corrected[pi] < alpha ? 1 : 0;
    }
  }
  return out;
}

CenterEmbedding embed_centers(std::span<const ReconstructedCenter> centers) {
  if (centers.size() < 3) {
    throw ConfigError("embed_centers: need at least 3 centers, have " +
                      std::to_string(centers.size()));
  }
  const std::size_t d = centers.front().pattern.size();
  for (const auto& c : centers) {
    if (c.pattern.size() != d) {
      throw DimensionError("embed_centers: pattern length mismatch");
    }
  }
  Matrix data(centers.size(), d);
  for (std::size_t r = 0; r < centers.size(); ++r) {
    std::copy(centers[r].pattern.begin(), centers[r].pattern.end(), data.row(r));
  }
  const Pca2d pca = pca_embed_2d(data);

  CenterEmbedding out;
  out.coords = pca.coords;
  out.explained_pc1 = pca.explained[0];
  out.explained_pc2 = pca.explained[1];
  out.cohorts.reserve(centers.size());
  for (const auto& c : centers) out.cohorts.push_back(c.cohort);
  return out;
}

CenterReport center_report(std::span<const CohortModels> cohorts,
                           const CenterReportConfig& config) {
  if (cohorts.size() < 2) {
    throw ConfigError("center_report: need at least 2 cohorts, have " +
                      std::to_string(cohorts.size()));
  }
  for (const CohortModels& c : cohorts) {
    if (c.models.size() < 2) {
      throw ConfigError("center_report: cohort " + c.cohort + " has " +
                        std::to_string(c.models.size()) + " models, need at least 2");
    }
  }
  const FuzzyModel& first = *cohorts.front().models.front();
  const std::size_t n_rules = first.temporal_bank().n_rules;
  const std::size_t n_samples = first.temporal_bank().in_dim;
  for (const CohortModels& c : cohorts) {
    for (const FuzzyModel* m : c.models) {
      if (m->temporal_bank().n_rules != n_rules ||
          m->temporal_bank().in_dim != n_samples) {
        throw DimensionError("center_report: model in cohort " + c.cohort +
                             " disagrees on temporal bank shape");
      }
    }
  }

  CenterReport report;
  report.config = config;
  report.n_samples = n_samples;
  for (const CohortModels& c : cohorts) report.cohorts.push_back(c.cohort);

  const double fs = config.sample_rate_hz;
  const double t0 = config.t0_s;
  std::size_t pre_samples = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    if (t0 + static_cast<double>(s) / fs < 0.0) ++pre_samples;
  }
  report.pre_stimulus_samples = pre_samples;

  for (std::size_t rule = 0; rule < n_rules; ++rule) {
    RuleReport rr;
    rr.rule = rule;
    std::vector<std::vector<std::vector<double>>> groups;
    std::vector<ReconstructedCenter> flat;
    for (const CohortModels& c : cohorts) {
      std::vector<std::vector<double>> waves;
      for (const FuzzyModel* m : c.models) {
        ReconstructedCenter wave = reconstruct_center(m->temporal_bank(), rule,
                                                      FilterKind::temporal, c.cohort,
                                                      t0, fs);
        waves.push_back(wave.pattern);
        flat.push_back(std::move(wave));
      }
      rr.waveforms.push_back(waves);
      groups.push_back(std::move(waves));
    }
    rr.stats = pointwise_anova(report.cohorts, groups, config.alpha);
    rr.embedding = embed_centers(flat);

    for (std::size_t s = 0; s < n_samples; ++s) {
      if (!rr.stats.anova_mask[s]) continue;
      const double t = t0 + static_cast<double>(s) / fs;
      if (t >= config.window_start_s && t <= config.window_end_s) {
        ++rr.significant_in_window;
      }
      if (t < 0.0) ++rr.significant_pre_stimulus;
    }
    report.rules.push_back(std::move(rr));
  }

  const std::size_t n_spatial = first.spatial_bank().n_rules;
  for (std::size_t rule = 0; rule < n_spatial; ++rule) {
    std::vector<std::vector<std::vector<double>>> per_cohort;
    for (const CohortModels& c : cohorts) {
      std::vector<std::vector<double>> topos;
      for (const FuzzyModel* m : c.models) {
        topos.push_back(
            reconstruct_center(m->spatial_bank(), rule, FilterKind::spatial, c.cohort)
                .pattern);
      }
      per_cohort.push_back(std::move(topos));
    }
    report.topographies.push_back(std::move(per_cohort));
  }
  return report;
}

void write_center_report(const CenterReport& report,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const double fs = report.config.sample_rate_hz;
  const double t0 = report.config.t0_s;

  {
    std::ofstream out = open_out(out_dir / "waveforms.csv");
    out << "rule,cohort,replicate,t,value\n";
    for (const RuleReport& rr : report.rules) {
      for (std::size_t g = 0; g < report.cohorts.size(); ++g) {
        for (std::size_t rep = 0; rep < rr.waveforms[g].size(); ++rep) {
          const auto& wave = rr.waveforms[g][rep];
          for (std::size_t s = 0; s < wave.size(); ++s) {
            out << rr.rule << ',' << report.cohorts[g] << ',' << rep << ','
                << fmt_full(t0 + static_cast<double>(s) / fs) << ','
                << fmt_full(wave[s]) << '\n';
          }
        }
      }
    }
  }

  {
    std::ofstream out = open_out(out_dir / "topography.csv");
    out << "rule,cohort,replicate,channel,value\n";
    for (std::size_t rule = 0; rule < report.topographies.size(); ++rule) {
      for (std::size_t g = 0; g < report.cohorts.size(); ++g) {
        for (std::size_t rep = 0; rep < report.topographies[rule][g].size(); ++rep) {
          const auto& topo = report.topographies[rule][g][rep];
          for (std::size_t ch = 0; ch < topo.size(); ++ch) {
            out << rule << ',' << report.cohorts[g] << ',' << rep << ',' << ch << ','
                << fmt_full(topo[ch]) << '\n';
          }
        }
      }
    }
  }

  {
    std::ofstream out = open_out(out_dir / "stats.csv");
    out << "rule,t,f,p";
    const auto& pairs0 = report.rules.front().stats.pairs;
    for (const PairwiseStats& pair : pairs0) {
      const std::string tag = pair.cohort_a + "_vs_" + pair.cohort_b;
      out << ",t_" << tag << ",p_" << tag << ",p_corrected_" << tag << ",mask_" << tag;
    }
    out << ",flagged,mask\n";
    for (const RuleReport& rr : report.rules) {
      for (std::size_t s = 0; s < report.n_samples; ++s) {
        out << rr.rule << ',' << fmt_full(t0 + static_cast<double>(s) / fs) << ','
            << fmt_full(rr.stats.f[s]) << ',' << fmt_full(rr.stats.p[s]);
        for (const PairwiseStats& pair : rr.stats.pairs) {
          out << ',' << fmt_full(pair.t[s]) << ',' << fmt_full(pair.p_raw[s]) << ','
              << fmt_full(pair.p_corrected[s]) << ',' << int(pair.mask[s]);
        }
        out << ',' << int(rr.stats.flagged[s]) << ',' << int(rr.stats.anova_mask[s])
            << '\n';
      }
    }
  }

  {
    std::ofstream out = open_out(out_dir / "embedding.csv");
    out << "rule,cohort,pc1,pc2\n";
    for (const RuleReport& rr : report.rules) {
      for (std::size_t i = 0; i < rr.embedding.cohorts.size(); ++i) {
        out << rr.rule << ',' << rr.embedding.cohorts[i] << ','
            << fmt_full(rr.embedding.coords(i, 0)) << ','
            << fmt_full(rr.embedding.coords(i, 1)) << '\n';
      }
    }
  }

  {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["cohorts"] = report.cohorts;
    doc["alpha"] = report.config.alpha;
    doc["p300_window_s"] = {report.config.window_start_s, report.config.window_end_s};
    doc["sample_rate_hz"] = fs;
    doc["t0_s"] = t0;
    doc["n_samples"] = report.n_samples;
    doc["pre_stimulus_samples"] = report.pre_stimulus_samples;
    doc["rules"] = nlohmann::json::array();
    for (const RuleReport& rr : report.rules) {
      std::size_t masked = 0;
      for (std::uint8_t m : rr.stats.anova_mask) masked += m;
      doc["rules"].push_back(
          {{"rule", rr.rule},
           {"significant_samples", masked},
           {"significant_in_window", rr.significant_in_window},
           {"significant_pre_stimulus", rr.significant_pre_stimulus},
           {"explained_pc1", rr.embedding.explained_pc1},
           {"explained_pc2", rr.embedding.explained_pc2}});
    }
    // Run-varying data stays inside this block only.
    doc["meta"] = {
        {"created_unix",
         std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()}};
    std::ofstream out = open_out(out_dir / "report.json");
    out << doc.dump(2) << "\n";
  }
}

}  // namespace fzp300
