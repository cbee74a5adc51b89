#include "fzp300/run_config.hpp"

#include <fstream>

#include <json.hpp>

namespace fzp300 {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("config is not valid JSON: " + std::string(e.what()), 0);
  }

  RunConfig cfg;
  const int version = doc.value("schema_version", 1);
  if (version != 1) {
    throw ConfigError("config schema_version " + std::to_string(version) +
                      " not recognized (expected 1)");
  }

  if (doc.contains("synth")) {
    const json& s = doc["synth"];
    maybe(s, "n_target", cfg.synth.n_target);
    maybe(s, "n_nontarget", cfg.synth.n_nontarget);
    maybe(s, "p300_latency_s", cfg.synth.p300_latency_s);
    maybe(s, "p300_width_s", cfg.synth.p300_width_s);
    maybe(s, "p300_amp_uv", cfg.synth.p300_amp_uv);
    maybe(s, "latency_jitter_s", cfg.synth.latency_jitter_s);
    maybe(s, "noise_sigma_uv", cfg.synth.noise_sigma_uv);
    maybe(s, "active_channels", cfg.synth.active_channels);
    maybe(s, "seed", cfg.synth.seed);
    maybe(s, "n_channels", cfg.synth_channels);
    maybe(s, "duration_s", cfg.synth_duration_s);
    maybe(s, "sample_rate_hz", cfg.synth_sample_rate_hz);
    maybe(s, "t0_s", cfg.synth_t0_s);
    maybe(s, "cohort", cfg.synth_cohort);
    maybe(s, "subject", cfg.synth_subject);
    maybe(s, "session", cfg.synth_session);
  }
  if (doc.contains("filter")) {
    const json& f = doc["filter"];
    maybe(f, "band_low_hz", cfg.filter.band_low_hz);
    maybe(f, "band_high_hz", cfg.filter.band_high_hz);
    maybe(f, "notch_hz", cfg.filter.notch_hz);
    maybe(f, "notch_q", cfg.filter.notch_q);
    maybe(f, "filter_order", cfg.filter.filter_order);
    maybe(f, "preprocess", cfg.preprocess);
    if (f.contains("window_start_s")) cfg.window_start_s = f["window_start_s"].get<double>();
    if (f.contains("window_end_s")) cfg.window_end_s = f["window_end_s"].get<double>();
  }
  if (doc.contains("model")) {
    const json& m = doc["model"];
    maybe(m, "spatial_rules", cfg.model.spatial_rules);
    maybe(m, "temporal_rules", cfg.model.temporal_rules);
    maybe(m, "latent_dim", cfg.model.latent_dim);
    maybe(m, "channels_out", cfg.model.channels_out);
    maybe(m, "samples_out", cfg.model.samples_out);
    maybe(m, "hidden", cfg.model.hidden);
    maybe(m, "dropout", cfg.model.dropout);
    maybe(m, "seed", cfg.model_seed);
  }
  if (doc.contains("train")) {
    const json& t = doc["train"];
    maybe(t, "base_lr", cfg.train.base_lr);
    maybe(t, "batch_size", cfg.train.batch_size);
    maybe(t, "max_epochs", cfg.train.max_epochs);
    maybe(t, "warmup_epochs", cfg.train.warmup_epochs);
    maybe(t, "weight_decay", cfg.train.weight_decay);
    maybe(t, "patience", cfg.train.patience);
    maybe(t, "min_delta", cfg.train.min_delta);
    maybe(t, "seed", cfg.train.seed);
    maybe(t, "grad_clip", cfg.train.grad_clip);
    maybe(t, "split_ratio", cfg.split_ratio);
    if (t.contains("select_metric")) {
      const std::string metric = t["select_metric"].get<std::string>();
      if (metric == "accuracy") cfg.train.select = SelectMetric::accuracy;
      else if (metric == "f1") cfg.train.select = SelectMetric::f1;
      else throw ConfigError("select_metric must be \"accuracy\" or \"f1\"");
    }
  }
  if (doc.contains("analysis")) {
    const json& a = doc["analysis"];
    maybe(a, "p300_window_start_s", cfg.analysis.window_start_s);
    maybe(a, "p300_window_end_s", cfg.analysis.window_end_s);
    maybe(a, "alpha", cfg.analysis.alpha);
  }
  return cfg;
}

std::string run_config_json(const RunConfig& cfg) {
  json doc;
  doc["schema_version"] = cfg.schema_version;
  doc["synth"] = {{"n_target", cfg.synth.n_target},
                  {"n_nontarget", cfg.synth.n_nontarget},
                  {"p300_latency_s", cfg.synth.p300_latency_s},
                  {"p300_width_s", cfg.synth.p300_width_s},
                  {"p300_amp_uv", cfg.synth.p300_amp_uv},
                  {"latency_jitter_s", cfg.synth.latency_jitter_s},
                  {"noise_sigma_uv", cfg.synth.noise_sigma_uv},
                  {"active_channels", cfg.synth.active_channels},
                  {"seed", cfg.synth.seed},
                  {"n_channels", cfg.synth_channels},
                  {"duration_s", cfg.synth_duration_s},
                  {"sample_rate_hz", cfg.synth_sample_rate_hz},
                  {"t0_s", cfg.synth_t0_s},
                  {"cohort", cfg.synth_cohort},
                  {"subject", cfg.synth_subject},
                  {"session", cfg.synth_session}};
  doc["filter"] = {{"band_low_hz", cfg.filter.band_low_hz},
                   {"band_high_hz", cfg.filter.band_high_hz},
                   {"notch_hz", cfg.filter.notch_hz},
                   {"notch_q", cfg.filter.notch_q},
                   {"filter_order", cfg.filter.filter_order},
                   {"preprocess", cfg.preprocess}};
  if (cfg.window_start_s) doc["filter"]["window_start_s"] = *cfg.window_start_s;
  if (cfg.window_end_s) doc["filter"]["window_end_s"] = *cfg.window_end_s;
  doc["model"] = {{"spatial_rules", cfg.model.spatial_rules},
                  {"temporal_rules", cfg.model.temporal_rules},
                  {"latent_dim", cfg.model.latent_dim},
                  {"channels_out", cfg.model.channels_out},
                  {"samples_out", cfg.model.samples_out},
                  {"hidden", cfg.model.hidden},
                  {"dropout", cfg.model.dropout},
                  {"seed", cfg.model_seed}};
  doc["train"] = {{"base_lr", cfg.train.base_lr},
                  {"batch_size", cfg.train.batch_size},
                  {"max_epochs", cfg.train.max_epochs},
                  {"warmup_epochs", cfg.train.warmup_epochs},
                  {"weight_decay", cfg.train.weight_decay},
                  {"patience", cfg.train.patience},
                  {"min_delta", cfg.train.min_delta},
                  {"seed", cfg.train.seed},
                  {"grad_clip", cfg.train.grad_clip},
                  {"split_ratio", cfg.split_ratio},
                  {"select_metric",
                   cfg.train.select == SelectMetric::accuracy ? "accuracy" : "f1"}};
  doc["analysis"] = {{"p300_window_start_s", cfg.analysis.window_start_s},
                     {"p300_window_end_s", cfg.analysis.window_end_s},
                     {"alpha", cfg.analysis.alpha}};
  return doc.dump(2);
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open config " + path.string() + " for writing");
  out << run_config_json(cfg) << "\n";
}

}  // namespace fzp300
