#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fzp300/epochs.hpp"
#include "fzp300/interpret.hpp"
#include "fzp300/model.hpp"
#include "fzp300/train.hpp"

namespace fzp300 {

// One serializable source of truth for a run: synthesis, preprocessing,
// model dims, optimization and the analysis window. Every field has a
// default so an absent config file means "defaults"; CLI flags win over
// file values.
struct RunConfig {
  int schema_version = 1;

  // Synthesis shape (SynthSpec carries the bump/noise parameters).
  SynthSpec synth;
  std::size_t synth_channels = 8;
  double synth_duration_s = 0.995;
  double synth_sample_rate_hz = 256.0;
  double synth_t0_s = -0.195;
  std::string synth_cohort = "SYN";
  std::uint32_t synth_subject = 0;
  std::uint32_t synth_session = 0;

  FilterSpec filter;
  bool preprocess = true;
  std::optional<double> window_start_s;  // optional re-windowing
  std::optional<double> window_end_s;

  ModelDims model;  // n_channels/n_samples filled from data when zero
  std::uint64_t model_seed = 7;

  TrainConfig train;
  double split_ratio = 0.8;

  CenterReportConfig analysis;  // sample rate / t0 come from checkpoints

  std::size_t synth_samples() const {
    return static_cast<std::size_t>(synth_duration_s * synth_sample_rate_hz + 0.5);
  }
};

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);
std::string run_config_json(const RunConfig& cfg);

}  // namespace fzp300
