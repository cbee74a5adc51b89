#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fzp300/matrix.hpp"

namespace fzp300 {

enum class Cohort : std::uint8_t { NT = 0, ALS = 1, AUT = 2, SYN = 3 };

std::string cohort_name(Cohort c);
Cohort cohort_from_name(const std::string& name);

struct EpochMeta {
  Cohort cohort = Cohort::SYN;
  std::uint32_t subject = 0;
  std::uint32_t session = 0;
};

// A batch of stimulus-locked EEG trials with binary labels.
// Every trial matrix is channels x samples in microvolts; t0_s is the time
// of the first sample relative to stimulus onset (negative: pre-stimulus).
struct EpochSet {
  std::size_t n_channels = 0;
  std::size_t n_samples = 0;
  double sample_rate_hz = 0.0;
  double t0_s = 0.0;
  std::vector<std::uint8_t> labels;  // one {0,1} per trial
  std::vector<Matrix> trials;        // one C x T matrix per trial
  EpochMeta meta;

  std::size_t n_trials() const { return trials.size(); }
  double time_at(std::size_t sample) const {
    return t0_s + static_cast<double>(sample) / sample_rate_hz;
  }
  std::size_t count_label(std::uint8_t label) const;

  // Checks the structural invariants (label/trial agreement, shapes,
  // stimulus onset inside the window, finite data). Throws ConfigError.
  void validate() const;
};

struct FilterSpec {
  double band_low_hz = 0.1;
  double band_high_hz = 30.0;
  double notch_hz = 50.0;
  double notch_q = 30.0;
  std::size_t filter_order = 4;

  // Throws ConfigError when the band does not fit under Nyquist.
  void validate(double sample_rate_hz) const;
};

struct SynthSpec {
  std::size_t n_target = 100;
  std::size_t n_nontarget = 400;
  double p300_latency_s = 0.35;
  double p300_width_s = 0.06;
  double p300_amp_uv = 5.0;
  double latency_jitter_s = 0.02;
  double noise_sigma_uv = 1.25;
  std::vector<std::size_t> active_channels = {4, 5, 6};
  std::uint64_t seed = 1234;

  void validate(std::size_t n_channels) const;
};

// Crop every trial to [start_s, end_s] relative to stimulus onset.
// The new sample count is round-half-up((end_s - start_s) * fs).
// Throws RangeError when the window leaves the recording.
EpochSet extract_window(const EpochSet& x, double start_s, double end_s);

// Stratified, seeded train/validation split. Train-side counts floor per
// stratum. Throws ConfigError when a class has fewer than 2 trials.
std::pair<EpochSet, EpochSet> split_train_valid(const EpochSet& x, double ratio,
                                                std::uint64_t seed);

}  // namespace fzp300
