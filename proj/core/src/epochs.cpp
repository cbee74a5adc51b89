#include "fzp300/epochs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fzp300/rng.hpp"

namespace fzp300 {

std::string cohort_name(Cohort c) {
  switch (c) {
    case Cohort::NT: return "NT";
    case Cohort::ALS: return "ALS";
    case Cohort::AUT: return "AUT";
    case Cohort::SYN: return "SYN";
  }
  return "SYN";
}

Cohort cohort_from_name(const std::string& name) {
  if (name == "NT") return Cohort::NT;
  if (name == "ALS") return Cohort::ALS;
  if (name == "AUT") return Cohort::AUT;
  if (name == "SYN") return Cohort::SYN;
  throw ConfigError("unknown cohort tag '" + name + "' (expected NT, ALS, AUT or SYN)");
}

std::size_t EpochSet::count_label(std::uint8_t label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void EpochSet::validate() const {
  if (labels.size() != trials.size()) {
    throw ConfigError("epoch set: " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(trials.size()) + " trials");
  }
  for (std::uint8_t z : labels) {
    if (z > 1) throw ConfigError("epoch set: label out of {0,1}");
  }
  if (sample_rate_hz <= 0.0) throw ConfigError("epoch set: non-positive sample rate");
  const double t_end = t0_s + static_cast<double>(n_samples) / sample_rate_hz;
  if (!(t0_s < 0.0 && 0.0 < t_end)) {
    throw ConfigError("epoch set: stimulus onset not inside window [" +
                      std::to_string(t0_s) + ", " + std::to_string(t_end) + ")");
  }
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Matrix& trial = trials[i];
    if (trial.rows() != n_channels || trial.cols() != n_samples) {
      throw ConfigError("epoch set: trial " + std::to_string(i) + " is " +
                        trial.shape_str() + ", expected " + std::to_string(n_channels) +
                        "x" + std::to_string(n_samples));
    }
    trial.require_finite("trial " + std::to_string(i));
  }
}

void FilterSpec::validate(double sample_rate_hz) const {
  const double nyquist = sample_rate_hz / 2.0;
  if (!(0.0 < band_low_hz && band_low_hz < band_high_hz && band_high_hz < nyquist)) {
    throw ConfigError("filter band [" + std::to_string(band_low_hz) + ", " +
                      std::to_string(band_high_hz) + "] Hz invalid for Nyquist " +
                      std::to_string(nyquist) + " Hz");
  }
  if (!(notch_hz > 0.0 && notch_hz < nyquist)) {
    throw ConfigError("notch " + std::to_string(notch_hz) + " Hz outside (0, " +
                      std::to_string(nyquist) + ") Hz");
  }
  if (notch_q <= 0.0) throw ConfigError("notch quality factor must be positive");
  if (filter_order == 0) throw ConfigError("filter order must be at least 1");
}

void SynthSpec::validate(std::size_t n_channels) const {
  if (p300_latency_s <= 0.0 || p300_width_s <= 0.0) {
    throw ConfigError("synth: latency and width must be positive");
  }
  if (latency_jitter_s < 0.0 || noise_sigma_uv < 0.0 || p300_amp_uv < 0.0) {
    throw ConfigError("synth: jitter, noise sigma and amplitude must be non-negative");
  }
  for (std::size_t ch : active_channels) {
    if (ch >= n_channels) {
      throw ConfigError("synth: active channel " + std::to_string(ch) +
                        " out of range for " + std::to_string(n_channels) + " channels");
    }
  }
}

EpochSet extract_window(const EpochSet& x, double start_s, double end_s) {
  if (end_s <= start_s) throw RangeError("extract_window: end before start");
  const double fs = x.sample_rate_hz;
  const double t_end = x.t0_s + static_cast<double>(x.n_samples) / fs;
  // Half-sample slack absorbs float rounding on exact-boundary requests.
  const double slack = 0.5 / fs;
  if (start_s < x.t0_s - slack || end_s > t_end + slack) {
    throw RangeError("extract_window: [" + std::to_string(start_s) + ", " +
                     std::to_string(end_s) + "] outside recording [" +
                     std::to_string(x.t0_s) + ", " + std::to_string(t_end) + "]");
  }
  const auto round_half_up = [](double v) {
    return static_cast<std::size_t>(std::floor(v + 0.5));
  };
  const std::size_t new_t = round_half_up((end_s - start_s) * fs);
  const std::size_t first = round_half_up((start_s - x.t0_s) * fs);
  if (new_t == 0) throw RangeError("extract_window: empty window");
  if (first + new_t > x.n_samples) {
    throw RangeError("extract_window: window needs sample " +
                     std::to_string(first + new_t) + " of " + std::to_string(x.n_samples));
  }

  EpochSet out;
  out.n_channels = x.n_channels;
  out.n_samples = new_t;
  out.sample_rate_hz = fs;
  out.t0_s = start_s;
  out.labels = x.labels;
  out.meta = x.meta;
  out.trials.reserve(x.trials.size());
  for (const Matrix& trial : x.trials) {
    Matrix cropped(x.n_channels, new_t);
    for (std::size_t c = 0; c < x.n_channels; ++c) {
      const double* src = trial.row(c) + first;
      double* dst = cropped.row(c);
      std::copy(src, src + new_t, dst);
    }
    out.trials.push_back(std::move(cropped));
  }
  return out;
}

std::pair<EpochSet, EpochSet> split_train_valid(const EpochSet& x, double ratio,
                                                std::uint64_t seed) {
  if (!(0.0 < ratio && ratio < 1.0)) {
    throw ConfigError("split: ratio must lie in (0, 1)");
  }
  std::vector<std::size_t> strata[2];
  for (std::size_t i = 0; i < x.n_trials(); ++i) strata[x.labels[i]].push_back(i);
  for (int z = 0; z < 2; ++z) {
    if (strata[z].size() < 2) {
      throw ConfigError("split: class " + std::to_string(z) + " has " +
                        std::to_string(strata[z].size()) + " trials, need at least 2");
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> train_idx, valid_idx;
  for (int z = 0; z < 2; ++z) {
    rng.shuffle(strata[z]);
    const auto take =
        static_cast<std::size_t>(std::floor(static_cast<double>(strata[z].size()) * ratio));
    for (std::size_t i = 0; i < strata[z].size(); ++i) {
      (i < take ? train_idx : valid_idx).push_back(strata[z][i]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(valid_idx.begin(), valid_idx.end());

  const auto gather = [&x](const std::vector<std::size_t>& idx) {
    EpochSet part;
    part.n_channels = x.n_channels;
    part.n_samples = x.n_samples;
    part.sample_rate_hz = x.sample_rate_hz;
    part.t0_s = x.t0_s;
    part.meta = x.meta;
    part.labels.reserve(idx.size());
    part.trials.reserve(idx.size());
    for (std::size_t i : idx) {
      part.labels.push_back(x.labels[i]);
      part.trials.push_back(x.trials[i]);
    }
    return part;
  };
  return {gather(train_idx), gather(valid_idx)};
}

}  // namespace fzp300
