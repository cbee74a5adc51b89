#include "fzp300/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fzp300/rng.hpp"

namespace fzp300 {

EpochSet synth_oddball(const SynthSpec& spec, std::size_t n_channels,
                       std::size_t n_samples, double sample_rate_hz, double t0_s,
                       EpochMeta meta) {
  spec.validate(n_channels);

  EpochSet x;
  x.n_channels = n_channels;
  x.n_samples = n_samples;
  x.sample_rate_hz = sample_rate_hz;
  x.t0_s = t0_s;
  x.meta = meta;

  const std::size_t n_total = spec.n_target + spec.n_nontarget;
  Rng rng(spec.seed);

  // Shuffled trial order so targets are interleaved like an oddball stream.
  std::vector<std::uint8_t> order(n_total, 0);
  std::fill(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.n_target), 1);
  rng.shuffle(order);

  std::vector<bool> active(n_channels, false);
  for (std::size_t ch : spec.active_channels) active[ch] = true;

  x.labels.reserve(n_total);
  x.trials.reserve(n_total);
  for (std::size_t t = 0; t < n_total; ++t) {
    const bool is_target = order[t] == 1;
    Matrix trial(n_channels, n_samples);

    if (is_target && spec.p300_amp_uv > 0.0) {
      const double jitter = spec.latency_jitter_s > 0.0
                                ? rng.uniform(-spec.latency_jitter_s, spec.latency_jitter_s)
                                : 0.0;
      const double center = spec.p300_latency_s + jitter;
      const double inv_two_w2 = 1.0 / (2.0 * spec.p300_width_s * spec.p300_width_s);
      for (std::size_t c = 0; c < n_channels; ++c) {
        if (!active[c]) continue;
        double* row = trial.row(c);
        for (std::size_t s = 0; s < n_samples; ++s) {
          const double dt = x.time_at(s) - center;
          row[s] = spec.p300_amp_uv * std::exp(-dt * dt * inv_two_w2);
        }
      }
    }
    if (spec.noise_sigma_uv > 0.0) {
      for (double& v : trial.values()) v += spec.noise_sigma_uv * rng.normal();
    }

    x.labels.push_back(is_target ? 1 : 0);
    x.trials.push_back(std::move(trial));
  }
  return x;
}

}  // namespace fzp300
