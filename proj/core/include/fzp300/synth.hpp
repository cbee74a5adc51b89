#pragma once

#include "fzp300/epochs.hpp"

namespace fzp300 {

// Synthetic oddball generator. Target trials carry a positive Gaussian
// bump (amplitude, latency +- uniform jitter, width) on the active channels
// plus white noise; non-targets carry noise only. Fully determined by
// spec.seed. Trial order is a seeded shuffle of targets and non-targets.
EpochSet synth_oddball(const SynthSpec& spec, std::size_t n_channels,
                       std::size_t n_samples, double sample_rate_hz,
                       double t0_s = -0.195, EpochMeta meta = {Cohort::SYN, 0, 0});

}  // namespace fzp300
