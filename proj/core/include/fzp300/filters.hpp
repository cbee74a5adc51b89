#pragma once

#include <vector>

#include "fzp300/epochs.hpp"

namespace fzp300 {

// Second-order IIR section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double gain_at_dc() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

// Butterworth band-pass of prototype order `order` (2*order poles) via the
// analog band transform and the bilinear map, returned as a biquad cascade.
std::vector<Biquad> design_butter_bandpass(std::size_t order, double low_hz,
                                           double high_hz, double fs_hz);

// Second-order notch at f0 with quality factor q.
Biquad design_notch(double f0_hz, double q, double fs_hz);

// Zero-phase (forward-backward) application of a biquad cascade with odd
// signal extension and steady-state initial conditions at both ends.
std::vector<double> sos_filtfilt(const std::vector<Biquad>& sections,
                                 const std::vector<double>& x);

// Band-pass plus notch, zero phase, applied per channel per trial.
EpochSet bandpass_notch(const EpochSet& x, const FilterSpec& spec);

}  // namespace fzp300
