#include <doctest.h>

#include <cmath>
#include <vector>

#include "fzp300/filters.hpp"

using namespace fzp300;

namespace {

constexpr double kPi = 3.14159265358979323846;

EpochSet one_channel_set(std::vector<double> signal, double fs) {
  EpochSet x;
  x.n_channels = 1;
  x.n_samples = signal.size();
  x.sample_rate_hz = fs;
  x.t0_s = -0.5 * static_cast<double>(signal.size()) / fs;
  Matrix trial(1, signal.size());
  std::copy(signal.begin(), signal.end(), trial.row(0));
  x.trials.push_back(std::move(trial));
  x.labels.push_back(0);
  return x;
}

std::vector<double> sinusoid(double freq, double fs, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::sin(2.0 * kPi * freq * static_cast<double>(i) / fs);
  }
  return out;
}

// RMS over the central half of the signal (transient trim).
double central_rms(const std::vector<double>& x) {
  const std::size_t lo = x.size() / 4;
  const std::size_t hi = x.size() - x.size() / 4;
  double acc = 0.0;
  for (std::size_t i = lo; i < hi; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(hi - lo));
}

std::vector<double> filtered_row(const EpochSet& x) {
  const Matrix& trial = x.trials.front();
  return {trial.row(0), trial.row(0) + x.n_samples};
}

const FilterSpec kDefaultSpec{};  // 0.1-30 Hz order 4, 50 Hz notch Q 30

}  // namespace

TEST_CASE("DC input is removed") {
  const double fs = 256.0;
  const EpochSet x = one_channel_set(std::vector<double>(1024, 5.0), fs);
  const EpochSet y = bandpass_notch(x, kDefaultSpec);
  const std::vector<double> out = filtered_row(y);
  double mx = 0.0;
  const std::size_t lo = out.size() / 4, hi = out.size() - out.size() / 4;
  for (std::size_t i = lo; i < hi; ++i) mx = std::max(mx, std::fabs(out[i]));
  CHECK(mx < 0.05);  // < 1% of the 5.0 input
}

TEST_CASE("50 Hz line noise is notched out") {
  const double fs = 256.0;
  const std::vector<double> sig = sinusoid(50.0, fs, 2048);
  const double rms_in = central_rms(sig);
  const EpochSet y = bandpass_notch(one_channel_set(sig, fs), kDefaultSpec);
  const double rms_out = central_rms(filtered_row(y));
  CHECK(rms_out < 0.05 * rms_in);
}

TEST_CASE("10 Hz mid-band passes essentially unchanged") {
  const double fs = 256.0;
  const std::vector<double> sig = sinusoid(10.0, fs, 2048);
  const double rms_in = central_rms(sig);
  const EpochSet y = bandpass_notch(one_channel_set(sig, fs), kDefaultSpec);
  const double rms_out = central_rms(filtered_row(y));
  CHECK(rms_out == doctest::Approx(rms_in).epsilon(0.10));
}

TEST_CASE("band edges beyond Nyquist are a configuration error") {
  const EpochSet x = one_channel_set(std::vector<double>(64, 0.0), 50.0);
  FilterSpec spec;
  spec.band_high_hz = 30.0;  // Nyquist is 25
  CHECK_THROWS_AS(bandpass_notch(x, spec), ConfigError);
  FilterSpec notch_bad;
  notch_bad.band_high_hz = 20.0;
  notch_bad.notch_hz = 50.0;
  CHECK_THROWS_AS(bandpass_notch(x, notch_bad), ConfigError);
}

TEST_CASE("filtering is linear") {
  const double fs = 256.0;
  const std::size_t n = 512;
  std::vector<double> xa = sinusoid(7.0, fs, n);
  std::vector<double> xb = sinusoid(21.0, fs, n);
  const double ca = 2.5, cb = -1.25;
  std::vector<double> combo(n);
  for (std::size_t i = 0; i < n; ++i) combo[i] = ca * xa[i] + cb * xb[i];

  std::vector<Biquad> cascade = design_butter_bandpass(4, 0.1, 30.0, fs);
  cascade.push_back(design_notch(50.0, 30.0, fs));

  const std::vector<double> ya = sos_filtfilt(cascade, xa);
  const std::vector<double> yb = sos_filtfilt(cascade, xb);
  const std::vector<double> yc = sos_filtfilt(cascade, combo);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::fabs(yc[i] - (ca * ya[i] + cb * yb[i])) <= 1e-9);
  }
}

TEST_CASE("zero phase: a symmetric pulse stays symmetric about its center") {
  const double fs = 256.0;
  const std::size_t n = 1024;
  const std::size_t center = n / 2;
  std::vector<double> pulse(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = (static_cast<double>(i) - static_cast<double>(center)) / fs;
    pulse[i] = std::exp(-dt * dt / (2.0 * 0.05 * 0.05));
  }
  std::vector<Biquad> cascade = design_butter_bandpass(4, 0.1, 30.0, fs);
  cascade.push_back(design_notch(50.0, 30.0, fs));
  const std::vector<double> y = sos_filtfilt(cascade, pulse);

  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (y[i] > y[peak]) peak = i;
  }
  CHECK(std::llabs(static_cast<long long>(peak) - static_cast<long long>(center)) <= 1);

  double peak_val = y[peak];
  double asym = 0.0;
  for (std::size_t k = 1; k < 128; ++k) {
    asym = std::max(asym, std::fabs(y[center + k] - y[center - k]));
  }
  CHECK(asym <= 0.02 * peak_val);
}

TEST_CASE("output shape equals input shape") {
  const double fs = 128.0;
  EpochSet x = one_channel_set(sinusoid(5.0, fs, 300), fs);
  const EpochSet y = bandpass_notch(x, kDefaultSpec);
  CHECK(y.n_samples == x.n_samples);
  CHECK(y.n_channels == x.n_channels);
  CHECK(y.n_trials() == x.n_trials());
}

TEST_CASE("biquad cascade is stable (poles inside unit circle by design)") {
  // Indirect check: impulse response decays.
  std::vector<double> impulse(4096, 0.0);
  impulse[0] = 1.0;
  std::vector<Biquad> cascade = design_butter_bandpass(4, 0.1, 30.0, 256.0);
  const std::vector<double> y = sos_filtfilt(cascade, impulse);
  double tail = 0.0;
  for (std::size_t i = 3500; i < y.size(); ++i) tail = std::max(tail, std::fabs(y[i]));
  CHECK(tail < 1e-3);
}
