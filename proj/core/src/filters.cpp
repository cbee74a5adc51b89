#include "fzp300/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace fzp300 {

namespace {

constexpr double kPi = 3.14159265358979323846;

using cplx = std::complex<double>;

// Direct form II transposed, one section, zero initial state.
void biquad_filter(const Biquad& s, const std::vector<double>& x, std::vector<double>& y) {
  double z1 = 0.0, z2 = 0.0;
  y.resize(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double in = x[n];
    const double out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    y[n] = out;
  }
}

std::vector<double> sos_forward(const std::vector<Biquad>& sections,
                                std::vector<double> x) {
  std::vector<double> y;
  for (const Biquad& s : sections) {
    biquad_filter(s, x, y);
    x.swap(y);
  }
  return x;
}

}  // namespace

std::vector<Biquad> design_butter_bandpass(std::size_t order, double low_hz,
                                           double high_hz, double fs_hz) {
  if (!(0.0 < low_hz && low_hz < high_hz && high_hz < fs_hz / 2.0)) {
    throw ConfigError("butterworth band [" + std::to_string(low_hz) + ", " +
                      std::to_string(high_hz) + "] Hz invalid at fs " +
                      std::to_string(fs_hz) + " Hz");
  }
  const double fs2 = 2.0 * fs_hz;
  // Bilinear prewarp of the band edges.
  const double wl = fs2 * std::tan(kPi * low_hz / fs_hz);
  const double wh = fs2 * std::tan(kPi * high_hz / fs_hz);
  const double w0sq = wl * wh;
  const double bw = wh - wl;

  // Analog band-pass poles: each Butterworth prototype pole p yields the two
  // roots of s^2 - bw*p*s + w0^2 = 0. Zeros: order at s=0 (k = bw^order).
  std::vector<cplx> poles;
  poles.reserve(2 * order);
  for (std::size_t i = 0; i < order; ++i) {
    const double theta = kPi / 2.0 + (2.0 * static_cast<double>(i) + 1.0) * kPi /
                                         (2.0 * static_cast<double>(order));
    const cplx p(std::cos(theta), std::sin(theta));
    const cplx disc = std::sqrt(bw * bw * p * p - 4.0 * w0sq);
    poles.push_back((bw * p + disc) / 2.0);
    poles.push_back((bw * p - disc) / 2.0);
  }

  // Bilinear transform; compute the digital gain from the pole/zero images.
  std::vector<cplx> zpoles;
  zpoles.reserve(poles.size());
  cplx denom(1.0, 0.0);
  for (const cplx& p : poles) {
    zpoles.push_back((fs2 + p) / (fs2 - p));
    denom *= (fs2 - p);
  }
  double num = 1.0;
  for (std::size_t i = 0; i < order; ++i) num *= bw * fs2;  // k * prod(fs2 - 0)
  const double k_digital = num / denom.real();

  // Pair conjugate poles into real-coefficient sections; each section takes
  // one digital zero at +1 and one at -1.
  std::vector<cplx> pending = zpoles;
  std::vector<Biquad> sections;
  const double imag_tol = 1e-12;
  while (!pending.empty()) {
    const cplx p = pending.back();
    pending.pop_back();
    double a1, a2;
    if (std::fabs(p.imag()) > imag_tol) {
      auto it = std::min_element(pending.begin(), pending.end(), [&](const cplx& a,
                                                                     const cplx& b) {
        return std::abs(a - std::conj(p)) < std::abs(b - std::conj(p));
      });
      const cplx q = *it;
      pending.erase(it);
      a1 = -(p + q).real();
      a2 = (p * q).real();
    } else {
      // Real pole: pair with the nearest remaining real pole.
      auto it = std::min_element(pending.begin(), pending.end(), [](const cplx& a,
                                                                    const cplx& b) {
        return std::fabs(a.imag()) < std::fabs(b.imag());
      });
      const cplx q = *it;
      pending.erase(it);
      a1 = -(p.real() + q.real());
      a2 = p.real() * q.real();
    }
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;  // zeros at +1 and -1
    s.a1 = a1;
    s.a2 = a2;
    sections.push_back(s);
  }
  // Whole-cascade gain on the first section.
  sections.front().b0 *= k_digital;
  sections.front().b1 *= k_digital;
  sections.front().b2 *= k_digital;
  return sections;
}

Biquad design_notch(double f0_hz, double q, double fs_hz) {
  if (!(0.0 < f0_hz && f0_hz < fs_hz / 2.0)) {
    throw ConfigError("notch frequency " + std::to_string(f0_hz) +
                      " Hz outside (0, Nyquist)");
  }
  const double w0 = 2.0 * kPi * f0_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

std::vector<double> sos_filtfilt(const std::vector<Biquad>& sections,
                                 const std::vector<double>& x) {
  if (x.empty()) return {};

  // The constant component goes through the cascade exactly (gain^2 for
  // the two passes); only the demeaned remainder is filtered numerically.
  // This keeps very-low-frequency poles from ringing on short signals.
  double level = 0.0;
  for (double v : x) level += v;
  level /= static_cast<double>(x.size());
  double dc_gain = 1.0;
  for (const Biquad& s : sections) dc_gain *= s.gain_at_dc();
  const double restored = dc_gain * dc_gain * level;

  const std::size_t pad_want = 3 * (2 * sections.size() + 1);
  const std::size_t padlen = std::min(pad_want, x.size() - 1);

  // Mirror extension of the demeaned signal at both ends; mirroring keeps
  // the local level at the edges, which is what the slow poles respond to.
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(x[i] - level);
  for (double v : x) ext.push_back(v - level);
  for (std::size_t i = 1; i <= padlen; ++i) {
    ext.push_back(x[x.size() - 1 - i] - level);
  }

  std::vector<double> fwd = sos_forward(sections, std::move(ext));
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = sos_forward(sections, std::move(fwd));
  std::reverse(bwd.begin(), bwd.end());

  std::vector<double> out(bwd.begin() + static_cast<std::ptrdiff_t>(padlen),
                          bwd.begin() + static_cast<std::ptrdiff_t>(padlen + x.size()));
  if (restored != 0.0) {
    for (double& v : out) v += restored;
  }
  return out;
}

EpochSet bandpass_notch(const EpochSet& x, const FilterSpec& spec) {
  spec.validate(x.sample_rate_hz);
  std::vector<Biquad> cascade =
      design_butter_bandpass(spec.filter_order, spec.band_low_hz, spec.band_high_hz,
                             x.sample_rate_hz);
  cascade.push_back(design_notch(spec.notch_hz, spec.notch_q, x.sample_rate_hz));

  EpochSet out = x;
  std::vector<double> row(x.n_samples);
  for (Matrix& trial : out.trials) {
    for (std::size_t c = 0; c < x.n_channels; ++c) {
      const double* src = trial.row(c);
      row.assign(src, src + x.n_samples);
      const std::vector<double> filtered = sos_filtfilt(cascade, row);
      std::copy(filtered.begin(), filtered.end(), trial.row(c));
    }
  }
  return out;
}

}  // namespace fzp300
