#include "fzp300/pca.hpp"

#include <cmath>

#include "fzp300/linalg.hpp"

namespace fzp300 {

Pca2d pca_embed_2d(const Matrix& observations) {
  if (observations.rows() < 2) {
    throw ConfigError("pca_embed_2d: need at least 2 observations");
  }
  const std::size_t n = observations.rows();
  const std::size_t d = observations.cols();

  Matrix centered = observations;
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += centered(r, c);
    m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) centered(r, c) -= m;
  }

  const SvdResult f = svd(centered);

  double total = 0.0;
  for (double s : f.sigma) total += s * s;

  Pca2d out;
  out.coords = Matrix(n, 2);
  out.components = Matrix(2, d);
  for (std::size_t comp = 0; comp < 2 && comp < f.sigma.size(); ++comp) {
    if (total > 0.0) out.explained[comp] = f.sigma[comp] * f.sigma[comp] / total;

    // Sign convention: flip so the largest-magnitude loading is positive.
    double best = 0.0;
    double sign = 1.0;
    for (std::size_t r = 0; r < d; ++r) {
      const double v = f.v(r, comp);
      if (std::fabs(v) > best) {
        best = std::fabs(v);
        sign = v < 0.0 ? -1.0 : 1.0;
      }
    }
    for (std::size_t r = 0; r < d; ++r) out.components(comp, r) = sign * f.v(r, comp);
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += centered(r, c) * f.v(c, comp);
      out.coords(r, comp) = sign * acc;
    }
  }
  return out;
}

}  // namespace fzp300
