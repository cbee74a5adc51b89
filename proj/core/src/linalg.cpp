#include "fzp300/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fzp300 {

namespace {

constexpr int kMaxSweeps = 60;

// One-sided Jacobi on the columns of b (rows >= cols). Accumulates the
// right rotations into v. Returns the number of sweeps used.
int jacobi_orthogonalize(Matrix& b, Matrix& v) {
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  const double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          const double bi = b(r, i);
          const double bj = b(r, j);
          alpha += bi * bi;
          beta += bj * bj;
          gamma += bi * bj;
        }
        if (std::fabs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const double bi = b(r, i);
          const double bj = b(r, j);
          b(r, i) = c * bi - s * bj;
          b(r, j) = s * bi + c * bj;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vi = v(r, i);
          const double vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) return sweep;
  }
  throw NumericalError("SVD did not converge after " + std::to_string(kMaxSweeps) +
                       " Jacobi sweeps");
}

SvdResult svd_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix b = a;
  Matrix v = Matrix::identity(n);
  SvdResult out;
  out.sweeps = jacobi_orthogonalize(b, v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) acc += b(r, j) * b(r, j);
    sigma[j] = std::sqrt(acc);
  }

  // Stable descending sort keeps the ordering deterministic for ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  out.u = Matrix(m, n);
  out.v = Matrix(n, n);
  out.sigma.resize(n);
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t src = order[jj];
    out.sigma[jj] = sigma[src];
    if (sigma[src] > 0.0) {
      const double inv = 1.0 / sigma[src];
      for (std::size_t r = 0; r < m; ++r) out.u(r, jj) = b(r, src) * inv;
    }
    for (std::size_t r = 0; r < n; ++r) out.v(r, jj) = v(r, src);
  }
  return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.empty()) throw DimensionError("svd: empty matrix");
  if (a.rows() >= a.cols()) return svd_tall(a);
  // Wide case: factor the transpose and swap the orthogonal factors.
  SvdResult t = svd_tall(transpose(a));
  SvdResult out;
  out.u = std::move(t.v);
  out.v = std::move(t.u);
  out.sigma = std::move(t.sigma);
  out.sweeps = t.sweeps;
  return out;
}

Matrix pseudoinverse(const Matrix& p, double rel_tol) {
  if (p.empty()) throw DimensionError("pseudoinverse: empty matrix");
  if (rel_tol <= 0.0) throw ConfigError("pseudoinverse: rel_tol must be positive");
  const SvdResult f = svd(p);
  const double sigma_max = f.sigma.empty() ? 0.0 : f.sigma.front();
  const double cutoff =
      rel_tol * static_cast<double>(std::max(p.rows(), p.cols())) * sigma_max;

  // pinv = v * diag(1/sigma) * u^T, small singular values zeroed.
  const std::size_t k = f.sigma.size();
  Matrix vs(f.v.rows(), k);
  for (std::size_t j = 0; j < k; ++j) {
    if (f.sigma[j] > cutoff && f.sigma[j] > 0.0) {
      const double inv = 1.0 / f.sigma[j];
      for (std::size_t r = 0; r < vs.rows(); ++r) vs(r, j) = f.v(r, j) * inv;
    }
  }
  return matmul_transb(vs, f.u);
}

double condition_number(const Matrix& m) {
  const SvdResult f = svd(m);
  const double hi = f.sigma.front();
  const double lo = f.sigma.back();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace fzp300
