#pragma once

#include <vector>

#include "fzp300/matrix.hpp"

namespace fzp300 {

// Thin SVD a = u * diag(sigma) * v^T with sigma sorted descending.
// u is rows x k, v is cols x k, k = min(rows, cols). Columns of u that
// correspond to zero singular values are left as zero vectors.
struct SvdResult {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
  int sweeps = 0;
};

// One-sided Jacobi SVD. Deterministic pair ordering, suited to the small
// dense matrices this project works with. Throws NumericalError naming the
// sweep count if rotations have not converged.
SvdResult svd(const Matrix& a);

// Moore-Penrose pseudoinverse via SVD. Singular values at or below
// rel_tol * max(rows, cols) * sigma_max are zeroed.
Matrix pseudoinverse(const Matrix& p, double rel_tol = 1e-12);

// 2-norm condition number sigma_max / sigma_min (inf if rank deficient).
double condition_number(const Matrix& m);

}  // namespace fzp300
