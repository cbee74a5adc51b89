#include <doctest.h>

#include <cmath>

#include "fzp300/linalg.hpp"
#include "fzp300/rng.hpp"

using namespace fzp300;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

// Oracle: inverse by Gauss-Jordan elimination with partial pivoting.
Matrix gauss_inverse(Matrix a) {
  const std::size_t n = a.rows();
  REQUIRE(a.cols() == n);
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    }
    REQUIRE(std::fabs(a(pivot, col)) > 1e-12);
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a(pivot, c), a(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const double scale = 1.0 / a(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      a(col, c) *= scale;
      inv(col, c) *= scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= factor * a(col, c);
        inv(r, c) -= factor * inv(col, c);
      }
    }
  }
  return inv;
}

}  // namespace

TEST_CASE("svd reconstructs the input") {
  Rng rng(100);
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{5, 3}, {3, 5}, {4, 4}}) {
    const Matrix a = random_matrix(rows, cols, rng);
    const SvdResult f = svd(a);
    Matrix sigma_v(f.sigma.size(), f.v.rows());
    for (std::size_t i = 0; i < f.sigma.size(); ++i) {
      for (std::size_t j = 0; j < f.v.rows(); ++j) sigma_v(i, j) = f.sigma[i] * f.v(j, i);
    }
    const Matrix back = matmul(f.u, sigma_v);
    CHECK(max_abs(back - a) <= 1e-10);
    for (std::size_t i = 1; i < f.sigma.size(); ++i) CHECK(f.sigma[i - 1] >= f.sigma[i]);
  }
}

TEST_CASE("pseudoinverse of a diagonal matrix") {
  const Matrix d(2, 2, {2, 0, 0, 4});
  const Matrix pinv = pseudoinverse(d);
  CHECK(pinv(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pinv(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::fabs(pinv(0, 1)) <= 1e-12);
  CHECK(std::fabs(pinv(1, 0)) <= 1e-12);
}

TEST_CASE("pseudoinverse of a rank-deficient projector is itself") {
  const Matrix p(2, 2, {1, 0, 0, 0});
  const Matrix pinv = pseudoinverse(p);
  CHECK(max_abs(pinv - p) <= 1e-12);
}

TEST_CASE("pseudoinverse matches Gaussian-elimination inverse on full-rank 4x4") {
  Rng rng(200);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix a = random_matrix(4, 4, rng);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) += 3.0;  // keep well-conditioned
    const Matrix want = gauss_inverse(a);
    const Matrix got = pseudoinverse(a);
    CHECK(max_abs(got - want) <= 1e-9);
  }
}

TEST_CASE("Penrose conditions on 100 random matrices up to 8x8") {
  Rng rng(300);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t rows = 1 + rng.below(8);
    const std::size_t cols = 1 + rng.below(8);
    Matrix p = random_matrix(rows, cols, rng);
    // A third of the cases get an exactly repeated column (rank deficiency).
    if (rep % 3 == 0 && cols >= 2) {
      for (std::size_t r = 0; r < rows; ++r) p(r, cols - 1) = p(r, 0);
    }
    const Matrix pinv = pseudoinverse(p);
    CHECK(max_abs(matmul(matmul(p, pinv), p) - p) <= 1e-9);
    CHECK(max_abs(matmul(matmul(pinv, p), pinv) - pinv) <= 1e-9);
    // Symmetry conditions.
    const Matrix ppi = matmul(p, pinv);
    CHECK(max_abs(ppi - transpose(ppi)) <= 1e-9);
    const Matrix pip = matmul(pinv, p);
    CHECK(max_abs(pip - transpose(pip)) <= 1e-9);
  }
}

TEST_CASE("pseudoinverse rejects bad tolerance and empty input") {
  CHECK_THROWS_AS(pseudoinverse(Matrix(2, 2), -1.0), ConfigError);
  CHECK_THROWS_AS(pseudoinverse(Matrix()), DimensionError);
}

TEST_CASE("condition number of identity is 1") {
  CHECK(condition_number(Matrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix p(2, 2, {1, 0, 0, 0});
  CHECK(std::isinf(condition_number(p)));
}
