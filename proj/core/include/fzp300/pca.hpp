#pragma once

#include <array>

#include "fzp300/matrix.hpp"

namespace fzp300 {

struct Pca2d {
  Matrix coords;                          // n_observations x 2
  std::array<double, 2> explained{0, 0};  // variance fractions, non-increasing
  Matrix components;                      // 2 x n_features (sign-fixed loadings)
};

// Principal-component projection of row observations to 2-D. Rows are
// mean-centered; the sign convention makes the largest-magnitude loading of
// each component positive, so results are deterministic.
Pca2d pca_embed_2d(const Matrix& observations);

}  // namespace fzp300
