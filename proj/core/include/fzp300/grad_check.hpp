#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fzp300/matrix.hpp"

namespace fzp300 {

// Named parameter group visited by the checker.
struct ParamRef {
  std::string name;
  GradSlot* slot = nullptr;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

// Central-difference check of already-accumulated analytic gradients.
// `loss_fn` must re-evaluate the scalar loss from the current parameter
// values with no stochastic parts (evaluation mode, dropout off).
// Relative error per entry is |analytic - numeric| / max(1, |numeric|);
// the maximum over all entries of all groups is returned. An empty
// parameter list yields 0.
GradCheckReport finite_diff_check(std::span<const ParamRef> params,
                                  const std::function<double()>& loss_fn,
                                  double step);

}  // namespace fzp300
