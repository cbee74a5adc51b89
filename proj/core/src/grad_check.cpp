#include "fzp300/grad_check.hpp"

#include <cmath>

namespace fzp300 {

GradCheckReport finite_diff_check(std::span<const ParamRef> params,
                                  const std::function<double()>& loss_fn,
                                  double step) {
  if (step <= 0.0) throw ConfigError("finite_diff_check: step must be positive");
  GradCheckReport report;
  for (const ParamRef& p : params) {
    if (!p.slot->requires_grad) continue;
    Matrix& value = p.slot->value;
    const Matrix& analytic = p.slot->grad;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value.at(i);
      value.at(i) = saved + step;
      const double loss_plus = loss_fn();
      value.at(i) = saved - step;
      const double loss_minus = loss_fn();
      value.at(i) = saved;
      const double numeric = (loss_plus - loss_minus) / (2.0 * step);
      const double rel =
          std::fabs(analytic.at(i) - numeric) / std::max(1.0, std::fabs(numeric));
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p.name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace fzp300
