#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fzp300/matrix.hpp"

namespace fzp300 {

// Effective Gaussian widths are floored at this value inside the
// activation, keeping every prototype proper and gradients bounded.
inline constexpr double kMinRuleWidth = 1e-3;
// Floor on the rule-activation normalizer.
inline constexpr double kRuleDenomFloor = 1e-12;

// One bank of learnable fuzzy rules plus their per-rule projections.
// in_dim is the axis the bank projects (channels for the spatial filter,
// samples for the temporal filter); out_dim is the projected output axis.
struct FuzzyRuleBank {
  std::size_t n_rules = 0;     // K
  std::size_t latent_dim = 0;  // Q
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;

  GradSlot centers;     // K x Q
  GradSlot log_widths;  // K x Q, effective width = max(exp(w), kMinRuleWidth)

  std::vector<GradSlot> query_proj;  // per rule, Q x in_dim
  std::vector<GradSlot> query_bias;  // per rule, Q x 1
  std::vector<GradSlot> value_proj;  // per rule, out_dim x in_dim

  double width(std::size_t rule, std::size_t q) const;
};

// Gaussian prototype activation: rho_k = exp(-sum_q (h_q - mu_kq)^2 / (2 d_kq^2)).
std::vector<double> rule_activation(std::span<const double> h, const FuzzyRuleBank& bank);

// Convex rule weights pi_k = rho_k / max(sum_j rho_j, kRuleDenomFloor).
std::vector<double> normalize_rules(std::span<const double> rho);

// Intermediates of one filter application kept for backward and inspection.
struct FilterTrace {
  std::vector<double> pooled;  // mean over the non-projected axis
  Matrix queries;              // K x Q latent summaries, one row per rule
  std::vector<double> rho;     // raw activations
  std::vector<double> pi;      // normalized weights
  bool denom_floored = false;
};

// Spatial fuzzy filter on one trial x (C x T): per-trial rule weights from
// the time-pooled query, output H = sum_k pi_k * (value_proj_k x).
Matrix spatial_filter(const Matrix& x, const FuzzyRuleBank& bank,
                      FilterTrace* trace = nullptr);

// Temporal fuzzy filter on the spatial output h (C_out x T): projections act
// along the sample axis, the query pools over channels, output is
// C_out x T_out.
Matrix temporal_filter(const Matrix& h, const FuzzyRuleBank& bank,
                       FilterTrace* trace = nullptr);

// Building blocks shared between the standalone filters above and the
// model's fused forward/backward path.
namespace fuzzy_detail {

std::vector<double> row_mean(const Matrix& m);
std::vector<double> column_mean(const Matrix& m);

// Row k of the result is query_proj_k * pooled + query_bias_k.
Matrix query_summaries(std::span<const double> pooled, const FuzzyRuleBank& bank);

// Raw and normalized rule weights from per-rule query summaries.
void activations(const Matrix& queries, const FuzzyRuleBank& bank,
                 std::vector<double>& rho, std::vector<double>& pi, bool& floored);

// out = sum_k pi_k * value_proj_k, reusing out's storage.
void blend_value_proj_into(const FuzzyRuleBank& bank, std::span<const double> pi,
                           Matrix& out);

}  // namespace fuzzy_detail

}  // namespace fzp300
