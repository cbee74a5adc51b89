#include "fzp300/fuzzy.hpp"

#include <algorithm>
#include <cmath>

namespace fzp300 {

namespace fuzzy_detail {

std::vector<double> column_mean(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(m.rows());
  for (double& v : out) v *= inv;
  return out;
}

std::vector<double> row_mean(const Matrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  const double inv = 1.0 / static_cast<double>(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c];
    out[r] = acc * inv;
  }
  return out;
}

Matrix query_summaries(std::span<const double> pooled, const FuzzyRuleBank& bank) {
  Matrix queries(bank.n_rules, bank.latent_dim);
  for (std::size_t k = 0; k < bank.n_rules; ++k) {
    const Matrix& w = bank.query_proj[k].value;
    const Matrix& b = bank.query_bias[k].value;
    double* out = queries.row(k);
    for (std::size_t q = 0; q < bank.latent_dim; ++q) {
      const double* wrow = w.row(q);
      double acc = b.at(q);
      for (std::size_t i = 0; i < bank.in_dim; ++i) acc += wrow[i] * pooled[i];
      out[q] = acc;
    }
  }
  return queries;
}

void activations(const Matrix& queries, const FuzzyRuleBank& bank,
                 std::vector<double>& rho, std::vector<double>& pi, bool& floored) {
  rho.resize(bank.n_rules);
  for (std::size_t k = 0; k < bank.n_rules; ++k) {
    const double* h = queries.row(k);
    double expo = 0.0;
    for (std::size_t q = 0; q < bank.latent_dim; ++q) {
      const double d = h[q] - bank.centers.value(k, q);
      const double w = bank.width(k, q);
      expo += d * d / (2.0 * w * w);
    }
    rho[k] = std::exp(-expo);
  }
  double denom = 0.0;
  for (double r : rho) denom += r;
  floored = denom < kRuleDenomFloor;
  if (floored) denom = kRuleDenomFloor;
  pi.resize(bank.n_rules);
  for (std::size_t k = 0; k < bank.n_rules; ++k) pi[k] = rho[k] / denom;
}

void blend_value_proj_into(const FuzzyRuleBank& bank, std::span<const double> pi,
                           Matrix& out) {
  out.reset(bank.out_dim, bank.in_dim);
  double* __restrict__ dst = out.data();
  const std::size_t n = out.size();
  for (std::size_t k = 0; k < bank.n_rules; ++k) {
    const double pi_k = pi[k];
    const double* __restrict__ src = bank.value_proj[k].value.data();
    if (k == 0) {
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) dst[j] = pi_k * src[j];
    } else {
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) dst[j] += pi_k * src[j];
    }
  }
}

}  // namespace fuzzy_detail

namespace {

FilterTrace make_trace(std::span<const double> pooled, Matrix queries,
                       std::vector<double> rho, std::vector<double> pi, bool floored) {
  FilterTrace trace;
  trace.pooled.assign(pooled.begin(), pooled.end());
  trace.queries = std::move(queries);
  trace.rho = std::move(rho);
  trace.pi = std::move(pi);
  trace.denom_floored = floored;
  return trace;
}

}  // namespace

double FuzzyRuleBank::width(std::size_t rule, std::size_t q) const {
  return std::max(std::exp(log_widths.value(rule, q)), kMinRuleWidth);
}

std::vector<double> rule_activation(std::span<const double> h, const FuzzyRuleBank& bank) {
  if (h.size() != bank.latent_dim) {
    throw DimensionError("rule_activation: latent vector length " +
                         std::to_string(h.size()) + ", bank expects " +
                         std::to_string(bank.latent_dim));
  }
  std::vector<double> rho(bank.n_rules);
  for (std::size_t k = 0; k < bank.n_rules; ++k) {
    double expo = 0.0;
    for (std::size_t q = 0; q < bank.latent_dim; ++q) {
      const double d = h[q] - bank.centers.value(k, q);
      const double w = bank.width(k, q);
      expo += d * d / (2.0 * w * w);
    }
    rho[k] = std::exp(-expo);
  }
  return rho;
}

std::vector<double> normalize_rules(std::span<const double> rho) {
  double denom = 0.0;
  for (double r : rho) {
    if (r < 0.0) throw ConfigError("normalize_rules: negative activation");
    denom += r;
  }
  denom = std::max(denom, kRuleDenomFloor);
  std::vector<double> pi(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) pi[k] = rho[k] / denom;
  return pi;
}

Matrix spatial_filter(const Matrix& x, const FuzzyRuleBank& bank, FilterTrace* trace) {
  if (x.rows() != bank.in_dim) {
    throw DimensionError("spatial_filter: trial " + x.shape_str() + ", bank expects " +
                         std::to_string(bank.in_dim) + " channels");
  }
  const std::vector<double> pooled = fuzzy_detail::row_mean(x);  // time-mean per channel
  Matrix queries = fuzzy_detail::query_summaries(pooled, bank);
  std::vector<double> rho, pi;
  bool floored = false;
  fuzzy_detail::activations(queries, bank, rho, pi, floored);

  Matrix blended;
  fuzzy_detail::blend_value_proj_into(bank, pi, blended);
  if (trace != nullptr) {
    *trace = make_trace(pooled, std::move(queries), std::move(rho), std::move(pi),
                        floored);
  }
  return matmul(blended, x);
}

Matrix temporal_filter(const Matrix& h, const FuzzyRuleBank& bank, FilterTrace* trace) {
  if (h.cols() != bank.in_dim) {
    throw DimensionError("temporal_filter: input " + h.shape_str() + ", bank expects " +
                         std::to_string(bank.in_dim) + " samples");
  }
  const std::vector<double> pooled = fuzzy_detail::column_mean(h);  // channel-mean
  Matrix queries = fuzzy_detail::query_summaries(pooled, bank);
  std::vector<double> rho, pi;
  bool floored = false;
  fuzzy_detail::activations(queries, bank, rho, pi, floored);

  Matrix blended;
  fuzzy_detail::blend_value_proj_into(bank, pi, blended);
  if (trace != nullptr) {
    *trace = make_trace(pooled, std::move(queries), std::move(rho), std::move(pi),
                        floored);
  }
  // Projections act on the sample axis of the transposed input, which is
  // h * blended^T in the untransposed layout.
  return matmul_transb(h, blended);
}

}  // namespace fzp300
