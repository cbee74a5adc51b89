#include "fzp300/model.hpp"

#include <algorithm>
#include <cmath>

namespace fzp300 {

namespace {

double clamp_prob(double p, bool* clamped) {
  if (p < kProbClamp) {
    if (clamped != nullptr) *clamped = true;
    return kProbClamp;
  }
  if (p > 1.0 - kProbClamp) {
    if (clamped != nullptr) *clamped = true;
    return 1.0 - kProbClamp;
  }
  return p;
}

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

FuzzyRuleBank make_bank(std::size_t n_rules, std::size_t latent_dim, std::size_t in_dim,
                        std::size_t out_dim, Rng& rng) {
  FuzzyRuleBank bank;
  bank.n_rules = n_rules;
  bank.latent_dim = latent_dim;
  bank.in_dim = in_dim;
  bank.out_dim = out_dim;

  Matrix centers(n_rules, latent_dim);
  const double center_scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  for (double& v : centers.values()) v = rng.normal() * center_scale;
  bank.centers = GradSlot(std::move(centers));
  bank.log_widths = GradSlot(Matrix(n_rules, latent_dim));

  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  bank.query_proj.reserve(n_rules);
  bank.query_bias.reserve(n_rules);
  bank.value_proj.reserve(n_rules);
  for (std::size_t k = 0; k < n_rules; ++k) {
    Matrix wq(latent_dim, in_dim);
    for (double& v : wq.values()) v = rng.uniform(-bound, bound);
    bank.query_proj.emplace_back(std::move(wq));
    Matrix bq(latent_dim, 1);
    for (double& v : bq.values()) v = rng.uniform(-bound, bound);
    bank.query_bias.emplace_back(std::move(bq));
    Matrix wv(out_dim, in_dim);
    for (double& v : wv.values()) v = rng.uniform(-bound, bound);
    bank.value_proj.emplace_back(std::move(wv));
  }
  return bank;
}

void bank_params(const std::string& prefix, FuzzyRuleBank& bank,
                 std::vector<ParamRef>& out) {
  out.push_back({prefix + ".centers", &bank.centers});
  out.push_back({prefix + ".log_widths", &bank.log_widths});
  for (std::size_t k = 0; k < bank.n_rules; ++k) {
    const std::string rule = prefix + ".rule" + std::to_string(k);
    out.push_back({rule + ".query_proj", &bank.query_proj[k]});
    out.push_back({rule + ".query_bias", &bank.query_bias[k]});
    out.push_back({rule + ".value_proj", &bank.value_proj[k]});
  }
}

// Gradient of the normalized weights with respect to raw activations,
// contracted with an incoming gradient: returns g_rho from g_pi.
std::vector<double> normalize_backward(const FilterTrace& trace,
                                       std::span<const double> g_pi) {
  const std::size_t k = trace.rho.size();
  std::vector<double> g_rho(k, 0.0);
  if (trace.denom_floored) {
    for (std::size_t i = 0; i < k; ++i) g_rho[i] = g_pi[i] / kRuleDenomFloor;
    return g_rho;
  }
  double denom = 0.0;
  for (double r : trace.rho) denom += r;
  double dot = 0.0;
  for (std::size_t i = 0; i < k; ++i) dot += g_pi[i] * trace.pi[i];
  for (std::size_t i = 0; i < k; ++i) g_rho[i] = (g_pi[i] - dot) / denom;
  return g_rho;
}

}  // namespace

void ModelDims::validate() const {
  if (n_channels == 0 || n_samples == 0) throw ConfigError("model dims: empty input");
  if (spatial_rules == 0 || temporal_rules == 0) {
    throw ConfigError("model dims: need at least one rule per filter");
  }
  if (latent_dim == 0 || hidden == 0) throw ConfigError("model dims: zero width");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ConfigError("model dims: dropout must lie in [0, 1)");
  }
}

double bce_loss(std::span<const double> p_hat, std::span<const std::uint8_t> labels) {
  if (p_hat.size() != labels.size()) {
    throw DimensionError("bce_loss: " + std::to_string(p_hat.size()) +
                         " probabilities vs " + std::to_string(labels.size()) + " labels");
  }
  if (p_hat.empty()) throw ConfigError("bce_loss: empty batch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    const double p = clamp_prob(p_hat[i], nullptr);
    acc += labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return -acc / static_cast<double>(p_hat.size());
}

FuzzyModel::FuzzyModel(const ModelDims& dims, std::uint64_t seed)
    : dims_(dims), init_seed_(seed), dropout_rng_(seed ^ 0x9e3779b97f4a7c15ull) {
  dims_.validate();
  Rng rng(seed);
  spatial_ = make_bank(dims_.spatial_rules, dims_.latent_dim, dims_.n_channels,
                       dims_.out_channels(), rng);
  temporal_ = make_bank(dims_.temporal_rules, dims_.latent_dim, dims_.n_samples,
                        dims_.out_samples(), rng);

  const std::size_t d = dims_.head_input();
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix w1(dims_.hidden, d);
  for (double& v : w1.values()) v = rng.uniform(-bound1, bound1);
  head_w1_ = GradSlot(std::move(w1));
  Matrix b1(dims_.hidden, 1);
  for (double& v : b1.values()) v = rng.uniform(-bound1, bound1);
  head_b1_ = GradSlot(std::move(b1));

  const double bound2 = 1.0 / std::sqrt(static_cast<double>(dims_.hidden));
  Matrix w2(1, dims_.hidden);
  for (double& v : w2.values()) v = rng.uniform(-bound2, bound2);
  head_w2_ = GradSlot(std::move(w2));
  Matrix b2(1, 1);
  b2.at(0) = rng.uniform(-bound2, bound2);
  head_b2_ = GradSlot(std::move(b2));
}

double FuzzyModel::forward_one(const Matrix& x, TrialState* state, ForwardTrace* trace,
                               Rng* dropout_rng, Workspace& ws) const {
  if (x.rows() != dims_.n_channels || x.cols() != dims_.n_samples) {
    throw DimensionError("forward: trial " + x.shape_str() + ", model expects " +
                         std::to_string(dims_.n_channels) + "x" +
                         std::to_string(dims_.n_samples));
  }
  namespace fd = fuzzy_detail;

  FilterTrace sp;
  sp.pooled = fd::row_mean(x);
  sp.queries = fd::query_summaries(sp.pooled, spatial_);
  fd::activations(sp.queries, spatial_, sp.rho, sp.pi, sp.denom_floored);
  fd::blend_value_proj_into(spatial_, sp.pi, ws.blended);
  Matrix hs;
  matmul_into(ws.blended, x, hs);

  FilterTrace tm;
  tm.pooled = fd::column_mean(hs);
  tm.queries = fd::query_summaries(tm.pooled, temporal_);
  fd::activations(tm.queries, temporal_, tm.rho, tm.pi, tm.denom_floored);
  fd::blend_value_proj_into(temporal_, tm.pi, ws.blended);
  Matrix ht;
  matmul_transb_into(hs, ws.blended, ht);

  // Head: flatten row-major, affine -> ReLU -> dropout -> affine -> sigmoid.
  const std::size_t d = dims_.head_input();
  const std::size_t hidden = dims_.hidden;
  const double* f = ht.data();
  std::vector<double> z1(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double* __restrict__ wrow = head_w1_.value.row(j);
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < d; ++i) acc += wrow[i] * f[i];
    z1[j] = head_b1_.value.at(j) + acc;
  }

  std::vector<double> drop_scale;
  const bool use_dropout = dropout_rng != nullptr && dims_.dropout > 0.0;
  if (use_dropout) {
    drop_scale.resize(hidden);
    const double keep = 1.0 - dims_.dropout;
    for (std::size_t j = 0; j < hidden; ++j) {
      drop_scale[j] = dropout_rng->uniform() < dims_.dropout ? 0.0 : 1.0 / keep;
    }
  }

  double logit = head_b2_.value.at(0);
  const double* w2 = head_w2_.value.data();
  for (std::size_t j = 0; j < hidden; ++j) {
    double a = z1[j] > 0.0 ? z1[j] : 0.0;
    if (use_dropout) a *= drop_scale[j];
    logit += w2[j] * a;
  }
  bool clamped = false;
  const double p = clamp_prob(sigmoid(logit), &clamped);

  if (trace != nullptr) {
    trace->spatial = sp;
    trace->temporal = tm;
    trace->h_spatial = hs;
    trace->h_temporal = ht;
    trace->logit = logit;
    trace->p_hat = p;
  }
  if (state != nullptr) {
    state->x = &x;
    state->sp = std::move(sp);
    state->hs = std::move(hs);
    state->tm = std::move(tm);
    state->ht = std::move(ht);
    state->z1 = std::move(z1);
    state->drop_scale = std::move(drop_scale);
    state->p_hat = p;
    state->clamped = clamped;
  }
  return p;
}

double FuzzyModel::forward(const Matrix& x, ForwardTrace* trace) {
  Rng* dropout = mode_ == Mode::training ? &dropout_rng_ : nullptr;
  return forward_one(x, nullptr, trace, dropout, ws_);
}

double FuzzyModel::predict(const Matrix& x, ForwardTrace* trace) const {
  Workspace local;
  return forward_one(x, nullptr, trace, nullptr, local);
}

std::vector<double> FuzzyModel::predict_batch(std::span<const Matrix* const> trials) const {
  Workspace local;
  std::vector<double> probs;
  probs.reserve(trials.size());
  for (const Matrix* x : trials) {
    probs.push_back(forward_one(*x, nullptr, nullptr, nullptr, local));
  }
  return probs;
}

BatchOutput FuzzyModel::forward_batch(std::span<const Matrix* const> trials,
                                      std::span<const std::uint8_t> labels) {
  if (trials.size() != labels.size()) {
    throw DimensionError("forward_batch: " + std::to_string(trials.size()) +
                         " trials vs " + std::to_string(labels.size()) + " labels");
  }
  if (trials.empty()) throw ConfigError("forward_batch: empty batch");

  const bool training = mode_ == Mode::training;
  BatchOutput out;
  out.probs.reserve(trials.size());
  if (training) {
    pending_trials_.clear();
    pending_trials_.resize(trials.size());
    pending_labels_.assign(labels.begin(), labels.end());
  }
  Rng* dropout = training ? &dropout_rng_ : nullptr;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    TrialState* state = training ? &pending_trials_[i] : nullptr;
    out.probs.push_back(forward_one(*trials[i], state, nullptr, dropout, ws_));
  }
  out.loss = bce_loss(out.probs, labels);
  pending_ = training;
  return out;
}

void FuzzyModel::backward() {
  if (!pending_) {
    throw StateError("backward without a preceding training forward pass");
  }
  pending_ = false;

  const double inv_m = 1.0 / static_cast<double>(pending_trials_.size());
  for (std::size_t i = 0; i < pending_trials_.size(); ++i) {
    const TrialState& st = pending_trials_[i];
    // d(mean BCE)/d(logit); zero where the probability clamp was active.
    const double g_logit =
        st.clamped ? 0.0 : (st.p_hat - static_cast<double>(pending_labels_[i])) * inv_m;
    backward_one(st, g_logit);
  }
  pending_trials_.clear();
  pending_labels_.clear();
}

void FuzzyModel::backward_one(const TrialState& st, double g_logit) {
  const std::size_t d = dims_.head_input();
  const std::size_t hidden = dims_.hidden;
  const bool use_dropout = !st.drop_scale.empty();

  // Head backward.
  std::vector<double> g_z1(hidden);
  {
    double* g_w2 = head_w2_.grad.data();
    const double* w2 = head_w2_.value.data();
    for (std::size_t j = 0; j < hidden; ++j) {
      double a = st.z1[j] > 0.0 ? st.z1[j] : 0.0;
      if (use_dropout) a *= st.drop_scale[j];
      g_w2[j] += g_logit * a;
      double g_a = g_logit * w2[j];
      if (use_dropout) g_a *= st.drop_scale[j];
      g_z1[j] = st.z1[j] > 0.0 ? g_a : 0.0;
    }
    head_b2_.grad.at(0) += g_logit;
  }

  ws_.g_ht.reset(dims_.out_channels(), dims_.out_samples());
  {
    const double* f = st.ht.data();
    double* g_f = ws_.g_ht.data();
    for (std::size_t j = 0; j < hidden; ++j) {
      const double gz = g_z1[j];
      head_b1_.grad.at(j) += gz;
      if (gz == 0.0) continue;
      double* __restrict__ g_w1row = head_w1_.grad.row(j);
      const double* __restrict__ w1row = head_w1_.value.row(j);
#pragma omp simd
      for (std::size_t i = 0; i < d; ++i) {
        g_w1row[i] += gz * f[i];
        g_f[i] += gz * w1row[i];
      }
    }
  }

  // Temporal filter backward. ht = hs * blended^T with
  // blended = sum_m pi_m value_proj_m, so d(blended) = g_ht^T hs.
  {
    const FuzzyRuleBank& bank = temporal_;
    matmul_transa_into(ws_.g_ht, st.hs, ws_.n_mat);  // T_out x T
    ws_.blended.reset(bank.out_dim, bank.in_dim);
    std::vector<double> g_pi(bank.n_rules);
    const std::size_t n_elems = ws_.n_mat.size();
    for (std::size_t m = 0; m < bank.n_rules; ++m) {
      // One fused pass per rule: projection gradient, pi gradient and the
      // blended matrix for the value-path input gradient.
      const double pi_m = st.tm.pi[m];
      const double* __restrict__ n_ptr = ws_.n_mat.data();
      const double* __restrict__ w_ptr = bank.value_proj[m].value.data();
      double* __restrict__ g_ptr = temporal_.value_proj[m].grad.data();
      double* __restrict__ b_ptr = ws_.blended.data();
      double dot = 0.0;
#pragma omp simd reduction(+ : dot)
      for (std::size_t j = 0; j < n_elems; ++j) {
        const double n = n_ptr[j];
        const double w = w_ptr[j];
        g_ptr[j] += pi_m * n;
        b_ptr[j] += pi_m * w;
        dot += n * w;
      }
      g_pi[m] = dot;
    }
    matmul_into(ws_.g_ht, ws_.blended, ws_.g_hs);  // value-path gradient to hs

    const std::vector<double> g_rho = normalize_backward(st.tm, g_pi);
    std::vector<double> g_pooled(bank.in_dim, 0.0);
    for (std::size_t m = 0; m < bank.n_rules; ++m) {
      const double g_e = -st.tm.rho[m] * g_rho[m];
      if (g_e == 0.0) continue;
      const double* h = st.tm.queries.row(m);
      const Matrix& wq = temporal_.query_proj[m].value;
      Matrix& g_wq = temporal_.query_proj[m].grad;
      Matrix& g_bq = temporal_.query_bias[m].grad;
      for (std::size_t q = 0; q < bank.latent_dim; ++q) {
        const double diff = h[q] - temporal_.centers.value(m, q);
        const double w = temporal_.width(m, q);
        const double g_h = g_e * diff / (w * w);
        temporal_.centers.grad(m, q) += -g_h;
        if (std::exp(temporal_.log_widths.value(m, q)) > kMinRuleWidth) {
          temporal_.log_widths.grad(m, q) += -g_e * diff * diff / (w * w);
        }
        g_bq.at(q) += g_h;
        double* g_wqrow = g_wq.row(q);
        const double* wqrow = wq.row(q);
        for (std::size_t t = 0; t < bank.in_dim; ++t) {
          g_wqrow[t] += g_h * st.tm.pooled[t];
          g_pooled[t] += g_h * wqrow[t];
        }
      }
    }
    // Channel-mean pooling backward.
    const double inv_c = 1.0 / static_cast<double>(dims_.out_channels());
    for (std::size_t c = 0; c < dims_.out_channels(); ++c) {
      double* row = ws_.g_hs.row(c);
      for (std::size_t t = 0; t < bank.in_dim; ++t) row[t] += g_pooled[t] * inv_c;
    }
  }

  // Spatial filter backward. hs = blended * x, d(blended) = g_hs x^T.
  {
    const FuzzyRuleBank& bank = spatial_;
    matmul_transb_into(ws_.g_hs, *st.x, ws_.g_blend);  // C_out x C
    std::vector<double> g_pi(bank.n_rules);
    const std::size_t n_elems = ws_.g_blend.size();
    for (std::size_t k = 0; k < bank.n_rules; ++k) {
      const double pi_k = st.sp.pi[k];
      const double* __restrict__ n_ptr = ws_.g_blend.data();
      const double* __restrict__ w_ptr = bank.value_proj[k].value.data();
      double* __restrict__ g_ptr = spatial_.value_proj[k].grad.data();
      double dot = 0.0;
#pragma omp simd reduction(+ : dot)
      for (std::size_t j = 0; j < n_elems; ++j) {
        const double n = n_ptr[j];
        g_ptr[j] += pi_k * n;
        dot += n * w_ptr[j];
      }
      g_pi[k] = dot;
    }
    const std::vector<double> g_rho = normalize_backward(st.sp, g_pi);
    for (std::size_t k = 0; k < bank.n_rules; ++k) {
      const double g_e = -st.sp.rho[k] * g_rho[k];
      if (g_e == 0.0) continue;
      const double* h = st.sp.queries.row(k);
      Matrix& g_wq = spatial_.query_proj[k].grad;
      Matrix& g_bq = spatial_.query_bias[k].grad;
      for (std::size_t q = 0; q < bank.latent_dim; ++q) {
        const double diff = h[q] - spatial_.centers.value(k, q);
        const double w = spatial_.width(k, q);
        const double g_h = g_e * diff / (w * w);
        spatial_.centers.grad(k, q) += -g_h;
        if (std::exp(spatial_.log_widths.value(k, q)) > kMinRuleWidth) {
          spatial_.log_widths.grad(k, q) += -g_e * diff * diff / (w * w);
        }
        // The pooled query input is the raw trial; no input gradient needed.
        g_bq.at(q) += g_h;
        double* g_wqrow = g_wq.row(q);
        for (std::size_t c = 0; c < bank.in_dim; ++c) {
          g_wqrow[c] += g_h * st.sp.pooled[c];
        }
      }
    }
  }
}

void FuzzyModel::zero_grads() {
  for (ParamRef& p : params()) p.slot->zero_grad();
}

std::vector<ParamRef> FuzzyModel::params() {
  std::vector<ParamRef> out;
  bank_params("spatial", spatial_, out);
  bank_params("temporal", temporal_, out);
  out.push_back({"head.w1", &head_w1_});
  out.push_back({"head.b1", &head_b1_});
  out.push_back({"head.w2", &head_w2_});
  out.push_back({"head.b2", &head_b2_});
  return out;
}

std::size_t FuzzyModel::parameter_count() {
  std::size_t n = 0;
  for (const ParamRef& p : params()) n += p.slot->value.size();
  return n;
}

FuzzyModel init_model(const ModelDims& dims, std::uint64_t seed) {
  return FuzzyModel(dims, seed);
}

}  // namespace fzp300
