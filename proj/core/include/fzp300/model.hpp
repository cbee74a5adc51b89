#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fzp300/fuzzy.hpp"
#include "fzp300/grad_check.hpp"
#include "fzp300/matrix.hpp"
#include "fzp300/rng.hpp"

namespace fzp300 {

// Predicted probabilities are clamped to [kProbClamp, 1 - kProbClamp]
// before any logarithm.
inline constexpr double kProbClamp = 1e-7;

struct ModelDims {
  std::size_t n_channels = 0;      // C
  std::size_t n_samples = 0;       // T
  std::size_t spatial_rules = 5;   // K_s
  std::size_t temporal_rules = 5;  // K_t
  std::size_t latent_dim = 16;     // Q
  std::size_t channels_out = 0;    // C_out, 0 means n_channels
  std::size_t samples_out = 0;     // T_out, 0 means n_samples
  std::size_t hidden = 64;
  double dropout = 0.25;

  std::size_t out_channels() const { return channels_out ? channels_out : n_channels; }
  std::size_t out_samples() const { return samples_out ? samples_out : n_samples; }
  std::size_t head_input() const { return out_channels() * out_samples(); }
  void validate() const;
};

// Per-trial forward intermediates exposed for inspection and tests.
struct ForwardTrace {
  FilterTrace spatial;
  FilterTrace temporal;
  Matrix h_spatial;   // C_out x T
  Matrix h_temporal;  // C_out x T_out
  double logit = 0.0;
  double p_hat = 0.0;
};

struct BatchOutput {
  double loss = 0.0;
  std::vector<double> probs;
};

// Mean binary cross-entropy with probability clamping.
double bce_loss(std::span<const double> p_hat, std::span<const std::uint8_t> labels);

// The fuzzy spatiotemporal classifier: spatial rule bank, temporal rule
// bank and a two-layer MLP head (ReLU, inverted dropout, sigmoid output).
// Gradients for the fixed graph are computed analytically by backward().
class FuzzyModel {
 public:
  enum class Mode { training, evaluation };

  FuzzyModel(const ModelDims& dims, std::uint64_t seed);

  const ModelDims& dims() const { return dims_; }
  std::uint64_t init_seed() const { return init_seed_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  // Dropout masks are drawn from this stream during training forwards.
  void reseed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

  // Single-trial forward. Deterministic in evaluation mode; in training
  // mode dropout consumes the model's dropout stream.
  double forward(const Matrix& x, ForwardTrace* trace = nullptr);

  // Batch forward. In training mode the intermediates are retained so one
  // backward() call can consume them.
  BatchOutput forward_batch(std::span<const Matrix* const> trials,
                            std::span<const std::uint8_t> labels);

  // Accumulates d(mean BCE)/d(parameter) into every GradSlot for the most
  // recent training forward_batch. Throws StateError when no unconsumed
  // forward pass exists (including repeated calls).
  void backward();

  void zero_grads();

  // Deterministic evaluation-mode probability (dropout off, const).
  double predict(const Matrix& x, ForwardTrace* trace = nullptr) const;
  std::vector<double> predict_batch(std::span<const Matrix* const> trials) const;

  FuzzyRuleBank& spatial_bank() { return spatial_; }
  const FuzzyRuleBank& spatial_bank() const { return spatial_; }
  FuzzyRuleBank& temporal_bank() { return temporal_; }
  const FuzzyRuleBank& temporal_bank() const { return temporal_; }

  GradSlot& head_w1() { return head_w1_; }
  GradSlot& head_b1() { return head_b1_; }
  GradSlot& head_w2() { return head_w2_; }
  GradSlot& head_b2() { return head_b2_; }
  const GradSlot& head_w1() const { return head_w1_; }
  const GradSlot& head_b1() const { return head_b1_; }
  const GradSlot& head_w2() const { return head_w2_; }
  const GradSlot& head_b2() const { return head_b2_; }

  // Named view over every trainable parameter group, in checkpoint order.
  std::vector<ParamRef> params();

  std::size_t parameter_count();

 private:
  struct TrialState;
  struct Workspace;

  // Dropout only runs when a dropout stream is supplied (training mode).
  double forward_one(const Matrix& x, TrialState* state, ForwardTrace* trace,
                     Rng* dropout_rng, Workspace& ws) const;
  void backward_one(const TrialState& state, double grad_logit);

  ModelDims dims_;
  std::uint64_t init_seed_ = 0;
  Mode mode_ = Mode::training;
  FuzzyRuleBank spatial_;
  FuzzyRuleBank temporal_;
  GradSlot head_w1_;  // hidden x head_input
  GradSlot head_b1_;  // hidden x 1
  GradSlot head_w2_;  // 1 x hidden
  GradSlot head_b2_;  // 1 x 1
  Rng dropout_rng_;

  struct TrialState {
    const Matrix* x = nullptr;
    FilterTrace sp;
    Matrix hs;  // C_out x T
    FilterTrace tm;
    Matrix ht;  // C_out x T_out
    std::vector<double> z1;
    std::vector<double> drop_scale;  // per-unit inverted-dropout factor
    double p_hat = 0.0;
    bool clamped = false;
  };
  std::vector<TrialState> pending_trials_;
  std::vector<std::uint8_t> pending_labels_;
  bool pending_ = false;

  // Reused per-trial scratch; avoids large allocations in the hot path.
  // Training owns ws_ exclusively; evaluation-mode calls use local
  // workspaces so a shared const model stays safe across threads.
  struct Workspace {
    Matrix blended;
    Matrix g_ht;
    Matrix n_mat;
    Matrix g_hs;
    Matrix g_blend;
  };
  Workspace ws_;
};

// Freshly initialized model: projections and head uniform(+-1/sqrt(fan_in)),
// centers ~ N(0, 1)/sqrt(Q), log-widths zero, fully determined by seed.
FuzzyModel init_model(const ModelDims& dims, std::uint64_t seed);

}  // namespace fzp300
