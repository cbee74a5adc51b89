#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fzp300/epochs.hpp"
#include "fzp300/metrics.hpp"
#include "fzp300/model.hpp"

namespace fzp300 {

enum class SelectMetric { accuracy, f1 };

struct TrainConfig {
  double base_lr = 1.5e-3;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 800;
  std::size_t warmup_epochs = 80;
  double weight_decay = 0.05;
  std::size_t patience = 50;
  double min_delta = 5e-4;
  std::uint64_t seed = 13;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 0.0;  // 0 disables clipping
  SelectMetric select = SelectMetric::accuracy;

  double peak_lr() const {
    return base_lr * static_cast<double>(batch_size) / 256.0;
  }
  void validate() const;
};

// Warmup-cosine schedule: linear 0 -> peak over warmup_epochs, then cosine
// peak -> 0 at max_epochs. Throws RangeError outside [0, max_epochs).
double lr_at(std::size_t epoch, const TrainConfig& cfg);

// Decoupled-weight-decay adaptive moment optimizer over a model's
// parameter groups.
class AdamW {
 public:
  AdamW(FuzzyModel& model, const TrainConfig& cfg);

  // One update from the freshly accumulated gradients; zeroes them after.
  // Throws NumericalError naming the parameter group on non-finite
  // gradients.
  void step(double lr);

  std::size_t steps_taken() const { return steps_; }

 private:
  FuzzyModel& model_;
  TrainConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::size_t steps_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_acc = 0.0;
  double valid_f1 = 0.0;
};

struct TrainRun {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_score = 0.0;
  EpochRecord best_record;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
  double wall_time_s = 0.0;
};

// Full optimization loop with early stopping on the validation score.
// The best checkpoint is restored into `model` before returning.
TrainRun fit(FuzzyModel& model, const EpochSet& train, const EpochSet& valid,
             const TrainConfig& cfg);

std::string epoch_record_json(const EpochRecord& r);
std::string train_summary_json(const TrainRun& run, bool include_meta = true);

}  // namespace fzp300
