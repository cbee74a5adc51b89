#include "fzp300/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "fzp300/rng.hpp"

namespace fzp300 {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<const Matrix*> trial_ptrs(const EpochSet& data) {
  std::vector<const Matrix*> ptrs;
  ptrs.reserve(data.n_trials());
  for (const Matrix& t : data.trials) ptrs.push_back(&t);
  return ptrs;
}

double select_score(const EpochRecord& r, SelectMetric metric) {
  return metric == SelectMetric::accuracy ? r.valid_acc : r.valid_f1;
}

}  // namespace

void TrainConfig::validate() const {
  if (warmup_epochs >= max_epochs) {
    throw ConfigError("train config: warmup_epochs must be below max_epochs");
  }
  if (patience < 1) throw ConfigError("train config: patience must be >= 1");
  if (base_lr <= 0.0 || beta1 <= 0.0 || beta2 <= 0.0 || eps <= 0.0) {
    throw ConfigError("train config: rates must be positive");
  }
  if (beta1 >= 1.0 || beta2 >= 1.0) throw ConfigError("train config: betas must be < 1");
  if (batch_size == 0) throw ConfigError("train config: batch_size must be positive");
  if (weight_decay < 0.0 || min_delta < 0.0 || grad_clip < 0.0) {
    throw ConfigError("train config: negative decay/threshold");
  }
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  if (epoch >= cfg.max_epochs) {
    throw RangeError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                     std::to_string(cfg.max_epochs) + ")");
  }
  const double peak = cfg.peak_lr();
  if (epoch < cfg.warmup_epochs) {
    return peak * static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs);
  }
  const double progress = static_cast<double>(epoch - cfg.warmup_epochs) /
                          static_cast<double>(cfg.max_epochs - cfg.warmup_epochs);
  return peak * 0.5 * (1.0 + std::cos(kPi * progress));
}

AdamW::AdamW(FuzzyModel& model, const TrainConfig& cfg) : model_(model), cfg_(cfg) {
  cfg_.validate();
  for (const ParamRef& p : model_.params()) {
    m_.emplace_back(p.slot->value.rows(), p.slot->value.cols());
    v_.emplace_back(p.slot->value.rows(), p.slot->value.cols());
  }
}

void AdamW::step(double lr) {
  std::vector<ParamRef> params = model_.params();
  for (const ParamRef& p : params) {
    if (!p.slot->grad.all_finite()) {
      throw NumericalError("non-finite gradient in parameter group " + p.name);
    }
  }

  if (cfg_.grad_clip > 0.0) {
    double sq = 0.0;
    for (const ParamRef& p : params) sq += frobenius_dot(p.slot->grad, p.slot->grad);
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) {
      const double scale = cfg_.grad_clip / norm;
      for (const ParamRef& p : params) p.slot->grad *= scale;
    }
  }

  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    GradSlot& slot = *params[i].slot;
    double* __restrict__ theta = slot.value.data();
    const double* __restrict__ grad = slot.grad.data();
    double* __restrict__ m = m_[i].data();
    double* __restrict__ v = v_[i].data();
    const std::size_t n = slot.value.size();
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) {
      const double g = grad[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      theta[j] -= lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps) +
                        cfg_.weight_decay * theta[j]);
    }
    slot.value.require_finite("parameter group " + params[i].name);
    slot.zero_grad();
  }
}

TrainRun fit(FuzzyModel& model, const EpochSet& train, const EpochSet& valid,
             const TrainConfig& cfg) {
  cfg.validate();
  if (train.n_trials() == 0 || valid.n_trials() == 0) {
    throw ConfigError("fit: empty train or validation split");
  }
  const auto start_time = std::chrono::steady_clock::now();

  AdamW optimizer(model, cfg);
  Rng shuffle_rng(cfg.seed);
  model.reseed_dropout(cfg.seed ^ 0xd1b54a32d192ed03ull);
  model.zero_grads();

  const std::vector<const Matrix*> valid_ptrs = trial_ptrs(valid);
  std::vector<std::size_t> order(train.n_trials());
  std::iota(order.begin(), order.end(), 0);

  TrainRun run;
  double best = -1.0;
  std::size_t since_improve = 0;
  std::vector<Matrix> best_params;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);

    model.set_mode(FuzzyModel::Mode::training);
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      std::vector<const Matrix*> batch;
      std::vector<std::uint8_t> labels;
      batch.reserve(end - begin);
      labels.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(&train.trials[order[i]]);
        labels.push_back(train.labels[order[i]]);
      }
      const BatchOutput out = model.forward_batch(batch, labels);
      model.backward();
      optimizer.step(lr);
      loss_sum += out.loss * static_cast<double>(end - begin);
    }

    model.set_mode(FuzzyModel::Mode::evaluation);
    const std::vector<double> probs = model.predict_batch(valid_ptrs);
    const ConfusionCounts counts = confusion(probs, valid.labels);
    const Scores s = scores(counts);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(train.n_trials());
    rec.valid_loss = bce_loss(probs, valid.labels);
    rec.valid_acc = s.accuracy;
    rec.valid_f1 = s.f1;
    run.history.push_back(rec);
    run.epochs_run = epoch + 1;

    const double score = select_score(rec, cfg.select);
    if (best_params.empty() || score > best + cfg.min_delta) {
      best = score;
      since_improve = 0;
      run.best_epoch = epoch;
      run.best_score = score;
      run.best_record = rec;
      best_params.clear();
      for (const ParamRef& p : model.params()) best_params.push_back(p.slot->value);
    } else {
      ++since_improve;
      if (since_improve >= cfg.patience) {
        run.stopped_early = true;
        break;
      }
    }
  }

  // Leave the model at the best checkpoint.
  std::vector<ParamRef> params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].slot->value = best_params[i];
  }
  model.set_mode(FuzzyModel::Mode::evaluation);

  run.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                  start_time)
                        .count();
  return run;
}

std::string epoch_record_json(const EpochRecord& r) {
  nlohmann::json j;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  j["train_loss"] = r.train_loss;
  j["valid_loss"] = r.valid_loss;
  j["valid_acc"] = r.valid_acc;
  j["valid_f1"] = r.valid_f1;
  return j.dump();
}

std::string train_summary_json(const TrainRun& run, bool include_meta) {
  nlohmann::json j;
  j["best_epoch"] = run.best_epoch;
  j["best_score"] = run.best_score;
  j["best"] = {{"valid_loss", run.best_record.valid_loss},
               {"valid_acc", run.best_record.valid_acc},
               {"valid_f1", run.best_record.valid_f1}};
  j["epochs_run"] = run.epochs_run;
  j["stopped_early"] = run.stopped_early;
  if (include_meta) {
    j["meta"] = {{"wall_time_s", run.wall_time_s}};
  }
  return j.dump(2);
}

}  // namespace fzp300
