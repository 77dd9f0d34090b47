#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "uekit/core.hpp"
#include "uekit/learn/checkpoint.hpp"
#include "uekit/learn/scorer.hpp"

namespace uekit::learn {

struct TrainConfig {
  double lr = 5e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::size_t patience = 1000;       // steps without val AUROC improvement
  std::size_t eval_interval = 100;   // steps between validation passes
  std::optional<std::size_t> warmup_steps;  // default: 10% of total steps
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  bool verbose = false;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Learning-rate grid searched by train_lr_sweep.
inline const std::vector<double> kLearningRateGrid = {5e-4, 5e-5, 5e-6};

struct EvalPoint {
  std::size_t step = 0;
  double auroc = 0.0;
  bool improved = false;
};

struct TrainResult {
  ScorerCheckpoint checkpoint;  // best validation AUROC parameters
  std::vector<EvalPoint> history;
  std::size_t steps_run = 0;
  std::size_t total_steps = 0;
  bool early_stopped = false;
};

// Replaces validation scoring; receives the current model and step.
using ValidationFn = std::function<double(const Scorer&, std::size_t step)>;

// Minibatch BCE training with AdamW and warmup-cosine. Validation AUROC is
// computed every eval_interval steps (and at the last step); the best
// parameters are kept, and training stops once `patience` steps pass without
// a strict improvement. Throws "AUROC undefined on one-class split" when the
// validation set lacks a class.
TrainResult train(const ScorerSpec& spec, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config, const ValidationFn& validation = nullptr);

// Trains once per learning rate and keeps the best validation AUROC.
TrainResult train_lr_sweep(const ScorerSpec& spec, const Dataset& train_set,
                           const Dataset& val_set, TrainConfig config,
                           const std::vector<double>& grid = kLearningRateGrid);

}  // namespace uekit::learn
