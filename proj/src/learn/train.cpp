#include "uekit/learn/train.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "uekit/error.hpp"
#include "uekit/metrics.hpp"
#include "uekit/rng.hpp"
#include "uekit/tensor/optim.hpp"

namespace uekit::learn {

using namespace tensor;

void TrainConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::kUsage, "train config: " + why); };
  if (!(lr >= 0.0)) fail("lr must be non-negative");
  if (batch_size == 0 || epochs == 0 || patience == 0 || eval_interval == 0) {
    fail("batch_size, epochs, patience, eval_interval must be positive");
  }
  if (weight_decay < 0.0) fail("weight_decay must be non-negative");
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["lr"] = lr;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["eval_interval"] = eval_interval;
  j["warmup_steps"] = warmup_steps ? nlohmann::ordered_json(*warmup_steps) : nullptr;
  j["weight_decay"] = weight_decay;
  j["seed"] = seed;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.patience = j.value("patience", c.patience);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  if (j.contains("warmup_steps") && !j["warmup_steps"].is_null()) {
    c.warmup_steps = j["warmup_steps"].get<std::size_t>();
  }
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

namespace {

void check_inputs(const Dataset& train_set, const Dataset& val_set) {
  if (train_set.empty() || val_set.empty()) {
    throw Error(ErrorKind::kDomain, "training and validation sets must be non-empty");
  }
  std::set<std::string_view> ids;
  for (const auto& r : train_set.records) ids.insert(r.id);
  for (const auto& r : val_set.records) {
    if (ids.count(r.id)) {
      throw Error(ErrorKind::kDomain, "record '" + r.id + "' is in both train and validation");
    }
  }
  bool pos = false, neg = false;
  for (const auto& r : val_set.records) (r.correctness ? pos : neg) = true;
  if (!(pos && neg)) throw Error(ErrorKind::kDomain, "AUROC undefined on one-class split");
}

}  // namespace

TrainResult train(const ScorerSpec& spec, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config, const ValidationFn& validation) {
  config.validate();
  check_inputs(train_set, val_set);

  Scorer model(spec, derive_seed(config.seed, 0));
  for (const auto& r : train_set.records) model.check_channels(r);
  for (const auto& r : val_set.records) model.check_channels(r);

  const std::size_t n = train_set.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total = config.epochs * steps_per_epoch;
  WarmupCosine schedule = WarmupCosine::with_default_warmup(config.lr, total);
  if (config.warmup_steps) schedule.warmup_steps = *config.warmup_steps;
  AdamW opt(model.parameter_list(), AdamWConfig{.weight_decay = config.weight_decay}, schedule);

  const metrics::ScoredRecordSet val_labels{{}, labels_of(val_set)};
  const auto evaluate = [&](std::size_t step) {
    if (validation) return validation(model, step);
    metrics::ScoredRecordSet set = val_labels;
    set.scores = score_all(model, val_set);
    return metrics::auroc(set);
  };

  TrainResult result;
  result.total_steps = total;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_step = 0;
  std::vector<std::pair<std::string, Tensor>> best_params = model.snapshot();
  std::size_t step = 0;
  bool stop = false;

  for (std::size_t epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    Rng shuffle(derive_seed(config.seed, 1'000'000 + epoch));
    const std::vector<std::size_t> order = shuffle.permutation(n);
    for (std::size_t b = 0; b < steps_per_epoch && !stop; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - begin);
      Rng dropout_rng(derive_seed(config.seed, 2'000'000 + step));
      ForwardOptions opts{.training = true, .rng = &dropout_rng};

      opt.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const GenerationRecord& r = train_set.records[order[i]];
        const PaddedView view = model.prepare(r);
        Var loss = scale(bce_with_logits(model.forward_logit(view, opts), r.correctness), weight);
        batch_loss += loss->value.item();
        backward(loss);
      }
      opt.step();
      ++step;

      if (step % config.eval_interval == 0 || step == total) {
        const double auroc = evaluate(step);
        const bool improved = auroc > best;
        result.history.push_back({step, auroc, improved});
        if (improved) {
          best = auroc;
          best_step = step;
          best_params = model.snapshot();
        } else if (step - best_step >= config.patience) {
          stop = true;
          result.early_stopped = true;
        }
        if (config.verbose) {
          std::cerr << "[train " << kind_name(spec.kind) << "] step " << step << "/" << total
                    << " loss " << batch_loss << " val_auroc " << auroc
                    << (improved ? " *" : "") << "\n";
        }
      }
    }
  }

  result.steps_run = step;
  ScorerCheckpoint& ckpt = result.checkpoint;
  ckpt.spec = spec;
  ckpt.params = round_to_float32(std::move(best_params));
  ckpt.best_val_auroc = best;
  ckpt.steps = step;
  ckpt.best_step = best_step;
  ckpt.seed = config.seed;
  ckpt.extra["train_config"] = config.to_json();
  return result;
}

TrainResult train_lr_sweep(const ScorerSpec& spec, const Dataset& train_set,
                           const Dataset& val_set, TrainConfig config,
                           const std::vector<double>& grid) {
  std::optional<TrainResult> best;
  for (double lr : grid) {
    config.lr = lr;
    TrainResult r = train(spec, train_set, val_set, config);
    if (!best || r.checkpoint.best_val_auroc > best->checkpoint.best_val_auroc) {
      best = std::move(r);
    }
  }
  if (!best) throw Error(ErrorKind::kUsage, "empty learning-rate grid");
  return std::move(*best);
}

}  // namespace uekit::learn
