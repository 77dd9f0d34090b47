#pragma once

#include <cstddef>
#include <vector>

#include "uekit/tensor/autograd.hpp"

namespace uekit::tensor {

// Linear warmup from 0 over warmup_steps, then cosine decay to 0 at
// total_steps. Steps past total_steps get 0.
struct WarmupCosine {
  double base_lr = 5e-5;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;

  // Warmup defaults to 10% of the total.
  static WarmupCosine with_default_warmup(double base_lr, std::size_t total_steps);

  double lr(std::size_t step) const;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// AdamW with bias-corrected moments and decoupled weight decay:
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p)
// The learning rate for update number `step` (0-based) is schedule.lr(step).
class AdamW {
 public:
  AdamW(std::vector<Var> params, AdamWConfig config, WarmupCosine schedule);

  void step();
  void zero_grad();

  std::size_t step_count() const { return step_; }
  double current_lr() const { return schedule_.lr(step_); }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  std::vector<Var> params_;
  AdamWConfig config_;
  WarmupCosine schedule_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t step_ = 0;
  bool warned_ = false;
};

}  // namespace uekit::tensor
