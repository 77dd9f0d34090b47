#include "uekit/tensor/optim.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace uekit::tensor {

WarmupCosine WarmupCosine::with_default_warmup(double base_lr, std::size_t total_steps) {
  return {base_lr, total_steps / 10, total_steps};
}

double WarmupCosine::lr(std::size_t step) const {
  if (step >= total_steps) return 0.0;
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(std::vector<Var> params, AdamWConfig config, WarmupCosine schedule)
    : params_(std::move(params)), config_(config), schedule_(schedule) {
  for (const Var& p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void AdamW::zero_grad() {
  for (const Var& p : params_) p->zero_grad();
}

void AdamW::step() {
  if (step_ >= schedule_.total_steps && !warned_) {
    std::cerr << "warning: optimizer step " << step_ << " beyond schedule total "
              << schedule_.total_steps << "; learning rate clamped to 0\n";
    warned_ = true;
  }
  const double lr = schedule_.lr(step_);
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& w = params_[k]->value;
    const Tensor& g = params_[k]->g();
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m.data[i] = config_.beta1 * m.data[i] + (1.0 - config_.beta1) * g.data[i];
      v.data[i] = config_.beta2 * v.data[i] + (1.0 - config_.beta2) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / bc1;
      const double v_hat = v.data[i] / bc2;
      w.data[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                         config_.weight_decay * w.data[i]);
    }
  }
}

}  // namespace uekit::tensor
