#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "uekit/tensor/tensor.hpp"

namespace uekit {
class Rng;
}

namespace uekit::tensor {

class Node;
using Var = std::shared_ptr<Node>;

// A value in the computation graph. Leaves are parameters (requires_grad) or
// constants; interior nodes hold their parents and a backward closure that
// accumulates into the parents' gradients.
class Node {
 public:
  Tensor value;
  Tensor grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  const Tensor& v() const { return value; }
  Tensor& g();  // grad, zero-allocated on first use
  void zero_grad();
};

// While alive on a thread, new nodes record no parents or backward closures
// on that thread (inference-only forward passes).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

Var parameter(Tensor value);
Var constant(Tensor value);

// Reverse-mode sweep from a scalar loss. Visits each reachable node once in
// reverse topological order. Gradients accumulate into leaves.
void backward(const Var& loss);

Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);

// axis 1: normalize along each row; axis 0: along each column.
Var softmax(const Var& a, int axis = 1);
Var layer_norm(const Var& a, int axis = 1, double eps = 1e-12);

Var gelu(const Var& a);  // exact erf form
Var sigmoid(const Var& a);
Var tanh(const Var& a);

// Rows of `table` selected by ids: result is ids.size() x table.cols.
Var embedding_lookup(const Var& table, std::span<const std::uint32_t> ids);
Var concat(const std::vector<Var>& parts, int axis = 0);
Var slice(const Var& a, int axis, std::size_t begin, std::size_t end);
Var expand_rows(const Var& row, std::size_t m);  // 1 x n -> m x n

Var mean(const Var& a);            // scalar mean of all elements
Var mean(const Var& a, int axis);  // axis 0: 1 x cols; axis 1: rows x 1
Var sum(const Var& a);

// Numerically stable binary cross-entropy on a 1x1 logit:
// max(z, 0) - z * label + log(1 + exp(-|z|)).
Var bce_with_logits(const Var& logit, double label);

// Inverted dropout; identity when rate == 0.
Var dropout(const Var& a, double rate, Rng& rng);

// x W + b with b expanded over rows.
Var linear(const Var& x, const Var& weight, const Var& bias);

}  // namespace uekit::tensor
