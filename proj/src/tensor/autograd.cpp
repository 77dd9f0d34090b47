#include "uekit/tensor/autograd.hpp"

#include <cmath>
#include <numbers>
#include <unordered_set>

#include "uekit/error.hpp"
#include "uekit/rng.hpp"
#include "uekit/tensor/kernels.hpp"

namespace uekit::tensor {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorKind::kDomain, std::string(op) + ": shape mismatch " +
                                      shape_str(a) + " vs " + shape_str(b));
}

void check_axis(const char* op, int axis) {
  if (axis != 0 && axis != 1) {
    throw Error(ErrorKind::kDomain, std::string(op) + ": axis must be 0 or 1");
  }
}

thread_local bool g_no_grad = false;

Var make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_no_grad) return n;
  for (const Var& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

void accumulate(const Var& target, const Tensor& delta) {
  if (!target->requires_grad) return;
  Tensor& g = target->g();
  for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += delta.data[i];
}

Tensor transposed(const Tensor& t) {
  Tensor out(t.cols, t.rows);
  for (std::size_t i = 0; i < t.rows; ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) out(j, i) = t(i, j);
  }
  return out;
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }

Tensor& Node::g() {
  if (!grad.same_shape(value) || grad.size() != value.size()) {
    grad = Tensor(value.rows, value.cols);
  }
  return grad;
}

void Node::zero_grad() { grad = Tensor(value.rows, value.cols); }

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->zero_grad();
  return n;
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

void backward(const Var& loss) {
  if (loss->value.size() != 1) {
    throw Error(ErrorKind::kDomain,
                "backward: loss must be scalar, got " + shape_str(loss->value));
  }
  if (!loss->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->g().data[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->g();
      n->backward_fn(*n);
    }
  }
  // Interior gradients are no longer needed; leaves keep theirs.
  for (Node* n : order) {
    if (n->backward_fn) n->grad = Tensor();
  }
}

Var matmul(const Var& a, const Var& b) {
  if (a->value.cols != b->value.rows) shape_error("matmul", a->value, b->value);
  return make(kernels::matmul(a->value, b->value), {a, b}, [](Node& n) {
    const Var& a = n.parents[0];
    const Var& b = n.parents[1];
    if (a->requires_grad) accumulate(a, kernels::matmul_nt(n.grad, b->value));
    if (b->requires_grad) accumulate(b, kernels::matmul_tn(a->value, n.grad));
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a->value.cols != b->value.cols) shape_error("matmul_nt", a->value, b->value);
  return make(kernels::matmul_nt(a->value, b->value), {a, b}, [](Node& n) {
    const Var& a = n.parents[0];
    const Var& b = n.parents[1];
    if (a->requires_grad) accumulate(a, kernels::matmul(n.grad, b->value));
    if (b->requires_grad) accumulate(b, kernels::matmul_tn(n.grad, a->value));
  });
}

Var transpose(const Var& a) {
  return make(transposed(a->value), {a},
              [](Node& n) { accumulate(n.parents[0], transposed(n.grad)); });
}

Var add(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value)) shape_error("add", a->value, b->value);
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b->value.data[i];
  return make(std::move(out), {a, b}, [](Node& n) {
    accumulate(n.parents[0], n.grad);
    accumulate(n.parents[1], n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value)) shape_error("sub", a->value, b->value);
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b->value.data[i];
  return make(std::move(out), {a, b}, [](Node& n) {
    accumulate(n.parents[0], n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor neg = n.grad;
      for (double& x : neg.data) x = -x;
      accumulate(n.parents[1], neg);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value)) shape_error("mul", a->value, b->value);
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b->value.data[i];
  return make(std::move(out), {a, b}, [](Node& n) {
    const Var& a = n.parents[0];
    const Var& b = n.parents[1];
    if (a->requires_grad) {
      Tensor d = n.grad;
      for (std::size_t i = 0; i < d.size(); ++i) d.data[i] *= b->value.data[i];
      accumulate(a, d);
    }
    if (b->requires_grad) {
      Tensor d = n.grad;
      for (std::size_t i = 0; i < d.size(); ++i) d.data[i] *= a->value.data[i];
      accumulate(b, d);
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (double& x : out.data) x *= s;
  return make(std::move(out), {a}, [s](Node& n) {
    Tensor d = n.grad;
    for (double& x : d.data) x *= s;
    accumulate(n.parents[0], d);
  });
}

Var softmax(const Var& a, int axis) {
  check_axis("softmax", axis);
  if (axis == 0) return transpose(softmax(transpose(a), 1));
  return make(kernels::softmax_rows(a->value), {a}, [](Node& n) {
    const Tensor& y = n.value;
    Tensor d(y.rows, y.cols);
    for (std::size_t i = 0; i < y.rows; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < y.cols; ++j) dot += n.grad(i, j) * y(i, j);
      for (std::size_t j = 0; j < y.cols; ++j) d(i, j) = y(i, j) * (n.grad(i, j) - dot);
    }
    accumulate(n.parents[0], d);
  });
}

Var layer_norm(const Var& a, int axis, double eps) {
  check_axis("layer_norm", axis);
  if (axis == 0) return transpose(layer_norm(transpose(a), 1, eps));
  auto inv_std = std::make_shared<std::vector<double>>();
  Tensor y = kernels::layer_norm_rows(a->value, eps, inv_std.get());
  return make(std::move(y), {a}, [inv_std](Node& n) {
    const Tensor& y = n.value;
    const auto cols = static_cast<double>(y.cols);
    Tensor d(y.rows, y.cols);
    for (std::size_t i = 0; i < y.rows; ++i) {
      double mean_g = 0.0, mean_gy = 0.0;
      for (std::size_t j = 0; j < y.cols; ++j) {
        mean_g += n.grad(i, j);
        mean_gy += n.grad(i, j) * y(i, j);
      }
      mean_g /= cols;
      mean_gy /= cols;
      const double r = (*inv_std)[i];
      for (std::size_t j = 0; j < y.cols; ++j) {
        d(i, j) = r * (n.grad(i, j) - mean_g - y(i, j) * mean_gy);
      }
    }
    accumulate(n.parents[0], d);
  });
}

Var gelu(const Var& a) {
  Tensor out = a->value;
  for (double& x : out.data) x = 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
  return make(std::move(out), {a}, [](Node& n) {
    const Tensor& x = n.parents[0]->value;
    Tensor d = n.grad;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double xi = x.data[i];
      const double cdf = 0.5 * (1.0 + std::erf(xi / std::numbers::sqrt2));
      const double pdf = std::exp(-0.5 * xi * xi) * 0.5 * std::numbers::inv_sqrtpi *
                         std::numbers::sqrt2;
      d.data[i] *= cdf + xi * pdf;
    }
    accumulate(n.parents[0], d);
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a->value;
  for (double& x : out.data) {
    x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return make(std::move(out), {a}, [](Node& n) {
    Tensor d = n.grad;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = n.value.data[i];
      d.data[i] *= y * (1.0 - y);
    }
    accumulate(n.parents[0], d);
  });
}

Var tanh(const Var& a) {
  Tensor out = a->value;
  for (double& x : out.data) x = std::tanh(x);
  return make(std::move(out), {a}, [](Node& n) {
    Tensor d = n.grad;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = n.value.data[i];
      d.data[i] *= 1.0 - y * y;
    }
    accumulate(n.parents[0], d);
  });
}

Var embedding_lookup(const Var& table, std::span<const std::uint32_t> ids) {
  const Tensor& t = table->value;
  Tensor out(ids.size(), t.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= t.rows) {
      throw Error(ErrorKind::kDomain, "embedding_lookup: id " + std::to_string(ids[i]) +
                                          " out of range for table " + shape_str(t));
    }
    std::copy_n(t.row(ids[i]), t.cols, out.row(i));
  }
  std::vector<std::uint32_t> saved(ids.begin(), ids.end());
  return make(std::move(out), {table}, [saved = std::move(saved)](Node& n) {
    Tensor& g = n.parents[0]->g();
    for (std::size_t i = 0; i < saved.size(); ++i) {
      double* dst = g.row(saved[i]);
      const double* src = n.grad.row(i);
      for (std::size_t j = 0; j < g.cols; ++j) dst[j] += src[j];
    }
  });
}

Var concat(const std::vector<Var>& parts, int axis) {
  check_axis("concat", axis);
  if (parts.empty()) throw Error(ErrorKind::kDomain, "concat: no inputs");
  const Tensor& first = parts.front()->value;
  std::size_t total = 0;
  for (const Var& p : parts) {
    const Tensor& t = p->value;
    if (axis == 0 ? t.cols != first.cols : t.rows != first.rows) {
      shape_error("concat", first, t);
    }
    total += axis == 0 ? t.rows : t.cols;
  }
  Tensor out = axis == 0 ? Tensor(total, first.cols) : Tensor(first.rows, total);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& t = p->value;
    for (std::size_t i = 0; i < t.rows; ++i) {
      for (std::size_t j = 0; j < t.cols; ++j) {
        if (axis == 0) {
          out(offset + i, j) = t(i, j);
        } else {
          out(i, offset + j) = t(i, j);
        }
      }
    }
    offset += axis == 0 ? t.rows : t.cols;
  }
  return make(std::move(out), parts, [axis](Node& n) {
    std::size_t offset = 0;
    for (const Var& p : n.parents) {
      const Tensor& t = p->value;
      if (p->requires_grad) {
        Tensor& g = p->g();
        for (std::size_t i = 0; i < t.rows; ++i) {
          for (std::size_t j = 0; j < t.cols; ++j) {
            g(i, j) += axis == 0 ? n.grad(offset + i, j) : n.grad(i, offset + j);
          }
        }
      }
      offset += axis == 0 ? t.rows : t.cols;
    }
  });
}

Var slice(const Var& a, int axis, std::size_t begin, std::size_t end) {
  check_axis("slice", axis);
  const Tensor& t = a->value;
  const std::size_t extent = axis == 0 ? t.rows : t.cols;
  if (begin > end || end > extent) {
    throw Error(ErrorKind::kDomain, "slice: range [" + std::to_string(begin) + ", " +
                                        std::to_string(end) + ") out of bounds for " +
                                        shape_str(t));
  }
  const std::size_t len = end - begin;
  Tensor out = axis == 0 ? Tensor(len, t.cols) : Tensor(t.rows, len);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) {
      out(i, j) = axis == 0 ? t(begin + i, j) : t(i, begin + j);
    }
  }
  return make(std::move(out), {a}, [axis, begin](Node& n) {
    Tensor& g = n.parents[0]->g();
    for (std::size_t i = 0; i < n.grad.rows; ++i) {
      for (std::size_t j = 0; j < n.grad.cols; ++j) {
        if (axis == 0) {
          g(begin + i, j) += n.grad(i, j);
        } else {
          g(i, begin + j) += n.grad(i, j);
        }
      }
    }
  });
}

Var expand_rows(const Var& row, std::size_t m) {
  const Tensor& t = row->value;
  if (t.rows != 1) {
    throw Error(ErrorKind::kDomain, "expand_rows: expected a 1 x n row, got " + shape_str(t));
  }
  Tensor out(m, t.cols);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(t.row(0), t.cols, out.row(i));
  return make(std::move(out), {row}, [](Node& n) {
    Tensor& g = n.parents[0]->g();
    for (std::size_t i = 0; i < n.grad.rows; ++i) {
      for (std::size_t j = 0; j < n.grad.cols; ++j) g(0, j) += n.grad(i, j);
    }
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double x : a->value.data) s += x;
  return make(Tensor::scalar(s), {a}, [](Node& n) {
    Tensor d(n.parents[0]->value.rows, n.parents[0]->value.cols, n.grad.data[0]);
    accumulate(n.parents[0], d);
  });
}

Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a->value.size()));
}

Var mean(const Var& a, int axis) {
  check_axis("mean", axis);
  const Tensor& t = a->value;
  if (axis == 0) {
    Tensor out(1, t.cols);
    for (std::size_t i = 0; i < t.rows; ++i) {
      for (std::size_t j = 0; j < t.cols; ++j) out(0, j) += t(i, j);
    }
    for (double& x : out.data) x /= static_cast<double>(t.rows);
    return make(std::move(out), {a}, [](Node& n) {
      Tensor& g = n.parents[0]->g();
      const auto r = static_cast<double>(g.rows);
      for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t j = 0; j < g.cols; ++j) g(i, j) += n.grad(0, j) / r;
      }
    });
  }
  return transpose(mean(transpose(a), 0));
}

Var bce_with_logits(const Var& logit, double label) {
  if (logit->value.size() != 1) {
    throw Error(ErrorKind::kDomain,
                "bce_with_logits: expected scalar logit, got " + shape_str(logit->value));
  }
  const double z = logit->value.data[0];
  const double loss = std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
  return make(Tensor::scalar(loss), {logit}, [label](Node& n) {
    const double z = n.parents[0]->value.data[0];
    const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    accumulate(n.parents[0], Tensor::scalar(n.grad.data[0] * (p - label)));
  });
}

Var dropout(const Var& a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(a->value.size());
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    out.data[i] *= (*mask)[i];
  }
  return make(std::move(out), {a}, [mask](Node& n) {
    Tensor d = n.grad;
    for (std::size_t i = 0; i < d.size(); ++i) d.data[i] *= (*mask)[i];
    accumulate(n.parents[0], d);
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  return add(matmul(x, weight), expand_rows(bias, x->value.rows));
}

}  // namespace uekit::tensor
