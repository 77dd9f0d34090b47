#include "uekit/tensor/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "uekit/error.hpp"

namespace uekit::tensor::kernels {

namespace {

void check(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) {
    throw Error(ErrorKind::kDomain, std::string(op) + ": shape mismatch " +
                                        shape_str(a) + " vs " + shape_str(b));
  }
}

// Row kernels shared by the serial and parallel drivers.
inline void matmul_row(const Tensor& a, const Tensor& b, Tensor& c, std::size_t i) {
  double* out = c.row(i);
  const double* ai = a.row(i);
  for (std::size_t k = 0; k < a.cols; ++k) {
    const double s = ai[k];
    const double* bk = b.row(k);
    for (std::size_t j = 0; j < b.cols; ++j) out[j] += s * bk[j];
  }
}

// Row i of A^T B: sum over k of A(k, i) * B(k, :).
inline void matmul_tn_row(const Tensor& a, const Tensor& b, Tensor& c, std::size_t i) {
  double* out = c.row(i);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double s = a(k, i);
    const double* bk = b.row(k);
    for (std::size_t j = 0; j < b.cols; ++j) out[j] += s * bk[j];
  }
}

inline void matmul_nt_row(const Tensor& a, const Tensor& b, Tensor& c, std::size_t i) {
  const double* ai = a.row(i);
  for (std::size_t j = 0; j < b.rows; ++j) {
    const double* bj = b.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
    c(i, j) = s;
  }
}

inline void softmax_row(const Tensor& x, Tensor& y, std::size_t i) {
  const double* in = x.row(i);
  double* out = y.row(i);
  const double m = *std::max_element(in, in + x.cols);
  double z = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    out[j] = std::exp(in[j] - m);
    z += out[j];
  }
  for (std::size_t j = 0; j < x.cols; ++j) out[j] /= z;
}

inline void layer_norm_row(const Tensor& x, Tensor& y, double eps,
                           std::vector<double>* inv_std, std::size_t i) {
  const double* in = x.row(i);
  double* out = y.row(i);
  const auto n = static_cast<double>(x.cols);
  double mean = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) mean += in[j];
  mean /= n;
  double var = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) var += (in[j] - mean) * (in[j] - mean);
  var /= n;
  const double r = 1.0 / std::sqrt(var + eps);
  for (std::size_t j = 0; j < x.cols; ++j) out[j] = (in[j] - mean) * r;
  if (inv_std) (*inv_std)[i] = r;
}

}  // namespace

namespace serial {

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.cols == b.rows, "matmul", a, b);
  Tensor c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check(a.rows == b.rows, "matmul_tn", a, b);
  Tensor c(a.cols, b.cols);
  for (std::size_t i = 0; i < a.cols; ++i) matmul_tn_row(a, b, c, i);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check(a.cols == b.cols, "matmul_nt", a, b);
  Tensor c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) matmul_nt_row(a, b, c, i);
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) softmax_row(x, y, i);
  return y;
}

Tensor layer_norm_rows(const Tensor& x, double eps, std::vector<double>* inv_std) {
  Tensor y(x.rows, x.cols);
  if (inv_std) inv_std->assign(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) layer_norm_row(x, y, eps, inv_std, i);
  return y;
}

}  // namespace serial

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.cols == b.rows, "matmul", a, b);
  Tensor c(a.rows, b.cols);
  const auto m = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static) if (a.rows * a.cols * b.cols > kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) matmul_row(a, b, c, i);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check(a.rows == b.rows, "matmul_tn", a, b);
  Tensor c(a.cols, b.cols);
  const auto m = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for schedule(static) if (a.rows * a.cols * b.cols > kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) matmul_tn_row(a, b, c, i);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check(a.cols == b.cols, "matmul_nt", a, b);
  Tensor c(a.rows, b.rows);
  const auto m = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static) if (a.rows * a.cols * b.rows > kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) matmul_nt_row(a, b, c, i);
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.rows, x.cols);
  const auto m = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) softmax_row(x, y, i);
  return y;
}

Tensor layer_norm_rows(const Tensor& x, double eps, std::vector<double>* inv_std) {
  Tensor y(x.rows, x.cols);
  if (inv_std) inv_std->assign(x.rows, 0.0);
  const auto m = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) layer_norm_row(x, y, eps, inv_std, i);
  return y;
}

}  // namespace uekit::tensor::kernels
