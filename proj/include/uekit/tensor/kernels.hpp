#pragma once

#include "uekit/tensor/tensor.hpp"

// Dense kernels behind the autograd ops. Each kernel has an OpenMP version
// (parallel over output rows) and a serial reference in kernels::serial.
// Both compute every output element with the same loop order, so results are
// bit-identical regardless of thread count.
namespace uekit::tensor::kernels {

// C = A * B
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A^T * B
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// C = A * B^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& x);

// Row-wise normalization to zero mean, unit variance: (x - mu) / sqrt(var + eps).
// inv_std receives 1 / sqrt(var + eps) per row.
Tensor layer_norm_rows(const Tensor& x, double eps, std::vector<double>* inv_std);

// Work threshold (multiply-adds) below which kernels stay serial.
inline constexpr std::size_t kParallelWork = 1u << 15;

namespace serial {
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm_rows(const Tensor& x, double eps, std::vector<double>* inv_std);
}  // namespace serial

}  // namespace uekit::tensor::kernels
