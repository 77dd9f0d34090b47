#pragma once

#include "uekit/rng.hpp"
#include "uekit/tensor/tensor.hpp"

namespace uekit::tensor {

enum class InitScheme {
  kXavierUniform,  // U(-b, b), b = sqrt(6 / (fan_in + fan_out))
  kZeros,
  kOnes,
};

// fan_in = rows, fan_out = cols.
Tensor init_params(std::size_t rows, std::size_t cols, InitScheme scheme, Rng& rng);

}  // namespace uekit::tensor
