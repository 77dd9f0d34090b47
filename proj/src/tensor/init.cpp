#include "uekit/tensor/init.hpp"

#include <cmath>

namespace uekit::tensor {

Tensor init_params(std::size_t rows, std::size_t cols, InitScheme scheme, Rng& rng) {
  switch (scheme) {
    case InitScheme::kZeros: return Tensor(rows, cols, 0.0);
    case InitScheme::kOnes: return Tensor(rows, cols, 1.0);
    case InitScheme::kXavierUniform: break;
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& x : t.data) x = rng.uniform(-bound, bound);
  return t;
}

}  // namespace uekit::tensor
