#include "uekit/tensor/tensor.hpp"

#include "uekit/error.hpp"

namespace uekit::tensor {

Tensor::Tensor(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) {
    throw Error(ErrorKind::kDomain, "tensor data size " + std::to_string(data.size()) +
                                        " does not match shape [" + std::to_string(r) +
                                        ", " + std::to_string(c) + "]");
  }
}

double Tensor::item() const {
  if (size() != 1) {
    throw Error(ErrorKind::kDomain, "item() on non-scalar tensor " + shape_str(*this));
  }
  return data[0];
}

std::vector<float> Tensor::to_float32() const {
  return {data.begin(), data.end()};
}

std::string shape_str(const Tensor& t) {
  return "[" + std::to_string(t.rows) + ", " + std::to_string(t.cols) + "]";
}

}  // namespace uekit::tensor
