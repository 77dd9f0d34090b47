#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace uekit::tensor {

// Dense row-major float64 matrix. Vectors are 1 x n. There is no
// broadcasting anywhere in the engine: every op checks exact shapes.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Tensor(std::size_t r, std::size_t c, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  std::size_t size() const { return data.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double item() const;

  std::vector<std::size_t> shape() const { return {rows, cols}; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  std::vector<float> to_float32() const;
  bool operator==(const Tensor&) const = default;
};

std::string shape_str(const Tensor& t);

}  // namespace uekit::tensor
