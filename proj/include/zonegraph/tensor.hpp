#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "zonegraph/common.hpp"

namespace zonegraph {

/// Dense row-major tensor of doubles. Rank-2 accessors cover almost every use.
struct Tensor {
  std::vector<int> shape;
  Vec values;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    values.assign(count(shape), fill);
  }
  static Tensor matrix(int rows, int cols, double fill = 0.0) { return Tensor({rows, cols}, fill); }
  static Tensor vector(int n, double fill = 0.0) { return Tensor({n}, fill); }
  static Tensor identity(int n) {
    Tensor t = matrix(n, n);
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }

  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::size_t size() const { return values.size(); }

  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols() + c]; }
  double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols() + c]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  std::span<double> row(int r) {
    return {values.data() + static_cast<std::size_t>(r) * cols(), static_cast<std::size_t>(cols())};
  }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols(), static_cast<std::size_t>(cols())};
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool operator==(const Tensor&) const = default;

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
    return s + "]";
  }
};

/// C = A * B for rank-2 tensors.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: " + a.shape_string() + " * " + b.shape_string());
  Tensor c = Tensor::matrix(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    double* ci = c.values.data() + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      const double* bp = b.values.data() + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
  return c;
}

inline Tensor transpose(const Tensor& a) {
  Tensor t = Tensor::matrix(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace zonegraph
