#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "threadweave/errors.hpp"

namespace tw {

// Dense row-major matrix of doubles. Column vectors are (n, 1), scalars (1, 1).
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.a[0] = v;
    return t;
  }

  static Tensor column(std::vector<double> v) {
    Tensor t;
    t.rows = static_cast<int>(v.size());
    t.cols = 1;
    t.a = std::move(v);
    return t;
  }

  int size() const { return rows * cols; }

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double x : a)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::string shape_str() const {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
  }
};

}  // namespace tw
