#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <vector>

#include "sift/error.hpp"

namespace sift::ad {

// Dense row-major tensor of doubles. Rank 0 is a scalar (data size 1),
// rank 1 a vector, rank 2 a matrix; nothing in the library needs more.
// grad is allocated iff requires_grad and always matches data in size.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;

  Tensor() = default;

  static std::size_t product(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(product(t.shape), 0.0);
    return t;
  }

  static Tensor full(std::vector<std::size_t> shape, double v) {
    Tensor t = zeros(std::move(shape));
    t.data.assign(t.data.size(), v);
    return t;
  }

  static Tensor scalar(double v) {
    Tensor t;
    t.data.assign(1, v);
    return t;
  }

  static Tensor vector(std::vector<double> v) {
    Tensor t;
    t.shape = {v.size()};
    t.data = std::move(v);
    return t;
  }

  static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> v) {
    require(v.size() == r * c, errkind::dimension, "matrix data size mismatch");
    Tensor t;
    t.shape = {r, c};
    t.data = std::move(v);
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  bool is_scalar() const { return data.size() == 1 && shape.empty(); }

  std::size_t rows() const {
    require(rank() == 2, errkind::dimension, "rows() on non-matrix");
    return shape[0];
  }
  std::size_t cols() const {
    require(rank() == 2, errkind::dimension, "cols() on non-matrix");
    return shape[1];
  }

  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  void ensure_grad() {
    if (requires_grad && grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }

  void zero_grad() {
    if (requires_grad) grad.assign(data.size(), 0.0);
  }

  void set_requires_grad(bool rg) {
    requires_grad = rg;
    if (rg)
      ensure_grad();
    else
      grad.clear();
  }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr make_tensor(Tensor t) { return std::make_shared<Tensor>(std::move(t)); }

}  // namespace sift::ad
