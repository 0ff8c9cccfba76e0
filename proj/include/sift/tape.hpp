#pragma once

#include <functional>
#include <vector>

#include "sift/tensor.hpp"

namespace sift::ad {

class Tape;

// Handle to a tensor living on a tape (or a leaf registered with one).
struct Var {
  Tape* tape = nullptr;
  TensorPtr t;

  bool defined() const { return static_cast<bool>(t); }
  const Tensor& tensor() const { return *t; }
  const std::vector<double>& data() const { return t->data; }
  const std::vector<std::size_t>& shape() const { return t->shape; }
  std::size_t size() const { return t->size(); }
  double value() const {
    require(t->size() == 1, errkind::contract, "value() on non-scalar");
    return t->data[0];
  }
};

// Define-by-run operation tape. Rebuilt per forward pass; backward replays
// the recorded closures in exact reverse order, which makes gradient
// accumulation deterministic. Single-writer: one tape per logical thread.
class Tape {
 public:
  // Leaf registration: grads accumulate directly into the given tensor.
  Var leaf(TensorPtr t) {
    t->ensure_grad();
    return Var{this, std::move(t)};
  }

  Var constant(Tensor t) {
    t.requires_grad = false;
    return Var{this, make_tensor(std::move(t))};
  }

  void push(std::function<void()> back) { nodes_.push_back(std::move(back)); }

  // Propagates d(root)/d(leaf) into every reachable requires_grad leaf.
  // Non-reachable leaves keep their zero accumulators.
  void backward(const Var& root) {
    require(root.t && root.t->size() == 1, errkind::contract,
            "backward root must be a scalar on this tape");
    if (!root.t->requires_grad) return;  // no differentiable path anywhere
    root.t->ensure_grad();
    root.t->grad[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  }

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  bool grad_enabled() const { return grad_enabled_; }
  void set_grad_enabled(bool e) { grad_enabled_ = e; }

 private:
  std::vector<std::function<void()>> nodes_;
  bool grad_enabled_ = true;
};

// Scoped grad-off guard for evaluation passes.
struct NoGrad {
  explicit NoGrad(Tape& t) : tape(t), prev(t.grad_enabled()) { tape.set_grad_enabled(false); }
  ~NoGrad() { tape.set_grad_enabled(prev); }
  Tape& tape;
  bool prev;
};

}  // namespace sift::ad
