#pragma once

#include <cstddef>
#include <vector>

#include "sift/tensor.hpp"

namespace sift::optim {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global gradient-norm clip; 0 disables
};

// Adam over a fixed set of trainable tensors. Tensors whose requires_grad is
// false at construction are ignored; individual rows of {V,d} tensors can be
// pinned (used for the UNK embedding row).
class Adam {
 public:
  Adam(const std::vector<ad::TensorPtr>& params, AdamConfig cfg);

  void freeze_rows(const ad::TensorPtr& param, std::vector<std::size_t> rows);

  // Zeroes pinned-row gradients, clips the global norm, applies the update,
  // and clears all gradients. Returns the pre-clip global gradient norm.
  double step();

  void zero_grad();
  const AdamConfig& config() const { return cfg_; }
  std::size_t steps_taken() const { return t_; }

 private:
  struct Slot {
    ad::TensorPtr p;
    std::vector<double> m;
    std::vector<double> v;
    std::vector<std::size_t> frozen_rows;
  };
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  std::size_t t_ = 0;
};

// Rounds every parameter (and nothing else) through IEEE binary32. Applied
// after init and after each optimizer step when 32-bit precision is selected.
void quantize_f32(const std::vector<ad::TensorPtr>& params);

}  // namespace sift::optim
