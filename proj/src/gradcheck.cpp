#include "sift/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sift::ad {

namespace {

double forward_value(const std::function<Var(Tape&)>& build) {
  Tape tape;
  NoGrad off(tape);
  Var out = build(tape);
  require(out.t->size() == 1, errkind::contract,
          "check_gradients: build must return a scalar");
  return out.t->data[0];
}

}  // namespace

double check_gradients(const std::function<Var(Tape&)>& build,
                       const std::vector<TensorPtr>& leaves, double h) {
  require(h > 0.0, errkind::contract, "check_gradients: step must be positive");
  for (const TensorPtr& l : leaves) {
    l->set_requires_grad(true);
    l->zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Var out = build(tape);
    require(out.t->size() == 1, errkind::contract,
            "check_gradients: build must return a scalar");
    tape.backward(out);
    analytic.reserve(leaves.size());
    for (const TensorPtr& l : leaves) analytic.push_back(l->grad);
  }
  double max_rel = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor& leaf = *leaves[li];
    for (std::size_t i = 0; i < leaf.size(); ++i) {
      const double orig = leaf.data[i];
      leaf.data[i] = orig + h;
      const double fp = forward_value(build);
      leaf.data[i] = orig - h;
      const double fm = forward_value(build);
      leaf.data[i] = orig;
      const double numeric = (fp - fm) / (2.0 * h);
      const double ana = analytic[li][i];
      const double denom = std::max({std::fabs(ana), std::fabs(numeric), 1e-3});
      max_rel = std::max(max_rel, std::fabs(ana - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace sift::ad
