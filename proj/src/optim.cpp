#include "sift/optim.hpp"

#include <cmath>

#include "sift/error.hpp"

namespace sift::optim {

Adam::Adam(const std::vector<ad::TensorPtr>& params, AdamConfig cfg) : cfg_(cfg) {
  require(cfg.lr > 0.0, errkind::config, "adam: learning rate must be positive");
  require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0,
          errkind::config, "adam: betas must lie in [0,1)");
  require(cfg.eps > 0.0, errkind::config, "adam: eps must be positive");
  require(cfg.clip_norm >= 0.0, errkind::config, "adam: clip norm must be nonnegative");
  for (const ad::TensorPtr& p : params) {
    if (!p->requires_grad) continue;
    p->ensure_grad();
    Slot s;
    s.p = p;
    s.m.assign(p->size(), 0.0);
    s.v.assign(p->size(), 0.0);
    slots_.push_back(std::move(s));
  }
}

void Adam::freeze_rows(const ad::TensorPtr& param, std::vector<std::size_t> rows) {
  for (Slot& s : slots_) {
    if (s.p != param) continue;
    require(s.p->rank() == 2, errkind::contract, "adam: row freezing needs a rank-2 tensor");
    for (std::size_t r : rows)
      require(r < s.p->shape[0], errkind::index, "adam: frozen row out of range");
    s.frozen_rows = std::move(rows);
    return;
  }
  fail(errkind::contract, "adam: tensor not registered with this optimizer");
}

double Adam::step() {
  ++t_;
  for (Slot& s : slots_) {
    if (s.frozen_rows.empty()) continue;
    const std::size_t d = s.p->shape[1];
    for (std::size_t r : s.frozen_rows)
      for (std::size_t j = 0; j < d; ++j) s.p->grad[r * d + j] = 0.0;
  }
  double sq = 0.0;
  for (const Slot& s : slots_)
    for (double g : s.p->grad) sq += g * g;
  const double norm = std::sqrt(sq);
  require(std::isfinite(norm), errkind::numeric, "adam: non-finite gradient norm");
  const double scale = (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm)
                           ? cfg_.clip_norm / norm
                           : 1.0;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Slot& s : slots_) {
    for (std::size_t i = 0; i < s.p->size(); ++i) {
      const double g = s.p->grad[i] * scale;
      s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g;
      s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      s.p->data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
  zero_grad();
  return norm;
}

void Adam::zero_grad() {
  for (Slot& s : slots_) s.p->zero_grad();
}

void quantize_f32(const std::vector<ad::TensorPtr>& params) {
  for (const ad::TensorPtr& p : params)
    for (double& v : p->data) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace sift::optim
