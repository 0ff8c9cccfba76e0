#include "sift/relax.hpp"

#include <algorithm>
#include <cmath>

namespace sift::relax {

double gumbel_from_uniform(double u) {
  u = std::clamp(u, 1e-12, 1.0 - 1e-12);
  return -std::log(-std::log(u));
}

std::vector<double> sample_gumbel(std::size_t n, Rng& rng) {
  std::vector<double> g(n);
  for (double& v : g) v = gumbel_from_uniform(rng.uniform());
  return g;
}

GumbelSample gumbel_softmax(ad::Tape& tape, const ad::Var& scores, std::vector<double> noise,
                            double tau) {
  require(tau > 0.0, errkind::contract, "gumbel_softmax: temperature must be positive");
  require(scores.t->rank() == 1 && scores.size() >= 1, errkind::dimension,
          "gumbel_softmax: rank-1 scores required");
  require(noise.size() == scores.size(), errkind::dimension,
          "gumbel_softmax: one Gumbel draw per component required");
  ad::Var g = tape.constant(ad::Tensor::vector(noise));
  ad::Var shifted = ad::add(scores, g);
  ad::Var relaxed = ad::softmax_rows(ad::axpb(shifted, 1.0 / tau, 0.0));
  ad::Var onehot = ad::straight_through(relaxed);
  GumbelSample out;
  out.relaxed = relaxed;
  out.onehot = onehot;
  out.noise = std::move(noise);
  out.temperature = tau;
  for (std::size_t i = 0; i < onehot.size(); ++i) {
    if (onehot.data()[i] == 1.0) {
      out.token = i;
      break;
    }
  }
  return out;
}

GumbelSample gumbel_softmax(ad::Tape& tape, const ad::Var& scores, Rng& rng, double tau) {
  return gumbel_softmax(tape, scores, sample_gumbel(scores.size(), rng), tau);
}

}  // namespace sift::relax
