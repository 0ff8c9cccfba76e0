#pragma once

#include <cstddef>
#include <vector>

#include "sift/ops.hpp"
#include "sift/rng.hpp"

namespace sift::relax {

// Standard Gumbel(0,1) draw via inverse transform: -log(-log(u)).
// u is clamped to [1e-12, 1 - 1e-12] so the tails stay finite.
double gumbel_from_uniform(double u);

std::vector<double> sample_gumbel(std::size_t n, Rng& rng);

// One relaxed draw from a categorical given by rank-1 scores (log
// probabilities or logits; the relaxation is shift invariant).
struct GumbelSample {
  ad::Var relaxed;            // softmax((scores + g) / tau), differentiable
  ad::Var onehot;             // discretized via the straight-through estimator
  std::size_t token = 0;      // argmax component of `relaxed`
  std::vector<double> noise;  // the Gumbel draws used
  double temperature = 0.0;
};

GumbelSample gumbel_softmax(ad::Tape& tape, const ad::Var& scores,
                            std::vector<double> noise, double tau);
GumbelSample gumbel_softmax(ad::Tape& tape, const ad::Var& scores, Rng& rng, double tau);

}  // namespace sift::relax
