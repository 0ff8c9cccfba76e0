#pragma once

#include <functional>
#include <vector>

#include "sift/tape.hpp"

namespace sift::ad {

// Compares tape gradients of a scalar-valued graph against central finite
// differences. `build` reconstructs the graph from scratch on the given tape
// and must be deterministic in the leaf values (fix any sampled noise before
// calling). Returns the maximum relative error across all leaf elements,
// where rel_err = |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
double check_gradients(const std::function<Var(Tape&)>& build,
                       const std::vector<TensorPtr>& leaves, double h = 1e-5);

}  // namespace sift::ad
