#pragma once

#include <functional>
#include <string>
#include <vector>

#include "emopred/rng.hpp"
#include "emopred/tape.hpp"

namespace emopred {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_coord = 0;
  std::size_t coords_checked = 0;

  bool passed(double tol = 1e-4) const { return max_rel_error < tol; }
};

// Central-difference check of analytic gradients.
//
// forward            re-evaluates the loss from current parameter values
// forward_backward   zeroes grads, evaluates the loss, fills Parameter::grad
//
// The forward must be deterministic (coins and shuffles frozen); two
// evaluations are compared and a mismatch throws. max_coords == 0 checks
// every coordinate, otherwise a seeded subsample. Relative error per
// coordinate is |analytic - numeric| / max(1e-8, |analytic| + |numeric|),
// with the difference evaluated at both eps and 30*eps and the better
// agreement kept: a step size can sit on the cancellation floor of a
// near-zero gradient or straddle a ReLU kink, but a wrong analytic gradient
// disagrees at every step size.
GradCheckReport grad_check(const std::function<double()>& forward,
                           const std::function<double()>& forward_backward,
                           const std::vector<Parameter*>& params,
                           double eps = 1e-5, std::size_t max_coords = 0,
                           Rng rng = Rng(0));

}  // namespace emopred
