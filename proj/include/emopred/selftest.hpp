#pragma once

#include <cstdint>

#include "emopred/gradcheck.hpp"
#include "emopred/models.hpp"

namespace emopred {

// Central-difference check of the full variant pipeline on a built-in
// 3-example instance (eval-mode forward, so coins are frozen). Checks every
// parameter coordinate. corrupt_one_gradient perturbs one analytic gradient
// to prove the harness can fail.
GradCheckReport gradcheck_variant(Variant variant, std::uint64_t seed,
                                  double eps = 1e-5,
                                  bool corrupt_one_gradient = false);

}  // namespace emopred
