/**
 * Copyright (c) 2026 by Contributors
 * @file gradcheck.hpp
 * @brief Central finite-difference verification of analytic gradients.
 */
#ifndef STGAT_GRADCHECK_HPP_
#define STGAT_GRADCHECK_HPP_

#include <functional>
#include <vector>

#include "stgat/rng.hpp"
#include "stgat/tape.hpp"

namespace stgat::ad {

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// Coordinates checked per parameter; <= 0 checks every coordinate.
  int samples_per_param = -1;
  /// Seed for coordinate subsampling (used only when sampling).
  uint64_t sample_seed = 0;
};

/// Compares the gradients currently stored in `params` against central
/// finite differences of `forward` (a deterministic closure re-evaluating
/// the loss from the current parameter values).  Returns the maximum over
/// checked coordinates of |analytic - fd| / max(1e-8, |fd|).
///
/// Throws NumericError if `forward` produces a non-finite value.
double finite_diff_check(const std::function<double()>& forward,
                         const std::vector<Parameter*>& params,
                         const GradCheckOptions& opts = {});

}  // namespace stgat::ad

#endif  // STGAT_GRADCHECK_HPP_
