/**
 * Copyright (c) 2026 by Contributors
 * @file gradcheck.cpp
 */
#include "stgat/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace stgat::ad {

double finite_diff_check(const std::function<double()>& forward,
                         const std::vector<Parameter*>& params,
                         const GradCheckOptions& opts) {
  double max_rel = 0.0;
  Rng sampler(opts.sample_seed);
  for (Parameter* p : params) {
    Eigen::Index n = p->value.size();
    std::vector<Eigen::Index> coords;
    if (opts.samples_per_param <= 0 ||
        static_cast<Eigen::Index>(opts.samples_per_param) >= n) {
      coords.resize(static_cast<size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    } else {
      for (int k = 0; k < opts.samples_per_param; ++k) {
        coords.push_back(sampler.uniform_int(static_cast<int>(n)));
      }
    }
    for (Eigen::Index idx : coords) {
      double* slot = p->value.data() + idx;
      double orig = *slot;
      *slot = orig + opts.epsilon;
      double fp = forward();
      *slot = orig - opts.epsilon;
      double fm = forward();
      *slot = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("finite_diff_check: non-finite forward value at '" +
                           p->name + "'");
      }
      double fd = (fp - fm) / (2.0 * opts.epsilon);
      double analytic = *(p->grad.data() + idx);
      double rel = std::abs(analytic - fd) / std::max(1e-8, std::abs(fd));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace stgat::ad
