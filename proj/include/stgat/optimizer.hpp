/**
 * Copyright (c) 2026 by Contributors
 * @file optimizer.hpp
 * @brief Adam with bias correction and global-norm gradient clipping.
 */
#ifndef STGAT_OPTIMIZER_HPP_
#define STGAT_OPTIMIZER_HPP_

#include <vector>

#include "stgat/tape.hpp"

namespace stgat::ad {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Holds first/second moment estimates per parameter plus the step counter.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Parameter*> params, AdamConfig cfg);

  /// Applies one bias-corrected update from the currently accumulated
  /// gradients.  Gradients are left untouched; the caller resets them.
  void step();

  long step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Parameter*>& parameters() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamConfig cfg_;
  long step_ = 0;
};

/// Scales all gradients so their joint L2 norm does not exceed max_norm.
/// Returns the pre-clip norm.
double clip_global_norm(const std::vector<Parameter*>& params, double max_norm);

}  // namespace stgat::ad

#endif  // STGAT_OPTIMIZER_HPP_
