/**
 * Copyright (c) 2026 by Contributors
 * @file regularizers.cpp
 */
#include "stgat/regularizers.hpp"

namespace stgat::ad {

Var dropout(Var x, double p, Mode mode, Rng* rng) {
  if (p < 0.0 || p >= 1.0) {
    throw ConfigError("dropout probability must lie in [0,1), got " +
                      std::to_string(p));
  }
  if (mode == Mode::Eval || p == 0.0) return x;
  if (!rng) {
    throw ConfigError("dropout in train mode requires a random stream");
  }
  double keep = 1.0 - p;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      mask(i, j) = rng->bernoulli(p) ? 0.0 : 1.0 / keep;
    }
  }
  return dropout_mask(x, std::move(mask));
}

Var batchnorm(Tape& tape, Var x, BatchNorm& bn, Mode mode) {
  Var g = tape.param(bn.gamma);
  Var b = tape.param(bn.beta);
  if (mode == Mode::Train && x.rows() > 1) {
    Matrix mu, var;
    Var y = batchnorm_train(x, g, b, bn.eps, &mu, &var);
    if (bn.batches_seen == 0) {
      bn.running_mean = mu;
      bn.running_var = var;
    } else {
      bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * mu;
      bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * var;
    }
    ++bn.batches_seen;
    return y;
  }
  // Eval, or a train batch of one row: per-feature affine on running stats.
  return batchnorm_affine(x, g, b, bn.running_mean, bn.running_var, bn.eps);
}

Var regularize(Tape& tape, Var x, BatchNorm& bn, double dropout_p, Mode mode,
               Rng* rng) {
  return dropout(batchnorm(tape, x, bn, mode), dropout_p, mode, rng);
}

}  // namespace stgat::ad
