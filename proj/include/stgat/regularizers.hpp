/**
 * Copyright (c) 2026 by Contributors
 * @file regularizers.hpp
 * @brief Dropout and batch normalization over tape variables.
 */
#ifndef STGAT_REGULARIZERS_HPP_
#define STGAT_REGULARIZERS_HPP_

#include "stgat/ops.hpp"
#include "stgat/rng.hpp"

namespace stgat::ad {

enum class Mode { Train, Eval };

/// Inverted dropout: in train mode each element is zeroed with probability p
/// and survivors are scaled by 1/(1-p); eval mode is the identity.
/// Requires 0 <= p < 1.
Var dropout(Var x, double p, Mode mode, Rng* rng);

/// Running statistics plus learnable scale/shift for one batch-norm site.
/// Rows of the input are treated as the batch axis.
struct BatchNorm {
  Parameter gamma;
  Parameter beta;
  Matrix running_mean;  // 1 x c
  Matrix running_var;   // 1 x c
  double momentum = 0.9;
  double eps = 1e-5;
  long batches_seen = 0;

  BatchNorm() = default;
  BatchNorm(const std::string& name, Eigen::Index width)
      : gamma(name + ".gamma", Matrix::Ones(1, width)),
        beta(name + ".beta", Matrix::Zero(1, width)),
        running_mean(Matrix::Zero(1, width)),
        running_var(Matrix::Ones(1, width)) {}
};

/// Applies batch normalization.  Train mode uses batch statistics and
/// updates the running estimates (EMA with `momentum`); with a single row
/// it degrades to the running-statistics affine form.  Eval mode always
/// uses the running statistics.
Var batchnorm(Tape& tape, Var x, BatchNorm& bn, Mode mode);

/// Batch normalization followed by dropout, the regularization applied to
/// layer outputs during training.
Var regularize(Tape& tape, Var x, BatchNorm& bn, double dropout_p, Mode mode,
               Rng* rng);

}  // namespace stgat::ad

#endif  // STGAT_REGULARIZERS_HPP_
