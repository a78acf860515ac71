/**
 * Copyright (c) 2026 by Contributors
 * @file ops.hpp
 * @brief Differentiable operations on tape variables.
 *
 * Free functions building tape nodes; each carries its analytic backward
 * rule.  All of them are covered by finite-difference checks in the test
 * suite.
 */
#ifndef STGAT_OPS_HPP_
#define STGAT_OPS_HPP_

#include <span>
#include <string>
#include <vector>

#include "stgat/tape.hpp"

namespace stgat::ad {

enum class Activation { LeakyRelu, Sigmoid, Tanh, Elu, Relu, Identity };

/// Parses an activation name; throws ConfigError on unknown kinds.
Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

// ---- arithmetic ----

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Coefficient-wise product.
Var cmul(Var a, Var b);
/// scale * a + shift (shift applied to every coefficient).
Var affine(Var a, double scale, double shift = 0.0);
/// a (n x c) plus a row vector (1 x c) broadcast over rows.
Var add_row_broadcast(Var a, Var row);
Var sum(Var a);
Var mean(Var a);

// ---- structure ----

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
/// Selects rows by index (duplicates allowed); backward scatter-adds.
Var gather_rows(Var a, std::vector<int> rows);
/// Column j as an n x 1 vector.
Var col(Var a, int j);
/// Scales row i of a by s(i); s is n x 1.
Var scale_rows(Var a, Var s);
/// Copies `base` and overwrites, for each k, base(target_rows[k],
/// col_offset .. col_offset+patch.cols()) with patch.row(k).  Gradient flows
/// into `patch` only.
Var scatter_rows_into(Tape& tape, const Matrix& base, Var patch,
                      std::vector<int> target_rows, int col_offset);

// ---- nonlinearities ----

Var activation(Var a, Activation kind, double leaky_slope = 0.2);
inline Var sigmoid(Var a) { return activation(a, Activation::Sigmoid); }
inline Var tanh(Var a) { return activation(a, Activation::Tanh); }
inline Var leaky_relu(Var a, double slope) {
  return activation(a, Activation::LeakyRelu, slope);
}
inline Var elu(Var a) { return activation(a, Activation::Elu); }
inline Var relu(Var a) { return activation(a, Activation::Relu); }

// ---- softmax ----

/// Numerically stabilized softmax over the masked positions of a column
/// vector; positions outside the mask are exactly zero.  Throws
/// EmptyNeighborhoodError on an empty mask.
Var masked_softmax(Var scores, const std::vector<int>& mask);

/// Row-wise stabilized softmax (every entry participates).
Var rowwise_softmax(Var a);

/// Plain (non-tape) stabilized masked softmax; shared by the tape ops and
/// the fused attention kernel.
void stable_masked_softmax(const Eigen::VectorXd& scores,
                           const std::vector<int>& mask, Eigen::VectorXd* out);

// ---- losses ----

/// Mean squared error (1/(m*n)) * sum((a-b)^2), a scalar node.
Var mse_loss(Var pred, Var truth);

// ---- regularization primitives ----

/// Coefficient-wise multiply by a constant mask (dropout with a frozen mask).
Var dropout_mask(Var a, Matrix mask);

/// Batch normalization over rows (rows are the batch axis) using batch
/// statistics; gamma/beta are 1 x c.  Outputs the normalized matrix; batch
/// mean/variance (biased) are written to *mean_out / *var_out when non-null.
Var batchnorm_train(Var x, Var gamma, Var beta, double eps,
                    Matrix* mean_out = nullptr, Matrix* var_out = nullptr);

/// Batch normalization in inference form: per-feature affine with the given
/// running statistics.
Var batchnorm_affine(Var x, Var gamma, Var beta, const Matrix& running_mean,
                     const Matrix& running_var, double eps);

// ---- fused graph attention ----

/// Per-head attention aggregation over explicit neighbor lists.
///
/// z:  N x h projected node embeddings.
/// w:  2h x 1 scoring vector; split into a destination half (applied to the
///     aggregating node) and a source half (applied to the neighbor).
/// neighbors: for each node i, the list of nodes it attends over.
/// For each i: raw_j = w_dst.z_i + w_src.z_j, act = leaky_relu(raw, slope),
/// alpha = softmax(act), out_i = sum_j alpha_ij z_j.
///
/// When alpha_sink is non-null it receives, per node, the normalized
/// weights aligned with the neighbor list.
Var graph_attention(Var z, Var w,
                    const std::vector<std::vector<int>>* neighbors,
                    double leaky_slope,
                    std::vector<std::vector<double>>* alpha_sink = nullptr);

}  // namespace stgat::ad

#endif  // STGAT_OPS_HPP_
