/**
 * Copyright (c) 2026 by Contributors
 * @file tape.cpp
 */
#include "stgat/tape.hpp"

#include <cmath>

namespace stgat::ad {

void Tape::backward(Var loss) {
  if (loss.tape() != this) {
    throw ConfigError("backward: loss does not belong to this tape");
  }
  const Matrix& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DimensionError("backward: loss must be a scalar, got " + shape_str(lv));
  }
  if (!std::isfinite(lv(0, 0))) {
    throw NumericError("backward: non-finite loss value");
  }
  add_grad(loss.id(), Matrix::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.size() != 0 && n.bw) {
      n.bw(*this, id);
    }
  }
  for (auto& [id, p] : param_leaves_) {
    if (has_grad(id)) {
      p->grad += grad(id);
    }
  }
}

}  // namespace stgat::ad
