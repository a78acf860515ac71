/**
 * Copyright (c) 2026 by Contributors
 * @file tape.hpp
 * @brief Reverse-mode gradients over dense matrices via a recorded tape.
 *
 * Every forward operation appends a node holding its value and a backward
 * closure.  Calling backward(loss) replays the tape in reverse creation
 * order, accumulating gradients, and finally flushes gradients of leaves
 * registered from a Parameter into Parameter::grad.
 *
 * Scalars are 1x1 matrices and vectors are nx1 matrices; every quantity in
 * the model is rank <= 2.
 */
#ifndef STGAT_TAPE_HPP_
#define STGAT_TAPE_HPP_

#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stgat/common.hpp"

namespace stgat::ad {

using stgat::Matrix;

/// A named learnable tensor with a gradient slot of identical shape.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void reset_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

class Tape;

/// Lightweight handle to a tape node.
class Var {
 public:
  Var() : tape_(nullptr), id_(-1) {}
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_;
  int id_;
};

class Tape {
 public:
  /// Backward closure: receives the tape and the node's own id.
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Constant/input leaf (no upstream gradient propagation).
  Var leaf(Matrix value) { return make_node(std::move(value), nullptr); }

  /// Leaf bound to a Parameter; after backward() its gradient is
  /// accumulated into p.grad.
  Var param(Parameter& p) {
    Var v = make_node(p.value, nullptr);
    param_leaves_.emplace_back(v.id(), &p);
    return v;
  }

  Var make_node(Matrix value, BackwardFn bw) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(bw)});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
  }

  const Matrix& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Matrix& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }
  bool has_grad(int id) const { return nodes_[static_cast<size_t>(id)].grad.size() != 0; }

  /// Accumulates g into the node's gradient, allocating it on first touch.
  template <typename Derived>
  void add_grad(int id, const Eigen::MatrixBase<Derived>& g) {
    Matrix& slot = nodes_[static_cast<size_t>(id)].grad;
    if (slot.size() == 0) {
      slot = g;
    } else {
      slot += g;
    }
  }

  /// Runs the reverse sweep from a scalar loss node and flushes
  /// parameter-leaf gradients into their Parameters.
  void backward(Var loss);

  void clear() {
    nodes_.clear();
    param_leaves_.clear();
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn bw;
  };

  std::deque<Node> nodes_;
  std::vector<std::pair<int, Parameter*>> param_leaves_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }
inline const Matrix& Var::grad() const { return tape_->grad(id_); }

}  // namespace stgat::ad

#endif  // STGAT_TAPE_HPP_
