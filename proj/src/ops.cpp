/**
 * Copyright (c) 2026 by Contributors
 * @file ops.cpp
 */
#include "stgat/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace stgat::ad {

namespace {

void check_same_tape(Var a, Var b, const char* op) {
  if (a.tape() != b.tape()) {
    throw ConfigError(std::string(op) + ": operands live on different tapes");
  }
}

void check_same_shape(Var a, Var b, const char* op) {
  check_same_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "leaky_relu") return Activation::LeakyRelu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "elu") return Activation::Elu;
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation kind '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Elu: return "elu";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree: " +
                         shape_str(a.value()) + " vs " + shape_str(b.value()));
  }
  Tape& t = *a.tape();
  Matrix y = a.value() * b.value();
  int ia = a.id(), ib = b.id();
  return t.make_node(std::move(y), [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    tp.add_grad(ia, g * tp.value(ib).transpose());
    tp.add_grad(ib, tp.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.make_node(a.value() + b.value(), [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    tp.add_grad(ia, g);
    tp.add_grad(ib, g);
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.make_node(a.value() - b.value(), [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    tp.add_grad(ia, g);
    tp.add_grad(ib, -g);
  });
}

Var cmul(Var a, Var b) {
  check_same_shape(a, b, "cmul");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.make_node(a.value().cwiseProduct(b.value()),
                     [ia, ib](Tape& tp, int self) {
                       const Matrix& g = tp.grad(self);
                       tp.add_grad(ia, g.cwiseProduct(tp.value(ib)));
                       tp.add_grad(ib, g.cwiseProduct(tp.value(ia)));
                     });
}

Var affine(Var a, double scale, double shift) {
  Tape& t = *a.tape();
  Matrix y = (a.value().array() * scale + shift).matrix();
  int ia = a.id();
  return t.make_node(std::move(y), [ia, scale](Tape& tp, int self) {
    tp.add_grad(ia, (tp.grad(self).array() * scale).matrix());
  });
}

Var add_row_broadcast(Var a, Var row) {
  check_same_tape(a, row, "add_row_broadcast");
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row_broadcast: " + shape_str(row.value()) +
                         " cannot broadcast over " + shape_str(a.value()));
  }
  Tape& t = *a.tape();
  Eigen::RowVectorXd r = row.value().row(0);
  Matrix y = a.value();
  y.rowwise() += r;
  int ia = a.id(), ir = row.id();
  return t.make_node(std::move(y), [ia, ir](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    tp.add_grad(ia, g);
    tp.add_grad(ir, g.colwise().sum());
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  int ia = a.id();
  Eigen::Index r = a.rows(), c = a.cols();
  return t.make_node(std::move(y), [ia, r, c](Tape& tp, int self) {
    tp.add_grad(ia, Matrix::Constant(r, c, tp.grad(self)(0, 0)));
  });
}

Var mean(Var a) {
  return affine(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_cols: no parts");
  Tape& t = *parts[0].tape();
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p, "concat_cols");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " +
                           shape_str(parts[0].value()) + " vs " +
                           shape_str(p.value()));
    }
    cols += p.cols();
  }
  Matrix y(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    y.middleCols(at, p.cols()) = p.value();
    ids.push_back(p.id());
    widths.push_back(p.cols());
    at += p.cols();
  }
  return t.make_node(std::move(y), [ids, widths](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    Eigen::Index at2 = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      tp.add_grad(ids[k], g.middleCols(at2, widths[k]));
      at2 += widths[k];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_rows: no parts");
  Tape& t = *parts[0].tape();
  Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    check_same_tape(parts[0], p, "concat_rows");
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " +
                           shape_str(parts[0].value()) + " vs " +
                           shape_str(p.value()));
    }
    rows += p.rows();
  }
  Matrix y(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> heights;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    y.middleRows(at, p.rows()) = p.value();
    ids.push_back(p.id());
    heights.push_back(p.rows());
    at += p.rows();
  }
  return t.make_node(std::move(y), [ids, heights](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    Eigen::Index at2 = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      tp.add_grad(ids[k], g.middleRows(at2, heights[k]));
      at2 += heights[k];
    }
  });
}

Var gather_rows(Var a, std::vector<int> rows) {
  Tape& t = *a.tape();
  Matrix y(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= a.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(rows[k]) +
                           " out of range for " + shape_str(a.value()));
    }
    y.row(static_cast<Eigen::Index>(k)) = a.value().row(rows[k]);
  }
  int ia = a.id();
  Eigen::Index ar = a.rows(), ac = a.cols();
  return t.make_node(std::move(y),
                     [ia, ar, ac, rows = std::move(rows)](Tape& tp, int self) {
                       const Matrix& g = tp.grad(self);
                       Matrix da = Matrix::Zero(ar, ac);
                       for (size_t k = 0; k < rows.size(); ++k) {
                         da.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
                       }
                       tp.add_grad(ia, da);
                     });
}

Var col(Var a, int j) {
  if (j < 0 || j >= a.cols()) {
    throw DimensionError("col: index " + std::to_string(j) +
                         " out of range for " + shape_str(a.value()));
  }
  Tape& t = *a.tape();
  int ia = a.id();
  Eigen::Index ar = a.rows(), ac = a.cols();
  return t.make_node(a.value().col(j), [ia, j, ar, ac](Tape& tp, int self) {
    Matrix da = Matrix::Zero(ar, ac);
    da.col(j) = tp.grad(self);
    tp.add_grad(ia, da);
  });
}

Var scale_rows(Var a, Var s) {
  check_same_tape(a, s, "scale_rows");
  if (s.cols() != 1 || s.rows() != a.rows()) {
    throw DimensionError("scale_rows: scale " + shape_str(s.value()) +
                         " does not match rows of " + shape_str(a.value()));
  }
  Tape& t = *a.tape();
  Matrix y = s.value().col(0).asDiagonal() * a.value();
  int ia = a.id(), is = s.id();
  return t.make_node(std::move(y), [ia, is](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    const Matrix& av = tp.value(ia);
    const Matrix& sv = tp.value(is);
    tp.add_grad(ia, sv.col(0).asDiagonal() * g);
    tp.add_grad(is, (g.cwiseProduct(av)).rowwise().sum());
  });
}

Var scatter_rows_into(Tape& tape, const Matrix& base, Var patch,
                      std::vector<int> target_rows, int col_offset) {
  if (static_cast<Eigen::Index>(target_rows.size()) != patch.rows()) {
    throw DimensionError("scatter_rows_into: row list size " +
                         std::to_string(target_rows.size()) +
                         " does not match patch " + shape_str(patch.value()));
  }
  if (col_offset < 0 || col_offset + patch.cols() > base.cols()) {
    throw DimensionError("scatter_rows_into: patch " +
                         shape_str(patch.value()) + " at column " +
                         std::to_string(col_offset) + " exceeds base " +
                         shape_str(base));
  }
  Matrix y = base;
  Eigen::Index pc = patch.cols();
  for (size_t k = 0; k < target_rows.size(); ++k) {
    int r = target_rows[k];
    if (r < 0 || r >= base.rows()) {
      throw DimensionError("scatter_rows_into: target row out of range");
    }
    y.block(r, col_offset, 1, pc) = patch.value().row(static_cast<Eigen::Index>(k));
  }
  int ip = patch.id();
  Eigen::Index pr = patch.rows();
  return tape.make_node(
      std::move(y),
      [ip, pr, pc, col_offset, target_rows = std::move(target_rows)](
          Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        Matrix dp(pr, pc);
        for (size_t k = 0; k < target_rows.size(); ++k) {
          dp.row(static_cast<Eigen::Index>(k)) =
              g.block(target_rows[k], col_offset, 1, pc);
        }
        tp.add_grad(ip, dp);
      });
}

Var activation(Var a, Activation kind, double leaky_slope) {
  if (kind == Activation::Identity) return a;
  if (kind == Activation::LeakyRelu &&
      (leaky_slope <= 0.0 || leaky_slope >= 1.0)) {
    throw ConfigError("leaky_relu slope must lie in (0,1), got " +
                      std::to_string(leaky_slope));
  }
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix y;
  switch (kind) {
    case Activation::LeakyRelu:
      y = x.unaryExpr([leaky_slope](double v) {
        return v > 0.0 ? v : leaky_slope * v;
      });
      break;
    case Activation::Sigmoid:
      y = x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      break;
    case Activation::Tanh:
      y = x.array().tanh().matrix();
      break;
    case Activation::Elu:
      y = x.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
      break;
    case Activation::Relu:
      y = x.cwiseMax(0.0);
      break;
    case Activation::Identity:
      break;
  }
  int ia = a.id();
  return t.make_node(std::move(y), [ia, kind, leaky_slope](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    const Matrix& x2 = tp.value(ia);
    const Matrix& y2 = tp.value(self);
    Matrix dx;
    switch (kind) {
      case Activation::LeakyRelu:
        dx = g.cwiseProduct(x2.unaryExpr([leaky_slope](double v) {
          return v > 0.0 ? 1.0 : leaky_slope;
        }));
        break;
      case Activation::Sigmoid:
        dx = g.cwiseProduct(
            (y2.array() * (1.0 - y2.array())).matrix());
        break;
      case Activation::Tanh:
        dx = g.cwiseProduct((1.0 - y2.array().square()).matrix());
        break;
      case Activation::Elu:
        dx = g.cwiseProduct(x2.binaryExpr(y2, [](double xv, double yv) {
          return xv > 0.0 ? 1.0 : yv + 1.0;
        }));
        break;
      case Activation::Relu:
        dx = g.cwiseProduct(
            x2.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        break;
      case Activation::Identity:
        dx = g;
        break;
    }
    tp.add_grad(ia, dx);
  });
}

void stable_masked_softmax(const Eigen::VectorXd& scores,
                           const std::vector<int>& mask,
                           Eigen::VectorXd* out) {
  if (mask.empty()) {
    throw EmptyNeighborhoodError("masked_softmax: empty neighborhood mask");
  }
  out->setZero(scores.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (int i : mask) mx = std::max(mx, scores(i));
  double denom = 0.0;
  for (int i : mask) {
    double e = std::exp(scores(i) - mx);
    (*out)(i) = e;
    denom += e;
  }
  for (int i : mask) (*out)(i) /= denom;
}

Var masked_softmax(Var scores, const std::vector<int>& mask) {
  if (scores.cols() != 1) {
    throw DimensionError("masked_softmax: scores must be a column vector, got " +
                         shape_str(scores.value()));
  }
  for (int i : mask) {
    if (i < 0 || i >= scores.rows()) {
      throw DimensionError("masked_softmax: mask index out of range");
    }
  }
  Tape& t = *scores.tape();
  Eigen::VectorXd y;
  stable_masked_softmax(scores.value().col(0), mask, &y);
  int is = scores.id();
  return t.make_node(Matrix(y), [is, mask](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    const Matrix& y2 = tp.value(self);
    double dot = 0.0;
    for (int i : mask) dot += g(i, 0) * y2(i, 0);
    Matrix dx = Matrix::Zero(y2.rows(), 1);
    for (int i : mask) dx(i, 0) = y2(i, 0) * (g(i, 0) - dot);
    tp.add_grad(is, dx);
  });
}

Var rowwise_softmax(Var a) {
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = x.row(i).maxCoeff();
    Eigen::RowVectorXd e = (x.row(i).array() - mx).exp();
    y.row(i) = e / e.sum();
  }
  int ia = a.id();
  return t.make_node(std::move(y), [ia](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    const Matrix& y2 = tp.value(self);
    Matrix dx(y2.rows(), y2.cols());
    for (Eigen::Index i = 0; i < y2.rows(); ++i) {
      double dot = g.row(i).dot(y2.row(i));
      dx.row(i) = y2.row(i).cwiseProduct(g.row(i).array() - dot);
    }
    tp.add_grad(ia, dx);
  });
}

Var mse_loss(Var pred, Var truth) {
  check_same_shape(pred, truth, "mse_loss");
  Tape& t = *pred.tape();
  double n = static_cast<double>(pred.value().size());
  Matrix y(1, 1);
  y(0, 0) = (pred.value() - truth.value()).squaredNorm() / n;
  int ip = pred.id(), it = truth.id();
  return t.make_node(std::move(y), [ip, it, n](Tape& tp, int self) {
    double g = tp.grad(self)(0, 0);
    Matrix d = (2.0 * g / n) * (tp.value(ip) - tp.value(it));
    tp.add_grad(ip, d);
    tp.add_grad(it, -d);
  });
}

Var dropout_mask(Var a, Matrix mask) {
  if (mask.rows() != a.rows() || mask.cols() != a.cols()) {
    throw DimensionError("dropout_mask: mask " + shape_str(mask) +
                         " does not match " + shape_str(a.value()));
  }
  Tape& t = *a.tape();
  Matrix y = a.value().cwiseProduct(mask);
  int ia = a.id();
  return t.make_node(std::move(y), [ia, mask = std::move(mask)](Tape& tp, int self) {
    tp.add_grad(ia, tp.grad(self).cwiseProduct(mask));
  });
}

Var batchnorm_train(Var x, Var gamma, Var beta, double eps, Matrix* mean_out,
                    Matrix* var_out) {
  check_same_tape(x, gamma, "batchnorm");
  check_same_tape(x, beta, "batchnorm");
  Eigen::Index c = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != c || beta.rows() != 1 ||
      beta.cols() != c) {
    throw DimensionError("batchnorm: gamma/beta must be 1x" +
                         std::to_string(c));
  }
  Tape& t = *x.tape();
  const Matrix& xv = x.value();
  double n = static_cast<double>(xv.rows());
  Eigen::RowVectorXd mu = xv.colwise().mean();
  Matrix centered = xv.rowwise() - mu;
  Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;
  Eigen::RowVectorXd istd = (var.array() + eps).rsqrt();
  Matrix xhat = centered.array().rowwise() * istd.array();
  Eigen::RowVectorXd grow = gamma.value().row(0);
  Eigen::RowVectorXd brow = beta.value().row(0);
  Matrix y = (xhat.array().rowwise() * grow.array()).matrix();
  y.rowwise() += brow;
  if (mean_out) *mean_out = mu;
  if (var_out) *var_out = var;
  int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.make_node(
      std::move(y),
      [ix, ig, ib, xhat = std::move(xhat), istd, n](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        Eigen::RowVectorXd grow2 = tp.value(ig).row(0);
        tp.add_grad(ig, (g.cwiseProduct(xhat)).colwise().sum());
        tp.add_grad(ib, g.colwise().sum());
        // dxhat = g * gamma (broadcast over rows)
        Matrix dxhat = g.array().rowwise() * grow2.array();
        Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
        Eigen::RowVectorXd sum_dx =
            (dxhat.cwiseProduct(xhat)).colwise().sum();
        Matrix dx =
            (dxhat * n).rowwise() - sum_d;
        dx -= xhat.array().rowwise() * sum_dx.array();
        dx = (dx.array().rowwise() * istd.array()).matrix() / n;
        tp.add_grad(ix, dx);
      });
}

Var batchnorm_affine(Var x, Var gamma, Var beta, const Matrix& running_mean,
                     const Matrix& running_var, double eps) {
  check_same_tape(x, gamma, "batchnorm");
  check_same_tape(x, beta, "batchnorm");
  Eigen::Index c = x.cols();
  if (running_mean.cols() != c || running_var.cols() != c) {
    throw DimensionError("batchnorm: running statistics width mismatch");
  }
  Tape& t = *x.tape();
  Eigen::RowVectorXd mu = running_mean.row(0);
  Eigen::RowVectorXd istd =
      (running_var.row(0).array() + eps).rsqrt();
  Matrix xhat = (x.value().rowwise() - mu).array().rowwise() * istd.array();
  Eigen::RowVectorXd grow = gamma.value().row(0);
  Matrix y = (xhat.array().rowwise() * grow.array()).matrix();
  y.rowwise() += beta.value().row(0);
  int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.make_node(std::move(y), [ix, ig, ib, istd,
                                    xhat = std::move(xhat)](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    Eigen::RowVectorXd grow2 = tp.value(ig).row(0);
    tp.add_grad(ig, (g.cwiseProduct(xhat)).colwise().sum());
    tp.add_grad(ib, g.colwise().sum());
    Eigen::RowVectorXd k = grow2.cwiseProduct(istd);
    tp.add_grad(ix, (g.array().rowwise() * k.array()).matrix());
  });
}

Var graph_attention(Var z, Var w,
                    const std::vector<std::vector<int>>* neighbors,
                    double leaky_slope,
                    std::vector<std::vector<double>>* alpha_sink) {
  Tape& t = *z.tape();
  check_same_tape(z, w, "graph_attention");
  Eigen::Index h = z.cols();
  Eigen::Index n = z.rows();
  if (w.rows() != 2 * h || w.cols() != 1) {
    throw DimensionError("graph_attention: scoring vector must be " +
                         shape_str(2 * h, 1) + ", got " + shape_str(w.value()));
  }
  if (static_cast<Eigen::Index>(neighbors->size()) != n) {
    throw DimensionError("graph_attention: neighbor index has " +
                         std::to_string(neighbors->size()) +
                         " entries for " + std::to_string(n) + " nodes");
  }
  const Matrix& zv = z.value();
  Eigen::VectorXd wdst = w.value().col(0).head(h);
  Eigen::VectorXd wsrc = w.value().col(0).tail(h);
  Eigen::VectorXd s = zv * wdst;  // score part from the aggregating node
  Eigen::VectorXd q = zv * wsrc;  // score part from the neighbor

  Matrix out = Matrix::Zero(n, h);
  auto alpha = std::make_shared<std::vector<std::vector<double>>>(n);
  auto positive = std::make_shared<std::vector<std::vector<char>>>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<int>& js = (*neighbors)[static_cast<size_t>(i)];
    if (js.empty()) {
      throw EmptyNeighborhoodError(
          "graph_attention: node " + std::to_string(i) +
          " has no neighbors (self-loops disabled and node isolated)");
    }
    std::vector<double>& al = (*alpha)[static_cast<size_t>(i)];
    std::vector<char>& pos = (*positive)[static_cast<size_t>(i)];
    al.resize(js.size());
    pos.resize(js.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < js.size(); ++k) {
      double raw = s(i) + q(js[k]);
      pos[k] = raw > 0.0 ? 1 : 0;
      double act = raw > 0.0 ? raw : leaky_slope * raw;
      al[k] = act;
      mx = std::max(mx, act);
    }
    double denom = 0.0;
    for (double& a : al) {
      a = std::exp(a - mx);
      denom += a;
    }
    for (size_t k = 0; k < js.size(); ++k) {
      al[k] /= denom;
      out.row(i) += al[k] * zv.row(js[k]);
    }
  }
  if (alpha_sink) *alpha_sink = *alpha;

  int iz = z.id(), iw = w.id();
  return t.make_node(
      std::move(out),
      [iz, iw, neighbors, leaky_slope, h, n, alpha, positive](Tape& tp,
                                                              int self) {
        const Matrix& g = tp.grad(self);
        const Matrix& zv2 = tp.value(iz);
        const Matrix& wv = tp.value(iw);
        Eigen::VectorXd wdst2 = wv.col(0).head(h);
        Eigen::VectorXd wsrc2 = wv.col(0).tail(h);
        Matrix dz = Matrix::Zero(n, h);
        Eigen::VectorXd ds = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd dq = Eigen::VectorXd::Zero(n);
        std::vector<double> dalpha;
        for (Eigen::Index i = 0; i < n; ++i) {
          const std::vector<int>& js = (*neighbors)[static_cast<size_t>(i)];
          const std::vector<double>& al = (*alpha)[static_cast<size_t>(i)];
          const std::vector<char>& pos = (*positive)[static_cast<size_t>(i)];
          dalpha.resize(js.size());
          double cross = 0.0;
          for (size_t k = 0; k < js.size(); ++k) {
            dalpha[k] = g.row(i).dot(zv2.row(js[k]));
            dz.row(js[k]) += al[k] * g.row(i);
            cross += al[k] * dalpha[k];
          }
          for (size_t k = 0; k < js.size(); ++k) {
            double dact = al[k] * (dalpha[k] - cross);
            double draw = pos[k] ? dact : leaky_slope * dact;
            ds(i) += draw;
            dq(js[k]) += draw;
          }
        }
        dz.noalias() += ds * wdst2.transpose();
        dz.noalias() += dq * wsrc2.transpose();
        Matrix dw(2 * h, 1);
        dw.col(0).head(h) = zv2.transpose() * ds;
        dw.col(0).tail(h) = zv2.transpose() * dq;
        tp.add_grad(iz, dz);
        tp.add_grad(iw, dw);
      });
}

}  // namespace stgat::ad
