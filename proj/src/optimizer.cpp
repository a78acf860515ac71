/**
 * Copyright (c) 2026 by Contributors
 * @file optimizer.cpp
 */
#include "stgat/optimizer.hpp"

#include <cmath>

namespace stgat::ad {

AdamOptimizer::AdamOptimizer(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamOptimizer::step() {
  ++step_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params_.size(); ++i) {
    const Matrix& g = params_[i]->grad;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    Matrix mhat = m_[i] / bc1;
    Matrix vhat = v_[i] / bc2;
    params_[i]->value.array() -=
        cfg_.learning_rate * mhat.array() /
        (vhat.array().sqrt() + cfg_.epsilon);
  }
}

double clip_global_norm(const std::vector<Parameter*>& params,
                        double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->grad.squaredNorm();
  double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    double scale = max_norm / norm;
    for (Parameter* p : params) p->grad *= scale;
  }
  return norm;
}

}  // namespace stgat::ad
