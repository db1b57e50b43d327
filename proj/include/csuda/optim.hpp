#pragma once

#include <cmath>
#include <vector>

#include "csuda/layers.hpp"
#include "csuda/tensor.hpp"

namespace csuda {

/// Cosine-annealed learning rate: base * 0.5 * (1 + cos(pi * step / total)).
inline double cosine_lr(double base, int step, int total_steps) {
  if (total_steps <= 0) return base;
  return base * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(total_steps)));
}

template <typename Scalar>
class SgdMomentum {
 public:
  SgdMomentum(std::vector<ParamRef<Scalar>> params, double lr, double momentum)
      : params_(std::move(params)), lr_(lr), momentum_(momentum) {
    for (const auto& p : params_) velocity_.push_back(Matrix<Scalar>::Zero(p.value->rows(), p.value->cols()));
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      velocity_[i] = Scalar(momentum_) * velocity_[i] + *params_[i].grad;
      *params_[i].value -= Scalar(lr_) * velocity_[i];
    }
  }

 private:
  std::vector<ParamRef<Scalar>> params_;
  double lr_;
  double momentum_;
  std::vector<Matrix<Scalar>> velocity_;
};

/// Adam on a single dense matrix (used for pixel-space image optimization).
template <typename Scalar>
class Adam {
 public:
  Adam(Eigen::Index rows, Eigen::Index cols, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_ = Matrix<Scalar>::Zero(rows, cols);
    v_ = Matrix<Scalar>::Zero(rows, cols);
  }

  void set_lr(double lr) { lr_ = lr; }

  void step(Matrix<Scalar>& value, const Matrix<Scalar>& grad) {
    ++t_;
    m_ = Scalar(beta1_) * m_ + Scalar(1 - beta1_) * grad;
    v_ = (Scalar(beta2_) * v_.array() + Scalar(1 - beta2_) * grad.array().square()).matrix();
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    value.array() -=
        Scalar(lr_ / bc1) * m_.array() / ((v_.array() / Scalar(bc2)).sqrt() + Scalar(eps_));
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  Matrix<Scalar> m_, v_;
};

}  // namespace csuda
