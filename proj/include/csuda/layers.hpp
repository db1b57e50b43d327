#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "csuda/rng.hpp"
#include "csuda/tensor.hpp"

namespace csuda {

/// BatchNorm statistics mode for a forward pass.
///  - Eval: normalize with running statistics, running stats untouched.
///  - Train: normalize with batch statistics, running stats updated (EMA).
///  - BatchStats: normalize with batch statistics, running stats untouched
///    (used when optimizing inputs against a frozen model).
enum class Mode { Eval, Train, BatchStats };

template <typename Scalar>
struct ParamRef {
  std::string path;
  Matrix<Scalar>* value = nullptr;
  Matrix<Scalar>* grad = nullptr;  // null for non-gradient state (running stats)
};

/// 2D convolution, square kernel, zero padding, no bias (a BatchNorm layer
/// always follows, so the bias would be redundant).
template <typename Scalar>
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  Matrix<Scalar> weight;  // (out_channels, in_channels*kernel*kernel)
  Matrix<Scalar> grad_weight;

  // caches
  std::vector<Matrix<Scalar>> cols_;  // im2col per sample
  int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0, batch_ = 0;

  Conv2d() = default;
  Conv2d(int in_c, int out_c, int k, int s) : in_channels(in_c), out_channels(out_c), kernel(k), stride(s), pad(k / 2) {
    weight = Matrix<Scalar>::Zero(out_c, in_c * k * k);
    grad_weight = Matrix<Scalar>::Zero(out_c, in_c * k * k);
  }

  void init(Rng& rng) {
    // He-normal, fan-in = in_channels * k^2
    const double stddev = std::sqrt(2.0 / (in_channels * kernel * kernel));
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index j = 0; j < weight.cols(); ++j)
      for (Eigen::Index i = 0; i < weight.rows(); ++i) weight(i, j) = static_cast<Scalar>(dist(rng));
  }

  int out_size(int in) const { return (in + 2 * pad - kernel) / stride + 1; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    in_h_ = x.height;
    in_w_ = x.width;
    out_h_ = out_size(x.height);
    out_w_ = out_size(x.width);
    batch_ = x.batch;
    Tensor<Scalar> y(x.batch, out_channels, out_h_, out_w_);
    cols_.assign(x.batch, Matrix<Scalar>());
    for (int b = 0; b < x.batch; ++b) {
      cols_[b] = im2col(x, b);
      y.sample(b).noalias() = weight * cols_[b];
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(batch_, in_channels, in_h_, in_w_);
    for (int b = 0; b < batch_; ++b) {
      grad_weight.noalias() += dy.sample(b) * cols_[b].transpose();
      Matrix<Scalar> dcol = weight.transpose() * dy.sample(b);
      col2im(dcol, dx, b);
    }
    return dx;
  }

  Matrix<Scalar> im2col(const Tensor<Scalar>& x, int b) const {
    Matrix<Scalar> col = Matrix<Scalar>::Zero(in_channels * kernel * kernel, out_h_ * out_w_);
    const auto xb = x.sample(b);
    for (int oy = 0; oy < out_h_; ++oy) {
      for (int ox = 0; ox < out_w_; ++ox) {
        const int c0 = oy * out_w_ + ox;
        for (int c = 0; c < in_channels; ++c) {
          for (int dy = 0; dy < kernel; ++dy) {
            const int iy = oy * stride + dy - pad;
            if (iy < 0 || iy >= in_h_) continue;
            for (int dx = 0; dx < kernel; ++dx) {
              const int ix = ox * stride + dx - pad;
              if (ix < 0 || ix >= in_w_) continue;
              col((c * kernel + dy) * kernel + dx, c0) = xb(c, iy * in_w_ + ix);
            }
          }
        }
      }
    }
    return col;
  }

  void col2im(const Matrix<Scalar>& dcol, Tensor<Scalar>& dx, int b) const {
    auto xb = dx.sample(b);
    for (int oy = 0; oy < out_h_; ++oy) {
      for (int ox = 0; ox < out_w_; ++ox) {
        const int c0 = oy * out_w_ + ox;
        for (int c = 0; c < in_channels; ++c) {
          for (int dy = 0; dy < kernel; ++dy) {
            const int iy = oy * stride + dy - pad;
            if (iy < 0 || iy >= in_h_) continue;
            for (int dx_ = 0; dx_ < kernel; ++dx_) {
              const int ix = ox * stride + dx_ - pad;
              if (ix < 0 || ix >= in_w_) continue;
              xb(c, iy * in_w_ + ix) += dcol((c * kernel + dy) * kernel + dx_, c0);
            }
          }
        }
      }
    }
  }
};

/// Per-channel batch normalization with affine parameters. Running statistics
/// follow an exponential moving average (momentum 0.1); fresh layers start at
/// mean 0, variance 1. Batch variance is the biased estimator throughout.
template <typename Scalar>
struct BatchNorm2d {
  int channels = 0;
  Scalar momentum = Scalar(0.1);
  Scalar eps = Scalar(1e-5);

  Matrix<Scalar> gamma, beta;                  // (channels, 1)
  Matrix<Scalar> grad_gamma, grad_beta;        // (channels, 1)
  Matrix<Scalar> running_mean, running_var;    // (channels, 1)

  // caches for backward / statistics matching
  Matrix<Scalar> xhat_;
  Vector<Scalar> invstd_, batch_mean_, batch_var_;
  Mode mode_ = Mode::Eval;

  BatchNorm2d() = default;
  explicit BatchNorm2d(int c) : channels(c) {
    gamma = Matrix<Scalar>::Ones(c, 1);
    beta = Matrix<Scalar>::Zero(c, 1);
    grad_gamma = Matrix<Scalar>::Zero(c, 1);
    grad_beta = Matrix<Scalar>::Zero(c, 1);
    running_mean = Matrix<Scalar>::Zero(c, 1);
    running_var = Matrix<Scalar>::Ones(c, 1);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    mode_ = mode;
    Tensor<Scalar> y = x;
    const Eigen::Index m = x.data.cols();
    if (mode == Mode::Eval) {
      invstd_ = (running_var.col(0).array() + eps).rsqrt().matrix();
      for (int c = 0; c < channels; ++c)
        y.data.row(c) =
            ((x.data.row(c).array() - running_mean(c, 0)) * invstd_(c) * gamma(c, 0) + beta(c, 0)).matrix();
      return y;
    }
    batch_mean_ = x.data.rowwise().mean();
    batch_var_.resize(channels);
    for (int c = 0; c < channels; ++c)
      batch_var_(c) = (x.data.row(c).array() - batch_mean_(c)).square().sum() / Scalar(m);
    invstd_ = (batch_var_.array() + eps).rsqrt().matrix();
    xhat_.resize(channels, m);
    for (int c = 0; c < channels; ++c) {
      xhat_.row(c) = ((x.data.row(c).array() - batch_mean_(c)) * invstd_(c)).matrix();
      y.data.row(c) = (xhat_.row(c).array() * gamma(c, 0) + beta(c, 0)).matrix();
    }
    if (mode == Mode::Train) {
      running_mean.col(0) = (Scalar(1) - momentum) * running_mean.col(0) + momentum * batch_mean_;
      running_var.col(0) = (Scalar(1) - momentum) * running_var.col(0) + momentum * batch_var_;
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx = dy;
    const Eigen::Index m = dy.data.cols();
    if (mode_ == Mode::Eval) {
      for (int c = 0; c < channels; ++c) dx.data.row(c) = dy.data.row(c) * (gamma(c, 0) * invstd_(c));
      return dx;
    }
    for (int c = 0; c < channels; ++c) {
      const auto dyc = dy.data.row(c).array();
      const auto xh = xhat_.row(c).array();
      const Scalar sum_dy = dyc.sum();
      const Scalar sum_dy_xh = (dyc * xh).sum();
      grad_gamma(c, 0) += sum_dy_xh;
      grad_beta(c, 0) += sum_dy;
      dx.data.row(c) =
          ((gamma(c, 0) * invstd_(c) / Scalar(m)) * (Scalar(m) * dyc - sum_dy - xh * sum_dy_xh)).matrix();
    }
    return dx;
  }

  /// L2 distance of the cached batch statistics from a stored (mean, var)
  /// pair: ||mu_b - mu*||_2 + ||var_b - var*||_2. Valid after a batch-stats
  /// forward pass.
  Scalar stat_match_loss(const Vector<Scalar>& mean_target, const Vector<Scalar>& var_target) const {
    return (batch_mean_ - mean_target).norm() + (batch_var_ - var_target).norm();
  }

  /// Gradient of stat_match_loss with respect to this layer's input,
  /// reconstructed from the cached normalized activations.
  Matrix<Scalar> stat_match_grad(const Vector<Scalar>& mean_target, const Vector<Scalar>& var_target) const {
    const Eigen::Index m = xhat_.cols();
    Matrix<Scalar> g = Matrix<Scalar>::Zero(channels, m);
    const Scalar mean_norm = (batch_mean_ - mean_target).norm();
    const Scalar var_norm = (batch_var_ - var_target).norm();
    for (int c = 0; c < channels; ++c) {
      Scalar coeff_mean = mean_norm > Scalar(0) ? (batch_mean_(c) - mean_target(c)) / (mean_norm * Scalar(m)) : Scalar(0);
      Scalar coeff_var = var_norm > Scalar(0) ? (batch_var_(c) - var_target(c)) / var_norm : Scalar(0);
      // x - mu = xhat / invstd
      g.row(c) = Matrix<Scalar>::Constant(1, m, coeff_mean) +
                 xhat_.row(c) * (coeff_var * Scalar(2) / (invstd_(c) * Scalar(m)));
    }
    return g;
  }
};

template <typename Scalar>
struct Relu {
  Matrix<Scalar> mask_;

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    Tensor<Scalar> y = x;
    mask_ = (x.data.array() > Scalar(0)).template cast<Scalar>().matrix();
    y.data = x.data.cwiseProduct(mask_);
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx = dy;
    dx.data = dy.data.cwiseProduct(mask_);
    return dx;
  }
};

/// Global average pooling: (C, B*H*W) -> feature matrix (C, B).
template <typename Scalar>
struct GlobalAvgPool {
  int batch_ = 0, channels_ = 0, height_ = 0, width_ = 0;

  Matrix<Scalar> forward(const Tensor<Scalar>& x) {
    batch_ = x.batch;
    channels_ = x.channels;
    height_ = x.height;
    width_ = x.width;
    Matrix<Scalar> f(x.channels, x.batch);
    for (int b = 0; b < x.batch; ++b) f.col(b) = x.sample(b).rowwise().mean();
    return f;
  }

  Tensor<Scalar> backward(const Matrix<Scalar>& df) {
    Tensor<Scalar> dx(batch_, channels_, height_, width_);
    const Scalar inv = Scalar(1) / Scalar(height_ * width_);
    for (int b = 0; b < batch_; ++b) dx.sample(b).colwise() = Vector<Scalar>(df.col(b) * inv);
    return dx;
  }
};

template <typename Scalar>
struct Linear {
  int in_features = 0;
  int out_features = 0;
  Matrix<Scalar> weight, bias;            // (out, in), (out, 1)
  Matrix<Scalar> grad_weight, grad_bias;

  Matrix<Scalar> input_;  // cache (in, N)

  Linear() = default;
  Linear(int in_f, int out_f) : in_features(in_f), out_features(out_f) {
    weight = Matrix<Scalar>::Zero(out_f, in_f);
    bias = Matrix<Scalar>::Zero(out_f, 1);
    grad_weight = Matrix<Scalar>::Zero(out_f, in_f);
    grad_bias = Matrix<Scalar>::Zero(out_f, 1);
  }

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < weight.cols(); ++j)
      for (Eigen::Index i = 0; i < weight.rows(); ++i) weight(i, j) = static_cast<Scalar>(dist(rng));
    for (Eigen::Index i = 0; i < bias.rows(); ++i) bias(i, 0) = static_cast<Scalar>(dist(rng));
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& x) {
    input_ = x;
    Matrix<Scalar> y = weight * x;
    y.colwise() += Vector<Scalar>(bias.col(0));
    return y;
  }

  Matrix<Scalar> backward(const Matrix<Scalar>& dy) {
    grad_weight.noalias() += dy * input_.transpose();
    grad_bias.col(0) += dy.rowwise().sum();
    return weight.transpose() * dy;
  }
};

}  // namespace csuda
