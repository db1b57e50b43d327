#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace csuda {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense activation/image batch. Layout: data(c, b*H*W + y*W + x), so
/// per-channel statistics are row-wise reductions and per-sample views are
/// contiguous column blocks.
template <typename Scalar>
struct Tensor {
  int batch = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  Matrix<Scalar> data;

  Tensor() = default;
  Tensor(int b, int c, int h, int w) : batch(b), channels(c), height(h), width(w) {
    data = Matrix<Scalar>::Zero(c, static_cast<Eigen::Index>(b) * h * w);
  }

  int spatial() const { return height * width; }
  Eigen::Index cols() const { return data.cols(); }

  auto sample(int b) { return data.middleCols(static_cast<Eigen::Index>(b) * spatial(), spatial()); }
  auto sample(int b) const {
    return data.middleCols(static_cast<Eigen::Index>(b) * spatial(), spatial());
  }

  bool same_shape(const Tensor& o) const {
    return batch == o.batch && channels == o.channels && height == o.height && width == o.width;
  }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out;
    out.batch = batch;
    out.channels = channels;
    out.height = height;
    out.width = width;
    out.data = data.template cast<Other>();
    return out;
  }
};

/// Column-wise softmax of a logit matrix (C x N).
template <typename Derived>
Matrix<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  Matrix<S> p = logits;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    S m = p.col(j).maxCoeff();
    p.col(j) = (p.col(j).array() - m).exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

/// Column-wise log-softmax of a logit matrix (C x N).
template <typename Derived>
Matrix<typename Derived::Scalar> log_softmax(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  Matrix<S> lp = logits;
  for (Eigen::Index j = 0; j < lp.cols(); ++j) {
    S m = lp.col(j).maxCoeff();
    S lse = std::log((lp.col(j).array() - m).exp().sum()) + m;
    lp.col(j).array() -= lse;
  }
  return lp;
}

/// Index of the largest entry; ties resolve to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace csuda
