// rnntep/numerics.h
//
// Copyright 2026  The rnntep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RNNTEP_NUMERICS_H_
#define RNNTEP_NUMERICS_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "rnntep/error.h"

namespace rnntep {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Row-major T x d frame matrix, one acoustic frame per row.
using FrameMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Canonical log(0).
template <typename Scalar = double>
constexpr Scalar kLogZero = -std::numeric_limits<Scalar>::infinity();

// log(exp(a) + exp(b)). Never evaluates (-inf) - (-inf).
template <typename Scalar>
inline Scalar LogAdd(Scalar a, Scalar b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero<Scalar>) return a;
  return a + std::log1p(std::exp(b - a));
}

template <typename Derived>
typename Derived::Scalar LogSumExp(const Eigen::DenseBase<Derived> &values) {
  using Scalar = typename Derived::Scalar;
  if (values.size() == 0)
    Fail(ErrorKind::kUsage, "numerics", "log_sum_exp of an empty list");
  const Scalar max = values.maxCoeff();
  if (max == kLogZero<Scalar>) return kLogZero<Scalar>;
  if (!std::isfinite(max)) return max;  // +inf or NaN propagate
  return max + std::log((values.derived().array() - max).exp().sum());
}

inline double LogSumExp(std::span<const double> values) {
  return LogSumExp(Eigen::Map<const VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size())));
}

template <typename Derived>
Vector<typename Derived::Scalar> LogSoftmax(
    const Eigen::MatrixBase<Derived> &logits) {
  using Scalar = typename Derived::Scalar;
  if (!logits.allFinite())
    Fail(ErrorKind::kUsage, "numerics", "log_softmax of non-finite logits");
  const Scalar max = logits.maxCoeff();
  Vector<Scalar> shifted = logits.array() - max;
  const Scalar log_norm = std::log(shifted.array().exp().sum());
  return shifted.array() - log_norm;
}

// Column-wise log-softmax of a (classes x items) matrix.
template <typename Derived>
Matrix<typename Derived::Scalar> LogSoftmaxColumns(
    const Eigen::MatrixBase<Derived> &logits) {
  using Scalar = typename Derived::Scalar;
  if (!logits.allFinite())
    Fail(ErrorKind::kUsage, "numerics", "log_softmax of non-finite logits");
  Matrix<Scalar> out = logits;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const Scalar max = out.col(c).maxCoeff();
    out.col(c).array() -= max;
    out.col(c).array() -= std::log(out.col(c).array().exp().sum());
  }
  return out;
}

// Backward pass of column-wise log-softmax: given dL/d(log_probs), returns
// dL/d(logits) = g - softmax * sum(g).
template <typename DerivedG, typename DerivedL>
Matrix<typename DerivedG::Scalar> LogSoftmaxColumnsBackward(
    const Eigen::MatrixBase<DerivedG> &grad_log_probs,
    const Eigen::MatrixBase<DerivedL> &log_probs) {
  Matrix<typename DerivedG::Scalar> probs = log_probs.array().exp();
  Matrix<typename DerivedG::Scalar> out = grad_log_probs;
  out -= (probs.array().rowwise() * grad_log_probs.colwise().sum().array())
             .matrix();
  return out;
}

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / 2 eps.
VectorXd FiniteDifferenceGradient(
    const std::function<double(const VectorXd &)> &loss_fn,
    const VectorXd &params, double epsilon);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). The floor keeps coordinates
// whose true gradient is ~0 from dominating through round-off.
double MaxRelativeError(const VectorXd &a, const VectorXd &b,
                        double floor = 1e-5);

}  // namespace rnntep

#endif  // RNNTEP_NUMERICS_H_
