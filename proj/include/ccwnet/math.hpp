#pragma once

#include <cmath>
#include <type_traits>

#include <Eigen/Core>

namespace ccwnet {

/// Logistic function, evaluated without overflow for any finite t.
template <class Scalar>
  requires std::is_floating_point_v<Scalar>
inline Scalar sigmoid(Scalar t) {
  if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-t));
  const Scalar e = std::exp(t);
  return e / (Scalar(1) + e);
}

/// log(1 + e^t).
template <class Scalar>
  requires std::is_floating_point_v<Scalar>
inline Scalar softplus(Scalar t) {
  return t > Scalar(0) ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

/// Elementwise sigmoid of an Eigen array expression.
template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  return t.unaryExpr([](Scalar v) { return sigmoid(v); });
}

template <class Derived>
auto softplus(const Eigen::ArrayBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  return t.unaryExpr([](Scalar v) { return softplus(v); });
}

}  // namespace ccwnet
