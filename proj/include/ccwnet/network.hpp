#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ccwnet/data.hpp"
#include "ccwnet/error.hpp"
#include "ccwnet/math.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

/// Fully connected ReLU network: `depth` hidden layers of `width` units and a
/// linear scalar output.
struct Architecture {
  Index input_dim = 1;
  Index depth = 1;
  Index width = 1;

  void validate() const {
    if (input_dim < 1 || depth < 1 || width < 1) {
      throw ConfigError("architecture needs positive input_dim, depth and width");
    }
  }
  /// Number of trainable parameters.
  Index size() const {
    return width * (input_dim + 1) + (width * width + width) * (depth - 1) + width + 1;
  }
  bool operator==(const Architecture&) const = default;
};

template <class Scalar>
struct BasicGradients {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  Scalar squared_norm() const {
    Scalar s(0);
    for (const auto& w : weights) s += w.squaredNorm();
    for (const auto& b : biases) s += b.squaredNorm();
    return s;
  }
};

template <class Scalar>
class BasicNetwork {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  BasicNetwork() = default;

  /// All-zero parameters with the shapes implied by `arch`.
  explicit BasicNetwork(const Architecture& arch) : arch_(arch) {
    arch.validate();
    Index fan_in = arch.input_dim;
    for (Index l = 0; l <= arch.depth; ++l) {
      const Index fan_out = l == arch.depth ? 1 : arch.width;
      weights_.push_back(Matrix::Zero(fan_out, fan_in));
      biases_.push_back(Vector::Zero(fan_out));
      fan_in = fan_out;
    }
  }

  const Architecture& architecture() const { return arch_; }
  Index layers() const { return static_cast<Index>(weights_.size()); }

  Matrix& weight(Index l) { return weights_[static_cast<std::size_t>(l)]; }
  const Matrix& weight(Index l) const { return weights_[static_cast<std::size_t>(l)]; }
  Vector& bias(Index l) { return biases_[static_cast<std::size_t>(l)]; }
  const Vector& bias(Index l) const { return biases_[static_cast<std::size_t>(l)]; }

  const std::optional<Scalar>& output_clamp() const { return clamp_; }
  void set_output_clamp(std::optional<Scalar> bound) {
    if (bound && !(*bound > Scalar(0))) throw ConfigError("output clamp must be positive");
    clamp_ = bound;
  }

  bool all_finite() const {
    for (const auto& w : weights_) if (!w.allFinite()) return false;
    for (const auto& b : biases_) if (!b.allFinite()) return false;
    return true;
  }

  BasicGradients<Scalar> zero_gradients() const {
    BasicGradients<Scalar> g;
    for (const auto& w : weights_) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : biases_) g.biases.push_back(Vector::Zero(b.size()));
    return g;
  }

  /// this -= step * grads
  void descend(const BasicGradients<Scalar>& grads, Scalar step) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      weights_[l].noalias() -= step * grads.weights[l];
      biases_[l].noalias() -= step * grads.biases[l];
    }
  }

  Scalar clip(Scalar z) const { return clamp_ ? std::clamp(z, -*clamp_, *clamp_) : z; }

  /// Network output for a batch stored column-wise (input_dim-by-m).
  RowVector forward_columns(const Matrix& xt) const {
    Matrix a = xt;
    for (Index l = 0; l + 1 < layers(); ++l) {
      Matrix z = weight(l) * a;
      z.colwise() += bias(l);
      a = z.cwiseMax(Scalar(0));
    }
    RowVector out = weight(layers() - 1) * a;
    out.array() += bias(layers() - 1)(0);
    if (clamp_) out = out.unaryExpr([this](Scalar v) { return clip(v); });
    return out;
  }

  /// Output on every row of x (n-by-input_dim).
  Vector forward_rows(const Matrix& x) const { return forward_columns(x.transpose()).transpose(); }

  Scalar operator()(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != arch_.input_dim) throw ConfigError("network input has the wrong dimension");
    return forward_columns(x)(0);
  }

  template <class Other>
  BasicNetwork<Other> cast() const {
    BasicNetwork<Other> out(arch_);
    for (Index l = 0; l < layers(); ++l) {
      out.weight(l) = weight(l).template cast<Other>();
      out.bias(l) = bias(l).template cast<Other>();
    }
    if (clamp_) out.set_output_clamp(static_cast<Other>(*clamp_));
    return out;
  }

  bool operator==(const BasicNetwork& other) const {
    if (!(arch_ == other.arch_) || clamp_ != other.clamp_) return false;
    for (Index l = 0; l < layers(); ++l) {
      if (weight(l) != other.weight(l) || bias(l) != other.bias(l)) return false;
    }
    return true;
  }

 private:
  Architecture arch_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  std::optional<Scalar> clamp_;
};

using Network = BasicNetwork<double>;
using Gradients = BasicGradients<double>;

/// He initialisation: weights ~ N(0, 2 / fan_in), biases zero.
template <class Scalar = double>
BasicNetwork<Scalar> init_network(const Architecture& arch, std::uint64_t seed) {
  BasicNetwork<Scalar> net(arch);
  Rng rng(seed);
  for (Index l = 0; l < net.layers(); ++l) {
    auto& w = net.weight(l);
    const Scalar scale = std::sqrt(Scalar(2) / static_cast<Scalar>(w.cols()));
    // Row-major fill order, independent of the storage layout.
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = scale * static_cast<Scalar>(standard_normal(rng));
    }
  }
  return net;
}

/// Per-row loss coefficients of the weighted objective: y / w1 and (1 - y) / w0.
struct LossWeights {
  double inv_w1 = 1.0;
  double inv_w0 = 1.0;

  static LossWeights from_weights(double w1, double w0) {
    if (!(w1 > 0.0 && w0 > 0.0)) throw ConfigError("sampling weights must be positive");
    return {1.0 / w1, 1.0 / w0};
  }
};

/// Weighted negative log-likelihood of network outputs `g` against labels `y`:
/// (1/m) sum [ y/w1 softplus(-g) + (1-y)/w0 softplus(g) ].
template <class Scalar, class DerivedG, class DerivedY>
Scalar weighted_loss_from_outputs(const Eigen::MatrixBase<DerivedG>& g,
                                  const Eigen::MatrixBase<DerivedY>& y, LossWeights lw) {
  const auto ga = g.array();
  const auto ya = y.array();
  const Scalar c1 = static_cast<Scalar>(lw.inv_w1);
  const Scalar c0 = static_cast<Scalar>(lw.inv_w0);
  const Scalar total = (c1 * ya * softplus((-ga).eval()) +
                        c0 * (Scalar(1) - ya) * softplus(ga.eval())).sum();
  return total / static_cast<Scalar>(g.size());
}

/// Reusable buffers for forward/backward passes on batches of up to a fixed size.
template <class Scalar>
class Backprop {
 public:
  using Matrix = typename BasicNetwork<Scalar>::Matrix;
  using RowVector = typename BasicNetwork<Scalar>::RowVector;

  /// Loss of `net` on the batch (columns of xt, labels y) and its exact
  /// gradient written into `grads`.
  template <class DerivedX, class DerivedY>
  Scalar run(const BasicNetwork<Scalar>& net, const Eigen::MatrixBase<DerivedX>& xt,
             const Eigen::MatrixBase<DerivedY>& y, LossWeights lw, BasicGradients<Scalar>& grads) {
    const Index layers = net.layers();
    const Index m = xt.cols();
    acts_.resize(static_cast<std::size_t>(layers));
    acts_[0] = xt;
    for (Index l = 0; l + 1 < layers; ++l) {
      auto& a = acts_[static_cast<std::size_t>(l + 1)];
      a.noalias() = net.weight(l) * acts_[static_cast<std::size_t>(l)];
      a = (a.colwise() + net.bias(l)).cwiseMax(Scalar(0));
    }
    RowVector z = net.weight(layers - 1) * acts_.back();
    z.array() += net.bias(layers - 1)(0);
    const RowVector g = net.output_clamp() ? RowVector(z.unaryExpr([&](Scalar v) { return net.clip(v); })) : z;

    const Scalar loss = weighted_loss_from_outputs<Scalar>(g, y.transpose(), lw);

    // Output residual (1/m) [y/w1 (psi(g) - 1) + (1-y)/w0 psi(g)].
    const Scalar c1 = static_cast<Scalar>(lw.inv_w1);
    const Scalar c0 = static_cast<Scalar>(lw.inv_w0);
    const Scalar inv_m = Scalar(1) / static_cast<Scalar>(m);
    RowVector delta(m);
    for (Index i = 0; i < m; ++i) {
      const Scalar s = sigmoid(g(i));
      const Scalar yi = y(i);
      delta(i) = inv_m * (c1 * yi * (s - Scalar(1)) + c0 * (Scalar(1) - yi) * s);
      if (net.output_clamp() && g(i) != z(i)) delta(i) = Scalar(0);
    }

    delta_ = delta;
    for (Index l = layers - 1; l >= 0; --l) {
      const auto& a_in = acts_[static_cast<std::size_t>(l)];
      grads.weights[static_cast<std::size_t>(l)].noalias() = delta_ * a_in.transpose();
      grads.biases[static_cast<std::size_t>(l)] = delta_.rowwise().sum();
      if (l == 0) break;
      back_.noalias() = net.weight(l).transpose() * delta_;
      // ReLU subgradient: zero where the unit was inactive (including exactly 0).
      delta_ = (a_in.array() > Scalar(0)).select(back_.array(), Scalar(0)).matrix();
    }
    return loss;
  }

 private:
  std::vector<Matrix> acts_;
  Matrix delta_;
  Matrix back_;
};

/// Weighted objective on a case-control batch.
template <class Scalar = double>
Scalar weighted_loss(const BasicNetwork<Scalar>& net, const CaseControlSample& batch, double w1,
                     double w0) {
  const auto lw = LossWeights::from_weights(w1, w0);
  const auto xt = batch.data().x().transpose().template cast<Scalar>().eval();
  const auto y = batch.data().y().template cast<Scalar>().eval();
  return weighted_loss_from_outputs<Scalar>(net.forward_columns(xt), y.transpose(), lw);
}

template <class Scalar = double>
struct LossAndGradients {
  Scalar loss;
  BasicGradients<Scalar> grads;
};

template <class Scalar = double>
LossAndGradients<Scalar> gradient(const BasicNetwork<Scalar>& net, const CaseControlSample& batch,
                                  double w1, double w0) {
  const auto lw = LossWeights::from_weights(w1, w0);
  const auto xt = batch.data().x().transpose().template cast<Scalar>().eval();
  const auto y = batch.data().y().template cast<Scalar>().eval();
  LossAndGradients<Scalar> out{Scalar(0), net.zero_gradients()};
  Backprop<Scalar> bp;
  out.loss = bp.run(net, xt, y, lw, out.grads);
  return out;
}

extern template class BasicNetwork<double>;
extern template class Backprop<double>;

}  // namespace ccwnet
