#pragma once

// Test-only oracles: naive scalar network evaluation and loss, independent of
// the vectorised implementation, plus central finite differences.

#include <cmath>
#include <limits>

#include "ccwnet/data.hpp"
#include "ccwnet/network.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet::testing {

using Long = long double;

/// Output of `net` at row `i` of x, plus the smallest |pre-activation| seen.
template <class Scalar>
Long naive_forward(const BasicNetwork<Scalar>& net, const Eigen::MatrixXd& x, Index i, Long* min_abs_pre = nullptr) {
  std::vector<Long> a(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) a[static_cast<std::size_t>(j)] = x(i, j);
  for (Index l = 0; l < net.layers(); ++l) {
    const auto& w = net.weight(l);
    std::vector<Long> next(static_cast<std::size_t>(w.rows()));
    for (Index r = 0; r < w.rows(); ++r) {
      Long z = static_cast<Long>(net.bias(l)(r));
      for (Index c = 0; c < w.cols(); ++c) z += static_cast<Long>(w(r, c)) * a[static_cast<std::size_t>(c)];
      const bool hidden = l + 1 < net.layers();
      if (hidden && min_abs_pre) *min_abs_pre = std::min(*min_abs_pre, std::abs(z));
      next[static_cast<std::size_t>(r)] = hidden ? std::max(z, Long(0)) : z;
    }
    a = std::move(next);
  }
  return a[0];
}

/// -(1/m) sum [ y/w1 log sigmoid(g) + (1-y)/w0 log(1 - sigmoid(g)) ], written out directly.
template <class Scalar>
Long naive_loss(const BasicNetwork<Scalar>& net, const Dataset& d, double w1, double w0) {
  Long total = 0;
  for (Index i = 0; i < d.size(); ++i) {
    const Long g = naive_forward(net, d.x(), i);
    const Long log_p = -std::log1p(std::exp(-g));
    const Long log_q = -std::log1p(std::exp(g));
    total += d.label(i) / Long(w1) * log_p + (1 - d.label(i)) / Long(w0) * log_q;
  }
  return -total / static_cast<Long>(d.size());
}

template <class Scalar>
Long min_abs_preactivation(const BasicNetwork<Scalar>& net, const Dataset& d) {
  Long m = std::numeric_limits<Long>::infinity();
  for (Index i = 0; i < d.size(); ++i) naive_forward(net, d.x(), i, &m);
  return m;
}

inline Long relative_error(Long a, Long b, Long floor = 1e-8L) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Largest relative error between the analytic gradient and central
/// differences of the naive loss with the given step, over every parameter.
inline Long max_gradient_error(const Network& net, const CaseControlSample& batch, double w1, double w0,
                               const Gradients& grads, Long step) {
  auto probe = net.cast<Long>();
  Long worst = 0;
  auto check = [&](Long& param, double analytic) {
    const Long saved = param;
    param = saved + step;
    const Long up = naive_loss(probe, batch.data(), w1, w0);
    param = saved - step;
    const Long down = naive_loss(probe, batch.data(), w1, w0);
    param = saved;
    worst = std::max(worst, relative_error((up - down) / (2 * step), analytic));
  };
  for (Index l = 0; l < probe.layers(); ++l) {
    auto& w = probe.weight(l);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) check(w(r, c), grads.weights[static_cast<std::size_t>(l)](r, c));
    auto& b = probe.bias(l);
    for (Index r = 0; r < b.size(); ++r) check(b(r), grads.biases[static_cast<std::size_t>(l)](r));
  }
  return worst;
}

/// Random labelled batch with standard normal covariates and both labels present.
inline CaseControlSample random_batch(Index m, Index p, Rng& rng) {
  Eigen::MatrixXd x(m, p);
  Eigen::VectorXd y(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = standard_normal(rng);
    y(i) = i % 2 == 0 ? 1.0 : 0.0;
  }
  return CaseControlSample(Dataset(x, y));
}

}  // namespace ccwnet::testing
