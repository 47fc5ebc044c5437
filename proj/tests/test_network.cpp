#include <doctest.h>

#include <cmath>

#include "ccwnet/network.hpp"
#include "support.hpp"

using namespace ccwnet;
using namespace ccwnet::testing;

namespace {

Network single_unit(double w0, double b0, double w1, double b1) {
  Network net(Architecture{1, 1, 1});
  net.weight(0)(0, 0) = w0;
  net.bias(0)(0) = b0;
  net.weight(1)(0, 0) = w1;
  net.bias(1)(0) = b1;
  return net;
}

CaseControlSample one_row(double label, double x, double other_label_x = 100.0) {
  // The second row, of the other label, keeps the sample valid.
  Eigen::MatrixXd m(2, 1);
  m << x, other_label_x;
  Eigen::VectorXd y(2);
  y << label, 1.0 - label;
  return CaseControlSample(Dataset(m, y));
}

}  // namespace

TEST_CASE("architecture size and shapes") {
  const Architecture arch{1, 2, 64};
  CHECK(arch.size() == 64 * 2 + (64 * 64 + 64) + 64 + 1);
  const auto net = init_network(arch, 1);
  REQUIRE(net.layers() == 3);
  CHECK(net.weight(0).rows() == 64);
  CHECK(net.weight(0).cols() == 1);
  CHECK(net.weight(1).rows() == 64);
  CHECK(net.weight(1).cols() == 64);
  CHECK(net.weight(2).rows() == 1);
  CHECK(net.weight(2).cols() == 64);
  CHECK(net.bias(0).size() == 64);
  CHECK(net.bias(1).size() == 64);
  CHECK(net.bias(2).size() == 1);
  CHECK(net.bias(1).isZero());
  CHECK_THROWS_AS(Architecture({1, 0, 4}).validate(), ConfigError);
}

TEST_CASE("initialisation is deterministic with He variance") {
  const Architecture arch{4, 2, 64};
  CHECK(init_network(arch, 5) == init_network(arch, 5));
  CHECK_FALSE(init_network(arch, 5) == init_network(arch, 6));
  double sum_sq = 0;
  Index count = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto net = init_network(arch, s);
    sum_sq += net.weight(0).squaredNorm();
    count += net.weight(0).size();
  }
  CHECK(sum_sq / count == doctest::Approx(2.0 / 4.0).epsilon(0.2));
}

TEST_CASE("forward traces") {
  Network zero(Architecture{3, 2, 5});
  Eigen::VectorXd x = Eigen::VectorXd::Random(3);
  CHECK(zero(x) == 0.0);
  const auto unit = single_unit(1, 0, 1, 0);
  CHECK(unit(Eigen::VectorXd::Constant(1, -3.0)) == 0.0);
  CHECK(unit(Eigen::VectorXd::Constant(1, 2.0)) == 2.0);
  auto clamped = single_unit(1, 0, 1, 0);
  clamped.set_output_clamp(1.5);
  CHECK(clamped(Eigen::VectorXd::Constant(1, 2.0)) == 1.5);
}

TEST_CASE("forward agrees with the naive evaluator") {
  Rng rng(3);
  const auto net = init_network(Architecture{3, 3, 7}, 11);
  const auto batch = random_batch(20, 3, rng);
  const Eigen::VectorXd out = net.forward_rows(batch.data().x());
  for (Index i = 0; i < 20; ++i) CHECK(out(i) == doctest::Approx(static_cast<double>(naive_forward(net, batch.data().x(), i))));
}

TEST_CASE("weighted loss examples") {
  Network zero(Architecture{1, 1, 2});
  // Both rows have g = 0, so either label contributes log 2 scaled by its weight.
  const auto s = one_row(1.0, 0.5);
  CHECK(weighted_loss(zero, s, 1.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(weighted_loss(zero, s, 1.0, 2.0) == doctest::Approx(0.5 * (std::log(2.0) + 0.5 * std::log(2.0))));
  CHECK(weighted_loss_from_outputs<double>(Eigen::RowVectorXd::Zero(1), Eigen::RowVectorXd::Ones(1),
                                           LossWeights::from_weights(1.0, 1.0)) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(weighted_loss_from_outputs<double>(Eigen::RowVectorXd::Zero(1), Eigen::RowVectorXd::Zero(1),
                                           LossWeights::from_weights(1.0, 2.0)) == doctest::Approx(0.346574).epsilon(1e-6));
}

TEST_CASE("unit weights reduce to binary cross-entropy") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::RowVectorXd g(16), y(16);
    double bce = 0;
    for (Index i = 0; i < 16; ++i) {
      g(i) = 6.0 * standard_normal(rng);
      y(i) = uniform01(rng) < 0.5 ? 1.0 : 0.0;
      const double p = 1.0 / (1.0 + std::exp(-g(i)));
      bce -= y(i) * std::log(p) + (1 - y(i)) * std::log(1 - p);
    }
    bce /= 16;
    CHECK(std::abs(weighted_loss_from_outputs<double>(g, y, LossWeights::from_weights(1, 1)) - bce) < 1e-12);
  }
}

TEST_CASE("loss stays finite for |g| up to 1e4") {
  for (double g : {-1e4, -700.0, 700.0, 1e4}) {
    for (double y : {0.0, 1.0}) {
      const double l = weighted_loss_from_outputs<double>(Eigen::RowVectorXd::Constant(1, g),
                                                          Eigen::RowVectorXd::Constant(1, y), LossWeights{2.0, 0.5});
      CHECK(std::isfinite(l));
    }
  }
  CHECK(weighted_loss_from_outputs<double>(Eigen::RowVectorXd::Constant(1, -1e4), Eigen::RowVectorXd::Ones(1),
                                           LossWeights{1.0, 1.0}) == doctest::Approx(1e4));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(12345);
  int trials = 0;
  while (trials < 100) {
    const auto net = init_network(Architecture{2, 2, 4}, rng());
    const auto batch = random_batch(8, 2, rng);
    if (min_abs_preactivation(net, batch.data()) < 1e-3) continue;  // stay off ReLU kinks
    const double w1 = 0.3 + 2.0 * uniform01(rng);
    const double w0 = 0.3 + 2.0 * uniform01(rng);
    const auto [loss, grads] = gradient(net, batch, w1, w0);
    CHECK(loss == doctest::Approx(static_cast<double>(naive_loss(net, batch.data(), w1, w0))).epsilon(1e-12));
    CHECK(max_gradient_error(net, batch, w1, w0, grads, 1e-5L) < 1e-5L);
    ++trials;
  }
}

TEST_CASE("gradient vanishes at a saturated perfect fit") {
  // Cases at x = 1 get g = 40, controls at x = -1 get g = -40.
  const auto net = single_unit(1.0, 0.0, 80.0, -40.0);
  Eigen::MatrixXd x(4, 1);
  x << 1, 1, -1, -1;
  Eigen::VectorXd y(4);
  y << 1, 1, 0, 0;
  const auto [loss, grads] = gradient(net, CaseControlSample(Dataset(x, y)), 1.0, 1.0);
  CHECK(std::sqrt(grads.squared_norm()) < 1e-6);
  CHECK(loss < 1e-6);
}

TEST_CASE("gradient is linear in the inverse weights") {
  Rng rng(4);
  const auto net = init_network(Architecture{3, 2, 6}, 9);
  const auto batch = random_batch(10, 3, rng);
  const auto a = gradient(net, batch, 1.5, 0.75);
  const auto b = gradient(net, batch, 0.75, 0.375);
  CHECK(b.loss == 2.0 * a.loss);
  for (std::size_t l = 0; l < a.grads.weights.size(); ++l) {
    CHECK(b.grads.weights[l] == 2.0 * a.grads.weights[l]);
    CHECK(b.grads.biases[l] == 2.0 * a.grads.biases[l]);
  }
}

TEST_CASE("hidden layers are positively homogeneous") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto net = init_network(Architecture{3, 1, 8}, rng());
    net.bias(0).setRandom();
    net.bias(1)(0) = 0.7;
    const double c = 0.1 + 3.0 * uniform01(rng);
    auto scaled = net;
    scaled.weight(0) *= c;
    scaled.bias(0) *= c;
    const auto batch = random_batch(12, 3, rng);
    const Eigen::VectorXd base = net.forward_rows(batch.data().x()).array() - 0.7;
    const Eigen::VectorXd got = scaled.forward_rows(batch.data().x()).array() - 0.7;
    CHECK((got - c * base).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + base.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("output clamp zeroes the gradient outside the band") {
  auto net = single_unit(1.0, 0.0, 1.0, 5.0);
  net.set_output_clamp(2.0);
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  Eigen::VectorXd y(2);
  y << 1, 0;
  const auto [loss, grads] = gradient(net, CaseControlSample(Dataset(x, y)), 1.0, 1.0);
  CHECK(grads.squared_norm() == 0.0);
  CHECK(std::isfinite(loss));
}
