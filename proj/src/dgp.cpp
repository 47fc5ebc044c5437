#include "ccwnet/dgp.hpp"

#include <array>
#include <cmath>

#include "ccwnet/error.hpp"
#include "ccwnet/math.hpp"
#include "ccwnet/rng.hpp"

namespace ccwnet {

namespace {

double t1(const Eigen::Ref<const Eigen::RowVectorXd>& x) { return -3.0 + 2.0 * x(0); }
double t2(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return -2.0 + 3.0 * std::sin(4.0 * x(0));
}
double t3(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double d = x(0) - 1.0;
  return -2.0 * d * d;
}
double t4(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (!(x(0) > 0.0)) throw DomainError("T4 is undefined for x <= 0");
  return -2.0 - std::log(x(0));
}
double t5(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return -4.0 * x(0) + x(1) + x(2) - 3.0 * x(3) * x(3) + std::sqrt(x(4) * std::exp(x(5)));
}
double t6(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return std::sin(x(0) + x(1)) + x(2) - 2.0 * x(3) * x(3) + x(4) * std::log(x(5) + 3.0);
}

}  // namespace

GFunction GFunction::standard(Tag tag) {
  switch (tag) {
    case Tag::T1: return {tag, 1, "T1", "-3 + 2x", t1};
    case Tag::T2: return {tag, 1, "T2", "-2 + 3sin(4x)", t2};
    case Tag::T3: return {tag, 1, "T3", "-2(x-1)^2", t3};
    case Tag::T4: return {tag, 1, "T4", "-2 - log(x)", t4};
    case Tag::T5: return {tag, 6, "T5", "-4x1 + x2 + x3 - 3x4^2 + sqrt(x5 exp(x6))", t5};
    case Tag::T6: return {tag, 6, "T6", "sin(x1 + x2) + x3 - 2x4^2 + x5 log(x6 + 3)", t6};
    case Tag::kCustom: break;
  }
  throw ConfigError("custom g has no standard form");
}

GFunction GFunction::from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 6> kNames{"T1", "T2", "T3", "T4", "T5", "T6"};
  for (std::size_t k = 0; k < kNames.size(); ++k) {
    if (name == kNames[k]) return standard(static_cast<Tag>(k));
  }
  throw ConfigError("unknown g function '" + std::string(name) + "' (expected T1..T6)");
}

GFunction GFunction::constant(double c, Index arity) {
  return {Tag::kCustom, arity, "const", std::to_string(c),
          [c](const Eigen::Ref<const Eigen::RowVectorXd>&) { return c; }};
}

GFunction GFunction::custom(std::string label, Index arity, Evaluator fn) {
  if (arity < 1) throw ConfigError("g arity must be positive");
  return {Tag::kCustom, arity, label, label, std::move(fn)};
}

double GFunction::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != arity_) throw ConfigError("g evaluated at a point of the wrong dimension");
  return fn_(x);
}

Eigen::VectorXd GFunction::evaluate(const Eigen::MatrixXd& x) const {
  if (x.cols() != arity_) throw ConfigError("g evaluated on rows of the wrong dimension");
  Eigen::VectorXd out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = fn_(x.row(i));
  return out;
}

namespace {

double quadrature_p1(const GFunction& g, double hi, std::uint64_t panels) {
  // 3-point Gauss-Legendre nodes on [-1, 1]; none touches a panel endpoint.
  constexpr double kNode = 0.7745966692414833770359;
  constexpr double kW0 = 8.0 / 9.0;
  constexpr double kW1 = 5.0 / 9.0;
  const double h = hi / static_cast<double>(panels);
  Eigen::RowVectorXd x(1);
  double total = 0.0;
  for (std::uint64_t k = 0; k < panels; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * h;
    double s = 0.0;
    x(0) = mid;
    s += kW0 * sigmoid(g(x));
    x(0) = mid - 0.5 * h * kNode;
    s += kW1 * sigmoid(g(x));
    x(0) = mid + 0.5 * h * kNode;
    s += kW1 * sigmoid(g(x));
    total += 0.5 * h * s;
  }
  return total / hi;
}

}  // namespace

OracleResult true_p1(const PopulationSpec& spec, std::uint64_t draws, std::uint64_t seed) {
  if (draws < 1) throw ConfigError("oracle needs at least one draw");
  if (spec.dim() == 1) {
    std::uint64_t panels = std::max<std::uint64_t>(draws / 10, 100'000);
    panels += panels % 2;
    const double fine = quadrature_p1(spec.g, spec.support_hi, panels);
    const double coarse = quadrature_p1(spec.g, spec.support_hi, panels / 2);
    return {fine, std::abs(fine - coarse)};
  }
  Rng rng(derive_seed(seed, {tag(Stream::kOracle)}));
  Eigen::RowVectorXd x(spec.dim());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t k = 0; k < draws; ++k) {
    for (Index j = 0; j < x.size(); ++j) x(j) = uniform_open_low(rng, spec.support_hi);
    const double s = sigmoid(spec.g(x));
    sum += s;
    sum_sq += s * s;
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum / nd;
  const double var = draws > 1 ? std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0)) : 0.0;
  return {mean, std::sqrt(var / nd)};
}

Dataset sample_population(const PopulationSpec& spec, Index n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("population sample size must be positive");
  Rng rng(derive_seed(seed, {tag(Stream::kSample)}));
  Eigen::MatrixXd x(n, spec.dim());
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < spec.dim(); ++j) x(i, j) = uniform_open_low(rng, spec.support_hi);
    y(i) = uniform01(rng) < sigmoid(spec.g(x.row(i))) ? 1.0 : 0.0;
  }
  return Dataset(std::move(x), std::move(y));
}

CaseControlSample sample_case_control(const PopulationSpec& spec, Index n1, Index n0,
                                      std::uint64_t seed) {
  if (n1 < 1 || n0 < 1) throw ConfigError("case-control quotas must be positive");
  Rng rng(derive_seed(seed, {tag(Stream::kSample)}));
  const Index p = spec.dim();
  Eigen::MatrixXd x(n1 + n0, p);
  Eigen::VectorXd y(n1 + n0);
  // Cases fill rows [0, n1), controls [n1, n1 + n0).
  Index cases = 0;
  Index controls = 0;
  const std::uint64_t budget = 10'000ull * static_cast<std::uint64_t>(n1 + n0);
  Eigen::RowVectorXd row(p);
  for (std::uint64_t draw = 0; cases < n1 || controls < n0; ++draw) {
    if (draw >= budget) {
      throw DomainError("rare class exhaustion: quota unfilled after " + std::to_string(budget) +
                        " population draws (" + std::to_string(cases) + "/" +
                        std::to_string(n1) + " cases, " + std::to_string(controls) + "/" +
                        std::to_string(n0) + " controls)");
    }
    for (Index j = 0; j < p; ++j) row(j) = uniform_open_low(rng, spec.support_hi);
    const bool is_case = uniform01(rng) < sigmoid(spec.g(row));
    if (is_case && cases < n1) {
      x.row(cases) = row;
      y(cases++) = 1.0;
    } else if (!is_case && controls < n0) {
      x.row(n1 + controls) = row;
      y(n1 + controls++) = 0.0;
    }
  }
  return CaseControlSample(Dataset(std::move(x), std::move(y)));
}

ExternalSummary make_external_summary(const PopulationSpec& spec, const SummarySpec& h,
                                      Index n_e, std::uint64_t seed) {
  if (n_e < 2) throw ConfigError("external sample size must be at least 2");
  h.validate(spec.dim());
  Rng rng(derive_seed(seed, {tag(Stream::kSummary)}));
  Eigen::MatrixXd x(n_e, spec.dim());
  for (Index i = 0; i < n_e; ++i) {
    for (Index j = 0; j < spec.dim(); ++j) x(i, j) = uniform_open_low(rng, spec.support_hi);
  }
  const Eigen::ArrayXd hx = h.apply_rows(x).array();
  const double mean = hx.mean();
  const double var = (hx - mean).square().sum() / static_cast<double>(n_e - 1);
  return ExternalSummary{h, mean, var / static_cast<double>(n_e), n_e};
}

Eigen::MatrixXd univariate_grid(Index m, double hi) {
  Eigen::MatrixXd grid(m, 1);
  for (Index k = 0; k < m; ++k) grid(k, 0) = hi * static_cast<double>(k + 1) / static_cast<double>(m);
  return grid;
}

}  // namespace ccwnet
