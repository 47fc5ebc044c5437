#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "ccwnet/data.hpp"
#include "ccwnet/proportion.hpp"

namespace ccwnet {

/// A regression function g on (0, 2]^p. T1-T4 are univariate benchmarks,
/// T5-T6 six-dimensional ones; `custom` wraps an arbitrary evaluator.
class GFunction {
 public:
  enum class Tag { T1, T2, T3, T4, T5, T6, kCustom };
  using Evaluator = std::function<double(const Eigen::Ref<const Eigen::RowVectorXd>&)>;

  static GFunction standard(Tag tag);
  /// Parses "T1".."T6".
  static GFunction from_name(std::string_view name);
  static GFunction constant(double c, Index arity);
  static GFunction custom(std::string label, Index arity, Evaluator fn);

  Tag tag() const { return tag_; }
  Index arity() const { return arity_; }
  const std::string& name() const { return name_; }
  /// Human-readable formula, e.g. "-3 + 2x".
  const std::string& form() const { return form_; }

  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  /// g on every row of x.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& x) const;

 private:
  GFunction(Tag tag, Index arity, std::string name, std::string form, Evaluator fn)
      : tag_(tag), arity_(arity), name_(std::move(name)), form_(std::move(form)),
        fn_(std::move(fn)) {}

  Tag tag_;
  Index arity_;
  std::string name_;
  std::string form_;
  Evaluator fn_;
};

/// Covariates are i.i.d. uniform on (0, support_hi] in every coordinate.
struct PopulationSpec {
  GFunction g;
  double support_hi = 2.0;

  Index dim() const { return g.arity(); }
};

struct OracleResult {
  double p1 = 0.0;
  double se = 0.0;
};

inline constexpr std::uint64_t kDefaultOracleDraws = 10'000'000;

/// E[sigmoid(g(X))]. For p = 1 a composite 3-point Gauss-Legendre rule with
/// max(draws / 10, 10^5) panels; `se` is then the change from halving the
/// panel count. Otherwise plain Monte Carlo with its standard error.
OracleResult true_p1(const PopulationSpec& spec, std::uint64_t draws = kDefaultOracleDraws,
                     std::uint64_t seed = 0);

/// i.i.d. draws from the logistic model Y | X ~ Bernoulli(sigmoid(g(X))).
Dataset sample_population(const PopulationSpec& spec, Index n, std::uint64_t seed);

/// Exactly n1 cases and n0 controls by rejection from the population.
/// Throws DomainError("rare class exhaustion") past 10^4 (n1 + n0) draws.
CaseControlSample sample_case_control(const PopulationSpec& spec, Index n1, Index n0,
                                      std::uint64_t seed);

/// Independent covariate sample of size n_e summarised by the mean of h and
/// its squared standard error.
ExternalSummary make_external_summary(const PopulationSpec& spec, const SummarySpec& h,
                                      Index n_e, std::uint64_t seed);

/// m equispaced points k * hi / m, k = 1..m, as an m-by-1 matrix.
Eigen::MatrixXd univariate_grid(Index m, double hi = 2.0);

}  // namespace ccwnet
