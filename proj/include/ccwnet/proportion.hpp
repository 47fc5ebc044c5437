#pragma once

#include <optional>
#include <utility>

#include "ccwnet/data.hpp"

namespace ccwnet {

/// External estimate of mu = E[h(X)]. `v_ext` is the squared standard error
/// of mu_tilde; when absent the summary is treated as exact.
struct ExternalSummary {
  SummarySpec h;
  double mu_tilde = 0.0;
  std::optional<double> v_ext;
  std::optional<Index> n_e;

  void validate() const;
};

struct ConditionalMeans {
  double mu1 = 0.0;
  double mu0 = 0.0;
};

struct ProportionPoint {
  double p1_hat = 0.0;
  double p1_hat_clamped = 0.0;
};

struct ProportionEstimate {
  double p1_hat = 0.0;
  double p1_hat_clamped = 0.0;
  bool clamped = false;
  double w1_hat = 1.0;
  double w0_hat = 1.0;
  double mu1_hat = 0.0;
  double mu0_hat = 0.0;
  double mu_tilde = 0.0;
  /// Asymptotic variance of sqrt(n) (p1_hat - P1).
  double variance = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  /// Partial derivatives of (mu, mu1, mu0) -> (mu - mu0) / (mu1 - mu0).
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double v1 = 0.0;
  double v0 = 0.0;
  double v = 0.0;
  bool summary_exact = true;
  Index n = 0;
};

inline constexpr double kDefaultClampEpsilon = 1e-3;
inline constexpr double kNormalQuantile975 = 1.959964;

ConditionalMeans conditional_means(const CaseControlSample& sample, const SummarySpec& h);

/// Throws DomainError("summary non-identifying") when |mu1 - mu0| <= 1e-12.
ProportionPoint estimate_p1(double mu1_hat, double mu0_hat, double mu_tilde,
                            double epsilon = kDefaultClampEpsilon);

/// (w1, w0) = (n1 / (n p1), n0 / (n (1 - p1))). Requires 0 < p1 < 1.
std::pair<double, double> estimate_weights(Index n1, Index n0, Index n, double p1);

/// Step one in full: plug-in estimate, weights, delta-method variance and 95% CI.
ProportionEstimate delta_variance(const CaseControlSample& sample, const ExternalSummary& summary,
                                  double epsilon = kDefaultClampEpsilon);

}  // namespace ccwnet
