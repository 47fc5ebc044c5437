#include "ccwnet/proportion.hpp"

#include <algorithm>
#include <cmath>

#include "ccwnet/error.hpp"

namespace ccwnet {

void ExternalSummary::validate() const {
  if (!std::isfinite(mu_tilde)) throw ConfigError("mu_tilde must be finite");
  if (v_ext && !(*v_ext >= 0.0 && std::isfinite(*v_ext))) {
    throw ConfigError("v_ext must be finite and nonnegative");
  }
  if (n_e && *n_e < 1) throw ConfigError("n_e must be positive");
}

ConditionalMeans conditional_means(const CaseControlSample& sample, const SummarySpec& h) {
  const Dataset& data = sample.data();
  h.validate(data.dim());
  const Eigen::ArrayXd hx = h.apply_rows(data.x()).array();
  const Eigen::ArrayXd y = data.y().array();
  return {(y * hx).sum() / static_cast<double>(sample.n1()),
          ((1.0 - y) * hx).sum() / static_cast<double>(sample.n0())};
}

ProportionPoint estimate_p1(double mu1_hat, double mu0_hat, double mu_tilde, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 0.5)");
  const double gap = mu1_hat - mu0_hat;
  if (!(std::abs(gap) > 1e-12)) {
    throw DomainError("summary non-identifying: case and control means of h coincide");
  }
  const double p = (mu_tilde - mu0_hat) / gap;
  return {p, std::clamp(p, epsilon, 1.0 - epsilon)};
}

std::pair<double, double> estimate_weights(Index n1, Index n0, Index n, double p1) {
  if (n1 + n0 != n || n1 < 0 || n0 < 0) throw ConfigError("n must equal n1 + n0");
  if (!(p1 > 0.0 && p1 < 1.0)) throw DomainError("case proportion must lie strictly in (0, 1)");
  const double nd = static_cast<double>(n);
  return {static_cast<double>(n1) / (nd * p1), static_cast<double>(n0) / (nd * (1.0 - p1))};
}

namespace {

double stratum_variance(const Eigen::ArrayXd& hx, const Eigen::ArrayXd& mask, double mean,
                        Index count) {
  return (mask * (hx - mean).square()).sum() / static_cast<double>(count - 1);
}

}  // namespace

ProportionEstimate delta_variance(const CaseControlSample& sample, const ExternalSummary& summary,
                                  double epsilon) {
  summary.validate();
  if (sample.n1() < 2 || sample.n0() < 2) {
    throw DomainError("delta-method variance needs at least two cases and two controls");
  }
  const auto [mu1, mu0] = conditional_means(sample, summary.h);
  const auto point = estimate_p1(mu1, mu0, summary.mu_tilde, epsilon);

  ProportionEstimate est;
  est.n = sample.n();
  est.mu1_hat = mu1;
  est.mu0_hat = mu0;
  est.mu_tilde = summary.mu_tilde;
  est.p1_hat = point.p1_hat;
  est.p1_hat_clamped = point.p1_hat_clamped;
  est.clamped = point.p1_hat != point.p1_hat_clamped;
  std::tie(est.w1_hat, est.w0_hat) =
      estimate_weights(sample.n1(), sample.n0(), sample.n(), point.p1_hat_clamped);

  const double gap = mu1 - mu0;
  const double mu = summary.mu_tilde;
  est.a1 = (mu0 - mu) / (gap * gap);
  est.a2 = (mu - mu1) / (gap * gap);
  est.a3 = 1.0 / gap;

  const Dataset& data = sample.data();
  const Eigen::ArrayXd hx = summary.h.apply_rows(data.x()).array();
  const Eigen::ArrayXd y = data.y().array();
  const double nd = static_cast<double>(sample.n());
  const double lambda1 = static_cast<double>(sample.n1()) / nd;
  est.v1 = stratum_variance(hx, y, mu1, sample.n1()) / lambda1;
  est.v0 = stratum_variance(hx, 1.0 - y, mu0, sample.n0()) / (1.0 - lambda1);
  est.summary_exact = !summary.v_ext.has_value();
  est.v = summary.v_ext ? nd * *summary.v_ext : 0.0;

  est.variance = est.a1 * est.a1 * est.v1 + est.a2 * est.a2 * est.v0 + est.a3 * est.a3 * est.v;
  est.se = std::sqrt(est.variance / nd);
  est.ci_lo = est.p1_hat - kNormalQuantile975 * est.se;
  est.ci_hi = est.p1_hat + kNormalQuantile975 * est.se;
  return est;
}

}  // namespace ccwnet
