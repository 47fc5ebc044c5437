#include "ccwnet/data.hpp"

#include <cmath>
#include <string>

#include "ccwnet/error.hpp"

namespace ccwnet {

Dataset::Dataset(Index p) : p_(p), x_(0, p), y_(0) {
  if (p < 1) throw ConfigError("dataset dimension must be positive");
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y)
    : p_(x.cols()), x_(std::move(x)), y_(std::move(y)) {
  if (p_ < 1) throw ConfigError("dataset dimension must be positive");
  if (x_.rows() != y_.size()) throw ConfigError("covariate and label row counts differ");
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_(i) != 0.0 && y_(i) != 1.0) {
      throw ConfigError("label at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
  if (!x_.allFinite()) throw ConfigError("covariates contain non-finite entries");
}

Index Dataset::count_label(int label) const {
  return (y_.array() == static_cast<double>(label)).count();
}

Dataset Dataset::select(std::span<const Index> indices) const {
  Eigen::MatrixXd x(static_cast<Index>(indices.size()), p_);
  Eigen::VectorXd y(static_cast<Index>(indices.size()));
  for (Index k = 0; k < static_cast<Index>(indices.size()); ++k) {
    x.row(k) = x_.row(indices[k]);
    y(k) = y_(indices[k]);
  }
  Dataset out(p_);
  out.x_ = std::move(x);
  out.y_ = std::move(y);
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return p_ == other.p_ && x_.rows() == other.x_.rows() && x_ == other.x_ &&
         y_ == other.y_;
}

CaseControlSample::CaseControlSample(Dataset data) : data_(std::move(data)) {
  n1_ = data_.count_label(1);
  n0_ = data_.count_label(0);
  if (n1_ < 1 || n0_ < 1) {
    throw DomainError("case-control sample needs at least one case and one control (got " +
                      std::to_string(n1_) + " cases, " + std::to_string(n0_) + " controls)");
  }
}

SummarySpec SummarySpec::affine(Index j, double a, double b) {
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
    throw ConfigError("affine summary requires finite a != 0 and finite b");
  }
  return {Kind::kAffine, j, a, b};
}

void SummarySpec::validate(Index p) const {
  if (j < 0 || j >= p) {
    throw ConfigError("summary coordinate " + std::to_string(j) + " out of range for p = " +
                      std::to_string(p));
  }
  if (kind == Kind::kAffine && a == 0.0) throw ConfigError("affine summary requires a != 0");
  if (kind == Kind::kCoordinate && (a != 1.0 || b != 0.0)) {
    throw ConfigError("coordinate summary carries a non-identity transform");
  }
}

}  // namespace ccwnet
