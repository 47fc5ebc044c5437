#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace ccwnet {

using Index = Eigen::Index;

/// Labeled covariate rows. `x` is n-by-p, `y` holds exact 0/1 labels.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Index p);
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

  Index size() const { return x_.rows(); }
  Index dim() const { return p_; }
  bool empty() const { return size() == 0; }

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  auto row(Index i) const { return x_.row(i); }
  double label(Index i) const { return y_(i); }

  Index count_label(int label) const;

  /// Rows at `indices`, in that order.
  Dataset select(std::span<const Index> indices) const;

  bool operator==(const Dataset& other) const;

 private:
  Index p_ = 0;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
};

/// A dataset holding at least one case and one control.
class CaseControlSample {
 public:
  explicit CaseControlSample(Dataset data);

  const Dataset& data() const { return data_; }
  Index n1() const { return n1_; }
  Index n0() const { return n0_; }
  Index n() const { return n1_ + n0_; }
  Index dim() const { return data_.dim(); }

  bool operator==(const CaseControlSample& other) const { return data_ == other.data_; }

 private:
  Dataset data_;
  Index n1_ = 0;
  Index n0_ = 0;
};

/// The summary moment h(x): a coordinate, or an affine map a*x_j + b of one.
struct SummarySpec {
  enum class Kind { kCoordinate, kAffine };

  Kind kind = Kind::kCoordinate;
  Index j = 0;
  double a = 1.0;
  double b = 0.0;

  static SummarySpec coordinate(Index j) { return {Kind::kCoordinate, j, 1.0, 0.0}; }
  static SummarySpec affine(Index j, double a, double b);

  /// Throws ConfigError when j is out of range for dimension p.
  void validate(Index p) const;

  double apply(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return a * x(j) + b;
  }
  /// h evaluated on every row of x.
  Eigen::VectorXd apply_rows(const Eigen::MatrixXd& x) const {
    return (a * x.col(j).array() + b).matrix();
  }
};

struct SplitSpec {
  double train = 0.8;
  double validation = 0.2;
  double test = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  CaseControlSample train;
  std::optional<CaseControlSample> validation;
  std::optional<CaseControlSample> test;
};

/// Stratified, seeded partition. Per stratum, train then validation get
/// floor(fraction * size) rows; the rounding remainder goes to the last part
/// with a nonzero fraction. Rows within each part keep the shuffled order.
SplitResult split_dataset(const CaseControlSample& sample, const SplitSpec& spec);

}  // namespace ccwnet
