#pragma once

#include "wlpanel/error.hpp"

#include <Eigen/Dense>

namespace wlpanel {

/// Relative singular-value threshold below which a design is treated as singular.
inline constexpr double kRankTolerance = 1e-10;

/// Column-pivoted QR of a (possibly row-weighted) design with an explicit
/// rank check on the singular values of its R factor.
class LeastSquares
{
public:
  /// Throws `singular` if sigma_min(x) < kRankTolerance * sigma_max(x).
  LeastSquares(Eigen::Ref<Eigen::MatrixXd const> x,
               ErrorCode singular = ErrorCode::RankDeficient);

  /// Row weights w >= 0; the factorization is of diag(sqrt(w)) x.
  LeastSquares(Eigen::Ref<Eigen::MatrixXd const> x,
               Eigen::Ref<Eigen::VectorXd const> w,
               ErrorCode singular = ErrorCode::RankDeficient);

  /// Minimizes sum_i w_i (y_i - x_i b)^2 for the weights given at construction.
  Eigen::VectorXd solve(Eigen::Ref<Eigen::VectorXd const> y) const;

  /// (X' W X)^{-1}, never formed by explicit inversion of X' W X.
  Eigen::MatrixXd cross_product_inverse() const;

  double condition_number() const { return condition_; }

private:
  void factorize(ErrorCode singular);

  Eigen::MatrixXd design_;
  Eigen::VectorXd sqrt_w_;
  bool weighted_ = false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  double condition_ = 1.0;
};

/// Prepends a constant column.
Eigen::MatrixXd with_intercept(Eigen::Ref<Eigen::MatrixXd const> x, double value = 1.0);

} // namespace wlpanel
