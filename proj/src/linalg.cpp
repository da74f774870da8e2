#include "wlpanel/linalg.hpp"

#include <cmath>
#include <limits>

namespace wlpanel {

LeastSquares::LeastSquares(Eigen::Ref<Eigen::MatrixXd const> x, ErrorCode singular)
  : design_(x)
{
  factorize(singular);
}

LeastSquares::LeastSquares(Eigen::Ref<Eigen::MatrixXd const> x,
                           Eigen::Ref<Eigen::VectorXd const> w,
                           ErrorCode singular)
  : sqrt_w_(w.array().max(0.0).sqrt())
  , weighted_(true)
{
  if (w.size() != x.rows())
    fail(ErrorCode::InvalidArgument, "weight vector length does not match design rows");
  design_ = sqrt_w_.asDiagonal() * x;
  factorize(singular);
}

void LeastSquares::factorize(ErrorCode singular)
{
  Eigen::Index const p = design_.cols();
  if (design_.rows() < p || p == 0)
    fail(singular, "design has fewer rows than columns");
  qr_.compute(design_);
  Eigen::MatrixXd r = qr_.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::VectorXd const sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  double const smax = sv.maxCoeff();
  double const smin = sv.minCoeff();
  if (!(smax > 0.0) || !(smin >= kRankTolerance * smax))
    fail(singular, "design is numerically singular (condition " +
                     std::to_string(smax > 0.0 ? smax / smin : INFINITY) + ")");
  condition_ = smax / smin;
}

Eigen::VectorXd LeastSquares::solve(Eigen::Ref<Eigen::VectorXd const> y) const
{
  if (weighted_)
    return qr_.solve((sqrt_w_.array() * y.array()).matrix());
  return qr_.solve(y);
}

Eigen::MatrixXd LeastSquares::cross_product_inverse() const
{
  Eigen::Index const p = design_.cols();
  Eigen::MatrixXd const r = qr_.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::MatrixXd const r_inv =
    r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd const inner = r_inv * r_inv.transpose();
  auto const& perm = qr_.colsPermutation();
  return perm * inner * perm.transpose();
}

Eigen::MatrixXd with_intercept(Eigen::Ref<Eigen::MatrixXd const> x, double value)
{
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setConstant(value);
  out.rightCols(x.cols()) = x;
  return out;
}

} // namespace wlpanel
