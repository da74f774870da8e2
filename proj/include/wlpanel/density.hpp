#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace wlpanel {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Normal density N(0, s^2) at x.
inline double normal_pdf(double x, double s)
{
  double const z = x / s;
  return kInvSqrt2Pi / s * std::exp(-0.5 * z * z);
}

inline double log_normal_pdf(double x, double s)
{
  double const z = x / s;
  return std::log(kInvSqrt2Pi / s) - 0.5 * z * z;
}

/// f*(r) = (1/n) sum_j k(r; r_j, h) with a normal kernel of standard deviation h.
template <typename Derived>
double kernel_density(Eigen::DenseBase<Derived> const& residuals, double r, double h)
{
  double sum = 0.0;
  for (Eigen::Index j = 0; j < residuals.size(); ++j)
    sum += normal_pdf(r - residuals.derived().coeff(j), h);
  return sum / static_cast<double>(residuals.size());
}

/// Normal model N(0, sigma^2) convolved with the kernel: N(0, sigma^2 + h^2) at r.
inline double smoothed_model_density(double r, double sigma, double h)
{
  return normal_pdf(r, std::hypot(sigma, h));
}

inline double log_smoothed_model_density(double r, double sigma, double h)
{
  return log_normal_pdf(r, std::hypot(sigma, h));
}

enum class DensityEvaluation
{
  exact,     ///< direct O(n^2) kernel sums
  binned,    ///< linear binning on a grid of spacing h/16, interpolated
  automatic, ///< exact for small samples, binned above kBinnedThreshold
};

inline constexpr Eigen::Index kBinnedThreshold = 64;

/// Kernel density of a residual sample, evaluable at arbitrary points.
class ResidualDensity
{
public:
  ResidualDensity(Eigen::Ref<Eigen::VectorXd const> residuals,
                  double h,
                  DensityEvaluation mode = DensityEvaluation::exact);

  double operator()(double x) const;
  double bandwidth() const { return h_; }
  bool binned() const { return !grid_.empty(); }

  /// log f*(x), computed by log-sum-exp in exact mode.
  double log_at(double x) const;

private:
  Eigen::VectorXd residuals_;
  double h_;
  double lo_ = 0.0;
  double step_ = 0.0;
  std::vector<double> grid_;
};

/// delta_i = f*(r_i) / m*(r_i) - 1. The ratio is taken in log space for
/// |r| > 8 (sigma + h); +inf marks a residual whose model density underflows.
Eigen::VectorXd pearson_residuals(Eigen::Ref<Eigen::VectorXd const> residuals,
                                  double sigma,
                                  double h,
                                  DensityEvaluation mode = DensityEvaluation::exact);

/// Squared-Hellinger disparity  int G(delta(x)) m*(x) dx  by composite Simpson on
/// [min r - 5(h + sigma), max r + 5(h + sigma)] with `intervals` panels.
double disparity(Eigen::Ref<Eigen::VectorXd const> residuals,
                 double sigma,
                 double h,
                 int intervals = 2048,
                 DensityEvaluation mode = DensityEvaluation::exact);

double disparity(ResidualDensity const& f_star,
                 double lo,
                 double hi,
                 double sigma,
                 int intervals = 2048);

} // namespace wlpanel
