#include "wlpanel/density.hpp"

#include "wlpanel/error.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace wlpanel {

namespace {

constexpr int kBinsPerBandwidth = 16;
constexpr int kTapRadius = 9 * kBinsPerBandwidth;
constexpr std::size_t kMaxGrid = std::size_t{1} << 22;

std::array<double, kTapRadius + 1> const& kernel_taps()
{
  static auto const taps = [] {
    std::array<double, kTapRadius + 1> t{};
    for (int k = 0; k <= kTapRadius; ++k) {
      double const z = static_cast<double>(k) / kBinsPerBandwidth;
      t[static_cast<std::size_t>(k)] = std::exp(-0.5 * z * z);
    }
    return t;
  }();
  return taps;
}

bool use_binned(DensityEvaluation mode, Eigen::Index n)
{
  switch (mode) {
    case DensityEvaluation::exact: return false;
    case DensityEvaluation::binned: return true;
    case DensityEvaluation::automatic: return n > kBinnedThreshold;
  }
  return false;
}

} // namespace

ResidualDensity::ResidualDensity(Eigen::Ref<Eigen::VectorXd const> residuals,
                                 double h,
                                 DensityEvaluation mode)
  : residuals_(residuals)
  , h_(h)
{
  if (residuals_.size() == 0)
    fail(ErrorCode::InvalidArgument, "kernel density needs at least one residual");
  if (!(h > 0.0) || !std::isfinite(h))
    fail(ErrorCode::DomainError, "bandwidth must be positive and finite");
  if (!use_binned(mode, residuals_.size()))
    return;

  step_ = h_ / kBinsPerBandwidth;
  double const rmin = residuals_.minCoeff();
  double const rmax = residuals_.maxCoeff();
  lo_ = rmin - (kTapRadius + 2) * step_;
  double const span = (rmax - lo_) / step_;
  if (!(span < static_cast<double>(kMaxGrid)))
    return; // range too wide for a grid; stay exact
  auto const m = static_cast<std::size_t>(span) + kTapRadius + 4;

  std::vector<double> counts(m, 0.0);
  for (Eigen::Index i = 0; i < residuals_.size(); ++i) {
    double const pos = (residuals_[i] - lo_) / step_;
    auto const j = static_cast<std::size_t>(pos);
    double const frac = pos - static_cast<double>(j);
    counts[j] += 1.0 - frac;
    counts[j + 1] += frac;
  }

  auto const& taps = kernel_taps();
  grid_.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double const c = counts[j];
    if (c == 0.0)
      continue;
    std::size_t const first = j >= kTapRadius ? j - kTapRadius : 0;
    std::size_t const last = std::min(m - 1, j + kTapRadius);
    for (std::size_t g = first; g <= last; ++g) {
      auto const d = g > j ? g - j : j - g;
      grid_[g] += c * taps[d];
    }
  }
  double const scale = kInvSqrt2Pi / (h_ * static_cast<double>(residuals_.size()));
  for (auto& v : grid_)
    v *= scale;
}

double ResidualDensity::operator()(double x) const
{
  if (grid_.empty())
    return kernel_density(residuals_, x, h_);
  double const pos = (x - lo_) / step_;
  if (!(pos >= 0.0) || pos >= static_cast<double>(grid_.size() - 1))
    return 0.0;
  auto const j = static_cast<std::size_t>(pos);
  double const frac = pos - static_cast<double>(j);
  return (1.0 - frac) * grid_[j] + frac * grid_[j + 1];
}

double ResidualDensity::log_at(double x) const
{
  if (!grid_.empty())
    return std::log((*this)(x));
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < residuals_.size(); ++j)
    peak = std::max(peak, log_normal_pdf(x - residuals_[j], h_));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < residuals_.size(); ++j)
    sum += std::exp(log_normal_pdf(x - residuals_[j], h_) - peak);
  return peak + std::log(sum / static_cast<double>(residuals_.size()));
}

Eigen::VectorXd pearson_residuals(Eigen::Ref<Eigen::VectorXd const> residuals,
                                  double sigma,
                                  double h,
                                  DensityEvaluation mode)
{
  if (!(sigma > 0.0))
    fail(ErrorCode::DomainError, "model scale must be positive");
  ResidualDensity const f_star(residuals, h, mode);
  double const far = 8.0 * (sigma + h);
  Eigen::VectorXd delta(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    double const r = residuals[i];
    if (std::abs(r) > far) {
      double const log_ratio = f_star.log_at(r) - log_smoothed_model_density(r, sigma, h);
      delta[i] = std::expm1(log_ratio);
    } else {
      delta[i] = f_star(r) / smoothed_model_density(r, sigma, h) - 1.0;
    }
  }
  return delta;
}

double disparity(ResidualDensity const& f_star, double lo, double hi, double sigma, int intervals)
{
  if (intervals < 2 || intervals % 2 != 0)
    fail(ErrorCode::InvalidArgument, "Simpson rule needs an even number of intervals");
  double const h = f_star.bandwidth();
  double const dx = (hi - lo) / intervals;
  auto integrand = [&](double x) {
    // G(delta) m* = 2 (sqrt(f*) - sqrt(m*))^2, free of the f*/m* ratio
    double const d = std::sqrt(f_star(x)) - std::sqrt(smoothed_model_density(x, sigma, h));
    return 2.0 * d * d;
  };
  double sum = integrand(lo) + integrand(hi);
  for (int k = 1; k < intervals; ++k)
    sum += (k % 2 == 1 ? 4.0 : 2.0) * integrand(lo + k * dx);
  return sum * dx / 3.0;
}

double disparity(Eigen::Ref<Eigen::VectorXd const> residuals,
                 double sigma,
                 double h,
                 int intervals,
                 DensityEvaluation mode)
{
  if (!(sigma > 0.0))
    fail(ErrorCode::DomainError, "model scale must be positive");
  ResidualDensity const f_star(residuals, h, mode);
  double const pad = 5.0 * (h + sigma);
  return disparity(f_star, residuals.minCoeff() - pad, residuals.maxCoeff() + pad, sigma,
                   intervals);
}

} // namespace wlpanel
