#include "wlpanel/ols.hpp"

#include "wlpanel/error.hpp"
#include "wlpanel/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace wlpanel {

namespace {

EstimatorFit ols_on(TransformedData const& data,
                    MatrixXd const& design,
                    bool has_intercept,
                    Index dof,
                    EstimatorKind kind)
{
  if (dof <= 0)
    fail(ErrorCode::RankDeficient, "no residual degrees of freedom");
  LeastSquares const ls(design);
  EstimatorFit fit;
  fit.kind = kind;
  fit.has_intercept = has_intercept;
  fit.beta = ls.solve(data.y_star);
  fit.residuals = data.y_star - design * fit.beta;
  fit.sigma_hat = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(dof));
  fit.std_errors = fit.sigma_hat * ls.cross_product_inverse().diagonal().array().sqrt();
  fit.weights = VectorXd::Ones(data.n_rows());
  fit.n_obs_effective = data.n_rows();
  fit.row_index = data.row_index;
  return fit;
}

} // namespace

Index residual_dof(EstimatorKind kind, PanelDataset const& p, Index n_coefficients)
{
  switch (classical_of(kind)) {
    case EstimatorKind::be: return p.n_individuals() - n_coefficients;
    case EstimatorKind::fe: return p.n_obs() - p.n_individuals() - n_coefficients;
    default: return p.n_obs() - n_coefficients;
  }
}

EstimatorFit fit_pooled_ols(PanelDataset const& p)
{
  auto const data = pooled_transform(p);
  MatrixXd const design = with_intercept(data.x_star);
  return ols_on(data, design, true, residual_dof(EstimatorKind::pols, p, design.cols()),
                EstimatorKind::pols);
}

EstimatorFit fit_between(PanelDataset const& p)
{
  if (p.n_individuals() <= p.n_regressors() + 1)
    fail(ErrorCode::TooFewIndividuals,
         "between regression needs N > K + 1 (N=" + std::to_string(p.n_individuals()) +
           ", K=" + std::to_string(p.n_regressors()) + ")");
  auto const data = between_transform(p);
  MatrixXd const design = with_intercept(data.x_star);
  return ols_on(data, design, true, residual_dof(EstimatorKind::be, p, design.cols()),
                EstimatorKind::be);
}

void require_within_variation(PanelDataset const& p, TransformedData const& within)
{
  for (Index k = 0; k < p.n_regressors(); ++k) {
    double const original = p.x().col(k).norm();
    double const demeaned = within.x_star.col(k).norm();
    if (original == 0.0 || demeaned <= kRankTolerance * original)
      fail(ErrorCode::NoWithinVariation,
           "regressor " + std::to_string(k + 1) + " is constant over time within every individual");
  }
}

EstimatorFit fit_fixed_effects(PanelDataset const& p)
{
  auto const data = within_transform(p);
  require_within_variation(p, data);
  return ols_on(data, data.x_star, false,
                residual_dof(EstimatorKind::fe, p, p.n_regressors()), EstimatorKind::fe);
}

VarianceComponents variance_components_from_mean_squares(double within_ms,
                                                         double between_ms,
                                                         Index n_periods,
                                                         double noise_floor)
{
  double const s_eps = within_ms > noise_floor ? within_ms : 0.0;
  double const s_alpha = between_ms > noise_floor
                           ? std::max(0.0, between_ms - s_eps / static_cast<double>(n_periods))
                           : 0.0;
  return VarianceComponents(s_eps, s_alpha, n_periods);
}

VarianceComponents estimate_variance_components(PanelDataset const& p)
{
  auto const fe = fit_fixed_effects(p);
  auto const be = fit_between(p);
  return variance_components_from_mean_squares(fe.sigma_hat * fe.sigma_hat,
                                               be.sigma_hat * be.sigma_hat, p.n_periods(),
                                               round_off_floor(p));
}

double round_off_floor(PanelDataset const& p)
{
  return 1e-24 * p.y().squaredNorm() / static_cast<double>(p.n_obs());
}

EstimatorFit fit_quasi_demeaned(PanelDataset const& p, double theta)
{
  auto const data = quasi_demean(p, theta);
  double const level = 1.0 - theta;
  bool const intercept = level > 1e-12;
  MatrixXd const design = intercept ? with_intercept(data.x_star, level) : data.x_star;
  return ols_on(data, design, intercept, residual_dof(EstimatorKind::re, p, design.cols()),
                EstimatorKind::re);
}

EstimatorFit fit_random_effects(PanelDataset const& p, VarianceComponents const& vc)
{
  return fit_quasi_demeaned(p, vc.theta());
}

EstimatorFit fit_random_effects(PanelDataset const& p)
{
  return fit_random_effects(p, estimate_variance_components(p));
}

} // namespace wlpanel
