#include "wlpanel/robust.hpp"

#include "wlpanel/error.hpp"
#include "wlpanel/linalg.hpp"
#include "wlpanel/ols.hpp"

#include <cmath>

namespace wlpanel {

namespace {

std::vector<Index> row_groups(PanelDataset const& p, TransformedData const& data)
{
  std::vector<Index> groups(data.row_index.size());
  for (std::size_t i = 0; i < groups.size(); ++i)
    groups[i] = data.kind == TransformKind::between ? data.row_index[i]
                                                    : p.individual_of(data.row_index[i]);
  return groups;
}

/// Runs the root search on a transformed design and packages the selected root;
/// falls back to `classical` when no start converges.
template <typename ClassicalFit>
RobustFit robust_on(PanelDataset const& p,
                    TransformedData const& data,
                    MatrixXd const& design,
                    bool has_intercept,
                    EstimatorKind kind,
                    WleConfig const& cfg,
                    ClassicalFit&& classical)
{
  RobustFit out;
  std::vector<Index> groups;
  if (cfg.granularity == WeightGranularity::per_group)
    groups = row_groups(p, data);
  try {
    out.wle = solve_wle(data.y_star, design, cfg, groups);
  } catch (Error const& e) {
    if (e.code() != ErrorCode::NoConvergedRoot)
      throw;
    out.fit = classical();
    out.fit.kind = kind;
    out.fallback = true;
    return out;
  }

  Index const dof = residual_dof(kind, p, design.cols());
  if (dof <= 0)
    fail(ErrorCode::RankDeficient, "no residual degrees of freedom");
  auto& fit = out.fit;
  fit.kind = kind;
  fit.has_intercept = has_intercept;
  fit.beta = out.wle.beta;
  fit.residuals = data.y_star - design * fit.beta;
  fit.weights = out.wle.weights;
  fit.row_index = data.row_index;
  fit.n_obs_effective = data.n_rows();

  double const wsum = fit.weights.sum();
  double const scale2 = (fit.weights.array() * fit.residuals.array().square()).sum() / wsum;
  fit.sigma_hat =
    std::sqrt(scale2 * static_cast<double>(data.n_rows()) / static_cast<double>(dof));
  LeastSquares const ls(design, fit.weights, ErrorCode::RankDeficientUnderWeights);
  fit.std_errors = fit.sigma_hat * ls.cross_product_inverse().diagonal().array().sqrt();
  return out;
}

} // namespace

RobustFit fit_wpols(PanelDataset const& p, WleConfig const& cfg)
{
  auto const data = pooled_transform(p);
  MatrixXd const design = with_intercept(data.x_star);
  return robust_on(p, data, design, true, EstimatorKind::wpols, cfg,
                   [&] { return fit_pooled_ols(p); });
}

RobustFit fit_wbe(PanelDataset const& p, WleConfig const& cfg)
{
  if (p.n_individuals() <= p.n_regressors() + 1)
    fail(ErrorCode::TooFewIndividuals, "between regression needs N > K + 1");
  auto const data = between_transform(p);
  MatrixXd const design = with_intercept(data.x_star);
  return robust_on(p, data, design, true, EstimatorKind::wbe, cfg,
                   [&] { return fit_between(p); });
}

RobustFit fit_wfe(PanelDataset const& p, WleConfig const& cfg)
{
  auto const data = within_transform(p);
  require_within_variation(p, data);
  return robust_on(p, data, data.x_star, false, EstimatorKind::wfe, cfg,
                   [&] { return fit_fixed_effects(p); });
}

VarianceComponents weighted_variance_components(PanelDataset const& p,
                                                RobustFit const& wfe,
                                                RobustFit const& wbe)
{
  // sigma_hat already carries the n / dof correction, so at unit weights these
  // are the classical within and between mean squares.
  return variance_components_from_mean_squares(wfe.fit.sigma_hat * wfe.fit.sigma_hat,
                                               wbe.fit.sigma_hat * wbe.fit.sigma_hat,
                                               p.n_periods(), round_off_floor(p));
}

RobustFit fit_wre(PanelDataset const& p, WleConfig const& cfg, VarianceComponents const& vc)
{
  double const theta = vc.theta();
  auto const data = quasi_demean(p, theta);
  double const level = 1.0 - theta;
  bool const intercept = level > 1e-12;
  MatrixXd const design = intercept ? with_intercept(data.x_star, level) : data.x_star;
  auto out = robust_on(p, data, design, intercept, EstimatorKind::wre, cfg,
                       [&] { return fit_random_effects(p, vc); });
  out.theta_used = theta;
  return out;
}

RobustFit fit_wre(PanelDataset const& p,
                  WleConfig const& cfg,
                  RobustFit const& wfe,
                  RobustFit const& wbe)
{
  return fit_wre(p, cfg, weighted_variance_components(p, wfe, wbe));
}

RobustFit fit_wre(PanelDataset const& p, WleConfig const& cfg, ComponentSource source)
{
  if (source == ComponentSource::classical)
    return fit_wre(p, cfg, estimate_variance_components(p));
  return fit_wre(p, cfg, fit_wfe(p, cfg), fit_wbe(p, cfg));
}

} // namespace wlpanel
