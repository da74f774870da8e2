#pragma once

#include "wlpanel/fit.hpp"
#include "wlpanel/panel.hpp"
#include "wlpanel/wle.hpp"

namespace wlpanel {

/// Weighted-likelihood counterpart of a classical panel estimator.
struct RobustFit
{
  /// Coefficients, weighted-regression standard errors, residuals and weights.
  EstimatorFit fit;
  WleSolution wle;
  /// Quasi-demeaning parameter used by wre (0 for the other estimators).
  double theta_used = 0.0;
  /// Set when no bootstrap start converged and the classical fit was returned.
  bool fallback = false;
};

/// Where wre takes its variance components from.
enum class ComponentSource
{
  weighted,  ///< weighted residual scales of wfe and wbe
  classical, ///< estimate_variance_components
};

RobustFit fit_wpols(PanelDataset const& p, WleConfig const& cfg);
RobustFit fit_wbe(PanelDataset const& p, WleConfig const& cfg);
RobustFit fit_wfe(PanelDataset const& p, WleConfig const& cfg);
RobustFit fit_wre(PanelDataset const& p,
                  WleConfig const& cfg,
                  ComponentSource source = ComponentSource::weighted);

/// wre from already computed wfe and wbe fits of the same panel.
RobustFit fit_wre(PanelDataset const& p,
                  WleConfig const& cfg,
                  RobustFit const& wfe,
                  RobustFit const& wbe);

/// wre with fixed variance components.
RobustFit fit_wre(PanelDataset const& p, WleConfig const& cfg, VarianceComponents const& vc);

/// Moment formulas of estimate_variance_components with weighted mean squares.
VarianceComponents weighted_variance_components(PanelDataset const& p,
                                                RobustFit const& wfe,
                                                RobustFit const& wbe);

} // namespace wlpanel
