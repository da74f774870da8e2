#pragma once

#include "wlpanel/fit.hpp"
#include "wlpanel/panel.hpp"

namespace wlpanel {

/// OLS with intercept on the stacked N*T rows.
EstimatorFit fit_pooled_ols(PanelDataset const& p);

/// OLS with intercept on the N individual means. Requires N > K + 1.
EstimatorFit fit_between(PanelDataset const& p);

/// OLS without intercept on within-demeaned data; residual degrees of freedom
/// N*T - N - K account for the absorbed individual means.
EstimatorFit fit_fixed_effects(PanelDataset const& p);

/// Within/between moment estimator:
///   s_eps   = RSS_within / (NT - N - K)
///   s_alpha = max(0, RSS_between / (N - K - 1) - s_eps / T)
VarianceComponents estimate_variance_components(PanelDataset const& p);

/// Same clamp rule applied to already computed mean squares; mean squares at or
/// below `noise_floor` count as exactly zero.
VarianceComponents variance_components_from_mean_squares(double within_ms,
                                                         double between_ms,
                                                         Index n_periods,
                                                         double noise_floor = 0.0);

/// Mean square attributable to rounding alone: 1e-24 * mean(y^2).
double round_off_floor(PanelDataset const& p);

/// GLS through quasi-demeaning with estimated components.
EstimatorFit fit_random_effects(PanelDataset const& p);
EstimatorFit fit_random_effects(PanelDataset const& p, VarianceComponents const& vc);

/// OLS on quasi-demeaned data for a given theta; the intercept column is 1 - theta
/// and is dropped once it vanishes (theta == 1 reduces to the within regression).
EstimatorFit fit_quasi_demeaned(PanelDataset const& p, double theta);

/// Throws NoWithinVariation when some regressor is constant over time for every
/// individual.
void require_within_variation(PanelDataset const& p, TransformedData const& within);

/// Residual degrees of freedom used by each classical estimator.
Index residual_dof(EstimatorKind kind, PanelDataset const& p, Index n_coefficients);

} // namespace wlpanel
