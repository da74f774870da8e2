#pragma once

#include <Eigen/Dense>

#include <array>
#include <string_view>
#include <vector>

namespace wlpanel {

enum class EstimatorKind
{
  pols,
  be,
  fe,
  re,
  wpols,
  wbe,
  wfe,
  wre
};

inline constexpr std::array<EstimatorKind, 8> kAllEstimators = {
  EstimatorKind::pols, EstimatorKind::wpols, EstimatorKind::be, EstimatorKind::wbe,
  EstimatorKind::fe,   EstimatorKind::wfe,   EstimatorKind::re, EstimatorKind::wre,
};

std::string_view to_string(EstimatorKind kind);
/// Throws ErrorCode::InvalidArgument for names outside {pols,wpols,be,wbe,fe,wfe,re,wre}.
EstimatorKind parse_estimator(std::string_view name);
bool is_weighted(EstimatorKind kind);
/// Classical counterpart of a weighted estimator (identity for classical ones).
EstimatorKind classical_of(EstimatorKind kind);

struct EstimatorFit
{
  EstimatorKind kind = EstimatorKind::pols;
  /// Intercept first when has_intercept, then the K slopes.
  Eigen::VectorXd beta;
  Eigen::VectorXd std_errors;
  /// Residuals of the transformed regression, one per transformed row.
  Eigen::VectorXd residuals;
  double sigma_hat = 0.0;
  Eigen::VectorXd weights;
  Eigen::Index n_obs_effective = 0;
  bool has_intercept = false;
  /// Panel row (or individual, for between fits) behind each residual.
  std::vector<Eigen::Index> row_index;

  Eigen::Index n_slopes() const { return beta.size() - (has_intercept ? 1 : 0); }
  Eigen::VectorXd slopes() const { return beta.tail(n_slopes()); }
  Eigen::VectorXd slope_std_errors() const { return std_errors.tail(n_slopes()); }
};

} // namespace wlpanel
