#pragma once

#include "wlpanel/density.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace wlpanel {

/// Residual adjustment function.
enum class Raf
{
  hellinger, ///< A(d) = 2 (sqrt(d + 1) - 1)
  identity,  ///< A(d) = d, which gives unit weights (maximum likelihood)
};

std::string_view to_string(Raf raf);
Raf parse_raf(std::string_view name);

/// Throws DomainError for delta < -1.
double raf(double delta, Raf kind);

/// min{1, [A(delta) + 1]^+ / (delta + 1)}; 0 at delta = -1 and at delta = +inf.
double weight(double delta, Raf kind);

/// How row weights are shared: per transformed row, or the minimum over a group
/// of rows (e.g. all periods of one individual).
enum class WeightGranularity
{
  per_row,
  per_group,
};

/// Scale used for the first reweighting of each bootstrap start.
enum class StartScale
{
  subsample, ///< sqrt(RSS / m) of the subsample fit that produced the start
  full_data, ///< unit-weight scale of the start's residuals on all rows
};

struct WleConfig
{
  Raf raf = Raf::hellinger;
  /// h = c * sigma. Derived from (target_outlier_weight, reference_distance,
  /// reference_level) when unset; the defaults give c ~= 0.179, h^2 ~= 0.032 sigma^2.
  std::optional<double> bandwidth_constant;
  double target_outlier_weight = 0.2;
  double reference_distance = 3.0;
  /// Mass of the outlying point; 1 treats it as a lone residual.
  double reference_level = 0.2;
  int n_bootstrap = 30;
  /// Rows per bootstrap subsample; defaults to columns + 2.
  std::optional<Eigen::Index> subsample_size;
  int max_iterations = 500;
  double beta_tolerance = 1e-8;
  double root_dedup_tolerance = 1e-6;
  std::uint64_t seed = 20240101;
  DensityEvaluation density = DensityEvaluation::automatic;
  WeightGranularity granularity = WeightGranularity::per_row;
  StartScale start_scale = StartScale::subsample;

  /// Throws InvalidArgument when a field is out of range for a design with `columns`.
  void validate(Eigen::Index columns) const;
  double resolved_bandwidth_constant() const;
  Eigen::Index resolved_subsample_size(Eigen::Index columns) const;
};

/// Weight of a point at `distance` model standard deviations carrying mass `level`
/// on top of a (1 - level) N(0, 1) model, with bandwidth c. level = 1 is a lone
/// residual: delta = phi_c(0) / m*(distance) - 1; in general delta scales by level.
double single_outlier_weight(double c, double distance, double level, Raf kind = Raf::hellinger);

/// Solves single_outlier_weight(c, distance, level) == target for c by bisection in
/// log c over [1e-4, 1e4]. Throws DomainError when an argument is out of range or
/// the target is not attainable inside the bracket.
double derive_bandwidth_constant(double target_weight,
                                 double distance,
                                 double level,
                                 Raf kind = Raf::hellinger);

struct IrlsResult
{
  Eigen::VectorXd beta;
  double sigma = 0.0;
  Eigen::VectorXd weights;
  int iterations = 0;
  bool converged = false;
};

/// Iteratively reweighted solve of the weighted score equations from init_beta.
/// `groups` (one label per row, or empty) is used with per_group granularity.
/// `init_sigma` replaces the unit-weight scale in the first reweighting.
/// Throws RankDeficientUnderWeights when the weighted design turns singular.
IrlsResult irls_solve(Eigen::Ref<Eigen::VectorXd const> y,
                      Eigen::Ref<Eigen::MatrixXd const> x,
                      Eigen::Ref<Eigen::VectorXd const> init_beta,
                      WleConfig const& cfg,
                      std::span<Eigen::Index const> groups = {},
                      std::optional<double> init_sigma = std::nullopt);

struct CandidateRoot
{
  Eigen::VectorXd beta;
  double sigma = 0.0;
  double disparity = 0.0;
  int iterations = 0;
  Eigen::VectorXd weights;
};

struct WleSolution
{
  Eigen::VectorXd beta;
  double sigma_nu = 0.0;
  Eigen::VectorXd weights;
  double disparity = 0.0;
  int iterations = 0;
  bool converged = false;
  double bandwidth_constant = 0.0;
  /// Distinct converged roots in discovery order; `selected` indexes the returned one.
  std::vector<CandidateRoot> candidate_roots;
  std::size_t selected = 0;
  int failed_starts = 0;
};

/// Bootstrap root search: B subsample OLS fits seed irls_solve, converged roots are
/// de-duplicated, and the root of minimum disparity is returned.
/// Throws NoConvergedRoot when every start fails.
WleSolution solve_wle(Eigen::Ref<Eigen::VectorXd const> y,
                      Eigen::Ref<Eigen::MatrixXd const> x,
                      WleConfig const& cfg,
                      std::span<Eigen::Index const> groups = {});

} // namespace wlpanel
