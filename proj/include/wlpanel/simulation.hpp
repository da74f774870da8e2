#pragma once

#include "wlpanel/fit.hpp"
#include "wlpanel/panel.hpp"
#include "wlpanel/wle.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace wlpanel {

enum class Dgp
{
  fixed_effects,  ///< DGP-I: every regressor is shifted by the effect term
  random_effects, ///< DGP-II: regressors independent of the effect term
};

enum class ErrorLaw
{
  normal01,    ///< N(0, 1)
  student_t5,  ///< Student t with 5 degrees of freedom (unscaled)
  double_exp1, ///< Laplace with rate 1
};

enum class Scheme
{
  random_vertical,
  random_leverage,
  concentrated_vertical,
  concentrated_leverage,
};

/// How the effect term of y = x'b + a + e is drawn.
enum class EffectDraw
{
  per_cell,       ///< a fresh N(0,1) draw for every (i,t) cell
  per_individual, ///< one N(0,1) draw per individual, shared over time
};

std::string_view to_string(Dgp v);
std::string_view to_string(ErrorLaw v);
std::string_view to_string(Scheme v);
std::string_view to_string(EffectDraw v);
Dgp parse_dgp(std::string_view s);
ErrorLaw parse_error_law(std::string_view s);
Scheme parse_scheme(std::string_view s);
EffectDraw parse_effect_draw(std::string_view s);

struct Contamination
{
  Scheme scheme = Scheme::random_vertical;
  Index m = 0;
};

struct SimSpec
{
  Dgp dgp = Dgp::random_effects;
  Index n_individuals = 100;
  Index n_periods = 4;
  VectorXd beta_true = (VectorXd(2) << 2.4, -1.2).finished();
  ErrorLaw error_law = ErrorLaw::normal01;
  std::optional<Contamination> contamination;
  Index replications = 100;
  double gamma = 0.05;
  std::uint64_t seed = 1;
  EffectDraw effects = EffectDraw::per_cell;

  /// Throws InvalidArgument / InfeasibleContamination.
  void validate() const;
};

/// Engine for the (seed, replication, purpose) stream; independent of scheduling.
using Rng = std::mt19937_64;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication, std::uint64_t purpose);
Rng replication_stream(std::uint64_t seed, Index replication, std::uint64_t purpose);

inline constexpr std::uint64_t kStreamPanel = 1;
inline constexpr std::uint64_t kStreamContamination = 2;
inline constexpr std::uint64_t kStreamEstimator = 3;

PanelDataset generate_panel(SimSpec const& spec, Index replication);

struct ContaminatedPanel
{
  PanelDataset panel;
  /// One flag per panel row; true where the cell was altered.
  std::vector<bool> mask;
};

/// Random schemes alter m uniformly chosen cells; concentrated schemes alter
/// ceil(T/2) consecutive periods in each of m / ceil(T/2) distinct individuals.
/// Leverage schemes redraw the regressors, move y along `beta` to the new x
/// (keeping the cell's effect and error), then apply y <- -3y + N(20, 4).
ContaminatedPanel contaminate(PanelDataset const& p,
                              Scheme scheme,
                              Index m,
                              Eigen::Ref<VectorXd const> beta,
                              Rng& rng);

/// Fits for one replication, produced by fit_estimators.
struct ReplicationFit
{
  EstimatorKind kind = EstimatorKind::pols;
  std::optional<EstimatorFit> fit;
  bool fallback = false;
  /// Wall time spent on this estimator; wre excludes the wfe/wbe it reuses.
  double seconds = 0.0;
};

/// Fits every requested estimator on a panel; wre reuses the wfe/wbe fits.
/// Estimation errors leave `fit` empty instead of propagating.
std::vector<ReplicationFit> fit_estimators(PanelDataset const& p,
                                           std::span<EstimatorKind const> estimators,
                                           WleConfig const& cfg);

struct EstimatorSummary
{
  EstimatorKind kind = EstimatorKind::pols;
  /// (1/S) sum ||slopes - beta||^2 over replications with a fit.
  double mse = 0.0;
  /// Rejection rate of H0: b_k = 0 with two-sided normal quantiles at level gamma.
  VectorXd power;
  VectorXd mean_beta;
  /// Replications that fell back to the classical fit or failed outright.
  Index n_fallbacks = 0;
  Index n_failed = 0;
  Index n_used = 0;
  double runtime_seconds = 0.0;
};

struct SimResult
{
  SimSpec spec;
  std::vector<EstimatorSummary> estimators;
  double runtime_seconds = 0.0;

  EstimatorSummary const& at(EstimatorKind kind) const;
};

/// Runs spec.replications independent replications over `jobs` threads.
SimResult run_simulation(SimSpec const& spec,
                         std::span<EstimatorKind const> estimators,
                         WleConfig const& cfg = {},
                         int jobs = 1);

} // namespace wlpanel
