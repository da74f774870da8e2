#include "wlpanel/wle.hpp"

#include "wlpanel/error.hpp"
#include "wlpanel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace wlpanel {

std::string_view to_string(Raf raf)
{
  return raf == Raf::hellinger ? "hellinger" : "identity";
}

Raf parse_raf(std::string_view name)
{
  if (name == "hellinger")
    return Raf::hellinger;
  if (name == "identity")
    return Raf::identity;
  fail(ErrorCode::InvalidArgument,
       "unknown RAF '" + std::string(name) + "' (expected hellinger|identity)");
}

double raf(double delta, Raf kind)
{
  if (!(delta >= -1.0))
    fail(ErrorCode::DomainError, "Pearson residual below -1: " + std::to_string(delta));
  if (kind == Raf::identity)
    return delta;
  return 2.0 * (std::sqrt(delta + 1.0) - 1.0);
}

double weight(double delta, Raf kind)
{
  if (!(delta >= -1.0))
    fail(ErrorCode::DomainError, "Pearson residual below -1: " + std::to_string(delta));
  if (kind == Raf::identity)
    return 1.0;
  if (std::isinf(delta))
    return 0.0;
  double const shifted = raf(delta, kind) + 1.0;
  if (shifted <= 0.0)
    return 0.0;
  return std::min(1.0, shifted / (delta + 1.0));
}

void WleConfig::validate(Eigen::Index columns) const
{
  if (n_bootstrap < 1)
    fail(ErrorCode::InvalidArgument, "n_bootstrap must be at least 1");
  if (max_iterations < 1)
    fail(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
  if (!(beta_tolerance > 0.0) || !(root_dedup_tolerance > 0.0))
    fail(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (bandwidth_constant && !(*bandwidth_constant > 0.0 && std::isfinite(*bandwidth_constant)))
    fail(ErrorCode::InvalidArgument, "bandwidth constant must be positive");
  if (!bandwidth_constant &&
      (!(target_outlier_weight > 0.0 && target_outlier_weight < 1.0) ||
       !(reference_distance > 0.0) || !(reference_level > 0.0 && reference_level <= 1.0)))
    fail(ErrorCode::InvalidArgument,
         "target_outlier_weight must lie in (0,1), reference_distance be positive and "
         "reference_level lie in (0,1]");
  if (subsample_size && *subsample_size < columns + 1)
    fail(ErrorCode::InvalidArgument, "subsample_size must exceed the number of columns");
}

double WleConfig::resolved_bandwidth_constant() const
{
  if (bandwidth_constant)
    return *bandwidth_constant;
  return derive_bandwidth_constant(target_outlier_weight, reference_distance, reference_level,
                                   Raf::hellinger);
}

Eigen::Index WleConfig::resolved_subsample_size(Eigen::Index columns) const
{
  return subsample_size.value_or(columns + 2);
}

double single_outlier_weight(double c, double distance, double level, Raf kind)
{
  if (!(level > 0.0 && level <= 1.0))
    fail(ErrorCode::DomainError, "outlier mass must lie in (0, 1]");
  // the model part of f* cancels against m*, leaving level times the lone-point delta
  Eigen::VectorXd const lone = Eigen::VectorXd::Constant(1, distance);
  double const delta = pearson_residuals(lone, 1.0, c, DensityEvaluation::exact)[0];
  return weight(level * delta, kind);
}

double derive_bandwidth_constant(double target_weight, double distance, double level, Raf kind)
{
  if (!(target_weight > 0.0 && target_weight < 1.0))
    fail(ErrorCode::DomainError, "target weight must lie in (0, 1)");
  if (!(distance > 0.0) || !std::isfinite(distance))
    fail(ErrorCode::DomainError, "reference distance must be positive");
  if (!(level > 0.0 && level <= 1.0))
    fail(ErrorCode::DomainError, "outlier mass must lie in (0, 1]");
  if (kind == Raf::identity)
    fail(ErrorCode::DomainError, "identity RAF assigns unit weights; no bandwidth reaches the target");

  double lo = std::log(1e-4);
  double hi = std::log(1e4);
  auto excess = [&](double log_c) {
    return single_outlier_weight(std::exp(log_c), distance, level, kind) - target_weight;
  };
  if (excess(lo) > 0.0 || excess(hi) < 0.0)
    fail(ErrorCode::DomainError, "target weight " + std::to_string(target_weight) +
                                   " is unreachable for c in [1e-4, 1e4]");
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    double const mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

namespace {

void share_group_minimum(Eigen::VectorXd& w, std::span<Eigen::Index const> groups)
{
  if (groups.empty())
    return;
  Eigen::Index const n_groups = *std::max_element(groups.begin(), groups.end()) + 1;
  Eigen::VectorXd lowest = Eigen::VectorXd::Ones(n_groups);
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    auto const g = groups[static_cast<std::size_t>(i)];
    lowest[g] = std::min(lowest[g], w[i]);
  }
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w[i] = lowest[groups[static_cast<std::size_t>(i)]];
}

double weighted_scale(Eigen::VectorXd const& w, Eigen::VectorXd const& r)
{
  double const wsum = w.sum();
  if (!(wsum > 0.0))
    fail(ErrorCode::RankDeficientUnderWeights, "every observation received zero weight");
  return std::sqrt((w.array() * r.array().square()).sum() / wsum);
}

} // namespace

IrlsResult irls_solve(Eigen::Ref<Eigen::VectorXd const> y,
                      Eigen::Ref<Eigen::MatrixXd const> x,
                      Eigen::Ref<Eigen::VectorXd const> init_beta,
                      WleConfig const& cfg,
                      std::span<Eigen::Index const> groups,
                      std::optional<double> init_sigma)
{
  cfg.validate(x.cols());
  Eigen::Index const n = y.size();
  if (init_sigma && !(*init_sigma > 0.0 && std::isfinite(*init_sigma)))
    fail(ErrorCode::DomainError, "initial scale must be positive and finite");
  if (x.rows() != n || init_beta.size() != x.cols())
    fail(ErrorCode::InvalidArgument, "irls_solve: dimension mismatch");
  bool const grouped = cfg.granularity == WeightGranularity::per_group;
  if (grouped && static_cast<Eigen::Index>(groups.size()) != n)
    fail(ErrorCode::InvalidArgument, "per_group weights need one group label per row");

  double const c = cfg.resolved_bandwidth_constant();
  double const noiseless = 1e-13 * std::sqrt(y.squaredNorm() / static_cast<double>(n));

  IrlsResult out;
  out.beta = init_beta;
  out.weights = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd r(n);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    r.noalias() = y - x * out.beta;
    double const sigma =
      it == 1 && init_sigma ? *init_sigma : weighted_scale(out.weights, r);
    if (cfg.raf == Raf::identity || sigma <= noiseless) {
      out.weights.setOnes();
    } else {
      Eigen::VectorXd const delta = pearson_residuals(r, sigma, c * sigma, cfg.density);
      for (Eigen::Index i = 0; i < n; ++i)
        out.weights[i] = weight(delta[i], cfg.raf);
      if (grouped)
        share_group_minimum(out.weights, groups);
    }
    LeastSquares const ls(x, out.weights, ErrorCode::RankDeficientUnderWeights);
    Eigen::VectorXd next = ls.solve(y);
    double const step = (next - out.beta).cwiseAbs().maxCoeff();
    out.beta = std::move(next);
    out.iterations = it;
    if (step <= cfg.beta_tolerance * (1.0 + out.beta.cwiseAbs().maxCoeff())) {
      out.converged = true;
      break;
    }
  }
  r.noalias() = y - x * out.beta;
  out.sigma = weighted_scale(out.weights, r);
  return out;
}

WleSolution solve_wle(Eigen::Ref<Eigen::VectorXd const> y,
                      Eigen::Ref<Eigen::MatrixXd const> x,
                      WleConfig const& cfg,
                      std::span<Eigen::Index const> groups)
{
  cfg.validate(x.cols());
  Eigen::Index const n = y.size();
  Eigen::Index const m = cfg.resolved_subsample_size(x.cols());
  if (n < m)
    fail(ErrorCode::InvalidArgument, "fewer rows (" + std::to_string(n) +
                                       ") than the bootstrap subsample size (" +
                                       std::to_string(m) + ")");

  WleSolution sol;
  sol.bandwidth_constant = cfg.resolved_bandwidth_constant();
  WleConfig run_cfg = cfg;
  run_cfg.bandwidth_constant = sol.bandwidth_constant;
  double const noiseless = 1e-13 * std::sqrt(y.squaredNorm() / static_cast<double>(n));

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                    static_cast<std::uint32_t>(cfg.seed >> 32), 0x574c45u};
  std::mt19937_64 rng(seq);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Eigen::MatrixXd xs(m, x.cols());
  Eigen::VectorXd ys(m);

  for (int b = 0; b < cfg.n_bootstrap; ++b) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (Eigen::Index k = 0; k < m; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
      std::swap(order[static_cast<std::size_t>(k)],
                order[static_cast<std::size_t>(pick(rng))]);
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      auto const row = order[static_cast<std::size_t>(k)];
      xs.row(k) = x.row(row);
      ys[k] = y[row];
    }

    IrlsResult root;
    try {
      Eigen::VectorXd const start = LeastSquares(xs).solve(ys);
      std::optional<double> start_sigma;
      if (cfg.start_scale == StartScale::subsample) {
        double const s = (ys - xs * start).norm() / std::sqrt(static_cast<double>(m));
        if (s > noiseless)
          start_sigma = s;
      }
      root = irls_solve(y, x, start, run_cfg, groups, start_sigma);
    } catch (Error const& e) {
      if (e.code() != ErrorCode::RankDeficient &&
          e.code() != ErrorCode::RankDeficientUnderWeights)
        throw;
      ++sol.failed_starts;
      continue;
    }
    if (!root.converged) {
      ++sol.failed_starts;
      continue;
    }

    double const scale = 1.0 + root.beta.cwiseAbs().maxCoeff();
    bool const duplicate =
      std::any_of(sol.candidate_roots.begin(), sol.candidate_roots.end(), [&](auto const& c) {
        return (c.beta - root.beta).cwiseAbs().maxCoeff() <= cfg.root_dedup_tolerance * scale;
      });
    if (duplicate)
      continue;

    CandidateRoot cand;
    cand.beta = root.beta;
    cand.sigma = root.sigma;
    cand.iterations = root.iterations;
    cand.weights = root.weights;
    if (root.sigma > noiseless) {
      Eigen::VectorXd const r = y - x * root.beta;
      cand.disparity =
        disparity(r, root.sigma, sol.bandwidth_constant * root.sigma, 2048, cfg.density);
    }
    sol.candidate_roots.push_back(std::move(cand));
  }

  if (sol.candidate_roots.empty())
    fail(ErrorCode::NoConvergedRoot,
         "none of the " + std::to_string(cfg.n_bootstrap) + " bootstrap starts converged");

  std::size_t best = 0;
  for (std::size_t i = 1; i < sol.candidate_roots.size(); ++i)
    if (sol.candidate_roots[i].disparity < sol.candidate_roots[best].disparity - 1e-12)
      best = i;

  auto const& chosen = sol.candidate_roots[best];
  sol.selected = best;
  sol.beta = chosen.beta;
  sol.sigma_nu = chosen.sigma;
  sol.weights = chosen.weights;
  sol.disparity = chosen.disparity;
  sol.iterations = chosen.iterations;
  sol.converged = true;
  return sol;
}

} // namespace wlpanel
