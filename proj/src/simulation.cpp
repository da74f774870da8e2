#include "wlpanel/simulation.hpp"

#include "wlpanel/error.hpp"
#include "wlpanel/ols.hpp"
#include "wlpanel/robust.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

namespace wlpanel {

std::string_view to_string(Dgp v)
{
  return v == Dgp::fixed_effects ? "I" : "II";
}

std::string_view to_string(ErrorLaw v)
{
  switch (v) {
    case ErrorLaw::normal01: return "normal";
    case ErrorLaw::student_t5: return "t5";
    case ErrorLaw::double_exp1: return "dexp";
  }
  return "?";
}

std::string_view to_string(Scheme v)
{
  switch (v) {
    case Scheme::random_vertical: return "random_vertical";
    case Scheme::random_leverage: return "random_leverage";
    case Scheme::concentrated_vertical: return "concentrated_vertical";
    case Scheme::concentrated_leverage: return "concentrated_leverage";
  }
  return "?";
}

std::string_view to_string(EffectDraw v)
{
  return v == EffectDraw::per_cell ? "cell" : "individual";
}

Dgp parse_dgp(std::string_view s)
{
  if (s == "I" || s == "1" || s == "fixed_effects")
    return Dgp::fixed_effects;
  if (s == "II" || s == "2" || s == "random_effects")
    return Dgp::random_effects;
  fail(ErrorCode::InvalidArgument, "unknown DGP '" + std::string(s) + "' (expected I|II)");
}

ErrorLaw parse_error_law(std::string_view s)
{
  for (auto v : {ErrorLaw::normal01, ErrorLaw::student_t5, ErrorLaw::double_exp1})
    if (to_string(v) == s)
      return v;
  fail(ErrorCode::InvalidArgument,
       "unknown error law '" + std::string(s) + "' (expected normal|t5|dexp)");
}

Scheme parse_scheme(std::string_view s)
{
  for (auto v : {Scheme::random_vertical, Scheme::random_leverage,
                 Scheme::concentrated_vertical, Scheme::concentrated_leverage})
    if (to_string(v) == s)
      return v;
  fail(ErrorCode::InvalidArgument, "unknown contamination scheme '" + std::string(s) + "'");
}

EffectDraw parse_effect_draw(std::string_view s)
{
  if (s == "cell")
    return EffectDraw::per_cell;
  if (s == "individual")
    return EffectDraw::per_individual;
  fail(ErrorCode::InvalidArgument,
       "unknown effect draw '" + std::string(s) + "' (expected cell|individual)");
}

namespace {

Index block_length(Index n_periods)
{
  return (n_periods + 1) / 2;
}

bool is_concentrated(Scheme s)
{
  return s == Scheme::concentrated_vertical || s == Scheme::concentrated_leverage;
}

void check_contamination(Index n, Index t, Scheme scheme, Index m)
{
  if (m < 0 || m > n * t)
    fail(ErrorCode::InfeasibleContamination,
         "m=" + std::to_string(m) + " outside [0, N*T=" + std::to_string(n * t) + "]");
  if (!is_concentrated(scheme))
    return;
  Index const block = block_length(t);
  if (m % block != 0 || m / block > n)
    fail(ErrorCode::InfeasibleContamination,
         "m=" + std::to_string(m) + " is not a whole number of blocks of " +
           std::to_string(block) + " cells over at most N individuals");
}

/// First k entries of a uniformly random permutation of 0..n-1.
std::vector<Index> draw_without_replacement(Index n, Index k, Rng& rng)
{
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index j = 0; j < k; ++j) {
    std::uniform_int_distribution<Index> pick(j, n - 1);
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

void SimSpec::validate() const
{
  if (n_individuals < 2 || n_periods < 2)
    fail(ErrorCode::InvalidArgument, "simulation needs N >= 2 and T >= 2");
  if (beta_true.size() < 1)
    fail(ErrorCode::InvalidArgument, "beta_true must not be empty");
  if (replications < 1)
    fail(ErrorCode::InvalidArgument, "replications must be at least 1");
  if (!(gamma > 0.0 && gamma < 1.0))
    fail(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
  if (contamination)
    check_contamination(n_individuals, n_periods, contamination->scheme, contamination->m);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication, std::uint64_t purpose)
{
  return splitmix64(splitmix64(splitmix64(seed) ^ replication) ^ purpose);
}

Rng replication_stream(std::uint64_t seed, Index replication, std::uint64_t purpose)
{
  return Rng(derive_seed(seed, static_cast<std::uint64_t>(replication), purpose));
}

PanelDataset generate_panel(SimSpec const& spec, Index replication)
{
  spec.validate();
  Index const n = spec.n_individuals;
  Index const t = spec.n_periods;
  Index const k = spec.beta_true.size();
  Index const nt = n * t;
  auto rng = replication_stream(spec.seed, replication, kStreamPanel);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  VectorXd effect(nt);
  if (spec.effects == EffectDraw::per_cell) {
    for (Index r = 0; r < nt; ++r)
      effect[r] = std_normal(rng);
  } else {
    for (Index i = 0; i < n; ++i)
      effect.segment(i * t, t).setConstant(std_normal(rng));
  }

  MatrixXd x(nt, k);
  for (Index r = 0; r < nt; ++r)
    for (Index j = 0; j < k; ++j)
      x(r, j) = std_normal(rng);
  if (spec.dgp == Dgp::fixed_effects)
    x.colwise() += effect;

  VectorXd eps(nt);
  switch (spec.error_law) {
    case ErrorLaw::normal01:
      for (Index r = 0; r < nt; ++r)
        eps[r] = std_normal(rng);
      break;
    case ErrorLaw::student_t5: {
      std::student_t_distribution<double> student(5.0);
      for (Index r = 0; r < nt; ++r)
        eps[r] = student(rng);
      break;
    }
    case ErrorLaw::double_exp1: {
      std::exponential_distribution<double> expo(1.0);
      std::bernoulli_distribution sign(0.5);
      for (Index r = 0; r < nt; ++r) {
        double const e = expo(rng);
        eps[r] = sign(rng) ? e : -e;
      }
      break;
    }
  }

  VectorXd y = x * spec.beta_true + effect + eps;
  return PanelDataset(n, t, std::move(y), std::move(x));
}

ContaminatedPanel contaminate(PanelDataset const& p,
                              Scheme scheme,
                              Index m,
                              Eigen::Ref<VectorXd const> beta,
                              Rng& rng)
{
  if (beta.size() != p.n_regressors())
    fail(ErrorCode::InvalidArgument, "contaminate: beta length differs from the regressor count");
  Index const n = p.n_individuals();
  Index const t = p.n_periods();
  check_contamination(n, t, scheme, m);

  std::vector<Index> cells;
  if (is_concentrated(scheme)) {
    Index const block = block_length(t);
    for (Index i : draw_without_replacement(n, m / block, rng)) {
      std::uniform_int_distribution<Index> offset_dist(0, t - block);
      Index const offset = offset_dist(rng);
      for (Index s = 0; s < block; ++s)
        cells.push_back(p.row(i, offset + s));
    }
  } else {
    cells = draw_without_replacement(n * t, m, rng);
  }

  VectorXd y = p.y();
  MatrixXd x = p.x();
  std::vector<bool> mask(static_cast<std::size_t>(p.n_obs()), false);
  std::normal_distribution<double> leverage_shift(20.0, 2.0);
  std::normal_distribution<double> vertical_shift(50.0, 1.0);
  std::normal_distribution<double> leverage_x(5.0, 2.0);
  for (Index row : cells) {
    mask[static_cast<std::size_t>(row)] = true;
    switch (scheme) {
      case Scheme::random_vertical:
        y[row] = -3.0 * y[row];
        break;
      case Scheme::concentrated_vertical:
        y[row] = -3.0 * y[row] + vertical_shift(rng);
        break;
      case Scheme::random_leverage:
      case Scheme::concentrated_leverage:
      {
        double const old_fit = x.row(row).dot(beta);
        for (Index j = 0; j < x.cols(); ++j)
          x(row, j) = leverage_x(rng);
        double const moved = y[row] - old_fit + x.row(row).dot(beta);
        y[row] = -3.0 * moved + leverage_shift(rng);
        break;
      }
    }
  }
  return {PanelDataset(n, t, std::move(y), std::move(x), p.ids(), p.times()), std::move(mask)};
}

std::vector<ReplicationFit> fit_estimators(PanelDataset const& p,
                                           std::span<EstimatorKind const> estimators,
                                           WleConfig const& cfg)
{
  std::optional<RobustFit> wfe;
  std::optional<RobustFit> wbe;
  bool wfe_failed = false;
  bool wbe_failed = false;
  auto get_wfe = [&]() -> RobustFit const& {
    if (!wfe)
      wfe = fit_wfe(p, cfg);
    return *wfe;
  };
  auto get_wbe = [&]() -> RobustFit const& {
    if (!wbe)
      wbe = fit_wbe(p, cfg);
    return *wbe;
  };

  std::vector<ReplicationFit> out;
  for (auto kind : estimators) {
    ReplicationFit rf;
    rf.kind = kind;
    auto const start = std::chrono::steady_clock::now();
    try {
      switch (kind) {
        case EstimatorKind::pols: rf.fit = fit_pooled_ols(p); break;
        case EstimatorKind::be: rf.fit = fit_between(p); break;
        case EstimatorKind::fe: rf.fit = fit_fixed_effects(p); break;
        case EstimatorKind::re: rf.fit = fit_random_effects(p); break;
        case EstimatorKind::wpols: {
          auto r = fit_wpols(p, cfg);
          rf.fallback = r.fallback;
          rf.fit = std::move(r.fit);
          break;
        }
        case EstimatorKind::wbe: {
          wbe_failed = true;
          auto const& r = get_wbe();
          wbe_failed = false;
          rf.fallback = r.fallback;
          rf.fit = r.fit;
          break;
        }
        case EstimatorKind::wfe: {
          wfe_failed = true;
          auto const& r = get_wfe();
          wfe_failed = false;
          rf.fallback = r.fallback;
          rf.fit = r.fit;
          break;
        }
        case EstimatorKind::wre: {
          if (wfe_failed || wbe_failed)
            fail(ErrorCode::RankDeficient, "wre needs wfe and wbe");
          auto r = fit_wre(p, cfg, get_wfe(), get_wbe());
          rf.fallback = r.fallback;
          rf.fit = std::move(r.fit);
          break;
        }
      }
    } catch (Error const& e) {
      if (is_input_error(e.code()))
        throw;
      rf.fit.reset();
    }
    rf.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(rf));
  }
  return out;
}

EstimatorSummary const& SimResult::at(EstimatorKind kind) const
{
  for (auto const& s : estimators)
    if (s.kind == kind)
      return s;
  fail(ErrorCode::InvalidArgument, "estimator " + std::string(to_string(kind)) + " not simulated");
}

namespace {

std::vector<ReplicationFit> run_replication(SimSpec const& spec,
                                            std::span<EstimatorKind const> estimators,
                                            WleConfig const& cfg,
                                            Index s)
{
  auto panel = generate_panel(spec, s);
  if (spec.contamination && spec.contamination->m > 0) {
    auto rng = replication_stream(spec.seed, s, kStreamContamination);
    panel = contaminate(panel, spec.contamination->scheme, spec.contamination->m, spec.beta_true, rng)
              .panel;
  }
  WleConfig rep_cfg = cfg;
  rep_cfg.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(s), kStreamEstimator);
  return fit_estimators(panel, estimators, rep_cfg);
}

} // namespace

SimResult run_simulation(SimSpec const& spec,
                         std::span<EstimatorKind const> estimators,
                         WleConfig const& cfg,
                         int jobs)
{
  spec.validate();
  auto const wall = std::chrono::steady_clock::now();
  Index const reps = spec.replications;
  std::vector<std::vector<ReplicationFit>> records(static_cast<std::size_t>(reps));

  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index s = next++; s < reps; s = next++)
      records[static_cast<std::size_t>(s)] = run_replication(spec, estimators, cfg, s);
  };
  int const threads = std::max(1, std::min<int>(jobs, static_cast<int>(reps)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < threads; ++j)
      pool.emplace_back(worker);
  }

  double const z = boost::math::quantile(boost::math::normal(), 1.0 - spec.gamma / 2.0);
  Index const k = spec.beta_true.size();
  SimResult result;
  result.spec = spec;
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    EstimatorSummary sum;
    sum.kind = estimators[e];
    sum.power = VectorXd::Zero(k);
    sum.mean_beta = VectorXd::Zero(k);
    for (auto const& rec : records) {
      auto const& rf = rec[e];
      sum.runtime_seconds += rf.seconds;
      if (!rf.fit) {
        ++sum.n_failed;
        ++sum.n_fallbacks;
        continue;
      }
      if (rf.fallback)
        ++sum.n_fallbacks;
      VectorXd const b = rf.fit->slopes();
      VectorXd const se = rf.fit->slope_std_errors();
      sum.mse += (b - spec.beta_true).squaredNorm();
      sum.mean_beta += b;
      for (Index j = 0; j < k; ++j)
        if (std::abs(b[j] / se[j]) > z)
          sum.power[j] += 1.0;
      ++sum.n_used;
    }
    double const used = static_cast<double>(sum.n_used);
    if (sum.n_used > 0) {
      sum.mse /= used;
      sum.mean_beta /= used;
      sum.power /= used;
    } else {
      sum.mse = std::numeric_limits<double>::quiet_NaN();
    }
    result.estimators.push_back(std::move(sum));
  }
  result.runtime_seconds =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
  return result;
}

} // namespace wlpanel
