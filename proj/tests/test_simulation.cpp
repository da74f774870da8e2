#include "doctest.h"

#include "wlpanel/error.hpp"
#include "wlpanel/ols.hpp"
#include "wlpanel/simulation.hpp"

#include <cmath>
#include <set>

using namespace wlpanel;

namespace {

SimSpec spec_of(Index n, Index t, Dgp dgp = Dgp::random_effects)
{
  SimSpec s;
  s.dgp = dgp;
  s.n_individuals = n;
  s.n_periods = t;
  s.seed = 42;
  return s;
}

double variance(VectorXd const& v)
{
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("DGP moments")
{
  // effect + N(0,1) error has variance 2
  auto const p2 = generate_panel(spec_of(2000, 5), 0);
  VectorXd const noise = p2.y() - p2.x() * spec_of(1, 1).beta_true;
  CHECK(std::abs(variance(noise) - 2.0) < 0.1);

  auto const p1 = generate_panel(spec_of(2000, 5, Dgp::fixed_effects), 0);
  VectorXd const noise1 = p1.y() - p1.x() * spec_of(1, 1).beta_true;
  for (Index k = 0; k < 2; ++k) {
    VectorXd const xk = p1.x().col(k);
    double const cov = ((xk.array() - xk.mean()) * (noise1.array() - noise1.mean())).sum() /
                       static_cast<double>(xk.size() - 1);
    CHECK(cov / std::sqrt(variance(xk) * variance(noise1)) > 0.3);
  }
  // regressors are independent of the effect under DGP-II
  VectorXd const x0 = p2.x().col(0);
  double const cov2 = ((x0.array() - x0.mean()) * (noise.array() - noise.mean())).sum() /
                      static_cast<double>(x0.size() - 1);
  CHECK(std::abs(cov2 / std::sqrt(variance(x0) * variance(noise))) < 0.05);
}

TEST_CASE("per-individual effects are shared over time")
{
  auto spec = spec_of(500, 6);
  spec.effects = EffectDraw::per_individual;
  auto const p = generate_panel(spec, 0);
  auto const vc = estimate_variance_components(p);
  CHECK(std::abs(vc.sigma2_alpha() - 1.0) < 0.25);
  CHECK(std::abs(vc.sigma2_eps() - 1.0) < 0.1);
}

TEST_CASE("generation is deterministic per (seed, replication)")
{
  auto const spec = spec_of(20, 3);
  auto const a = generate_panel(spec, 4), b = generate_panel(spec, 4), c = generate_panel(spec, 5);
  CHECK(a.y() == b.y());
  CHECK(a.x() == b.x());
  CHECK(a.y() != c.y());
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("random vertical contamination multiplies y by -3")
{
  auto const spec = spec_of(10, 2);
  auto const p = generate_panel(spec, 0);
  Rng rng(5);
  auto const cp = contaminate(p, Scheme::random_vertical, 1, spec.beta_true, rng);
  Index hit = -1;
  for (Index r = 0; r < p.n_obs(); ++r)
    if (cp.mask[static_cast<std::size_t>(r)])
      hit = r;
  REQUIRE(hit >= 0);
  CHECK(cp.panel.y()[hit] == -3.0 * p.y()[hit]);
  CHECK(cp.panel.x() == p.x());
  for (Index r = 0; r < p.n_obs(); ++r)
    if (r != hit)
      CHECK(cp.panel.y()[r] == p.y()[r]);
}

TEST_CASE("m = 0 leaves the panel untouched")
{
  auto const spec = spec_of(10, 2);
  auto const p = generate_panel(spec, 0);
  Rng rng(5);
  auto const cp = contaminate(p, Scheme::random_leverage, 0, spec.beta_true, rng);
  CHECK(cp.panel.y() == p.y());
  CHECK(cp.panel.x() == p.x());
  CHECK(std::count(cp.mask.begin(), cp.mask.end(), true) == 0);
}

TEST_CASE("contamination masks")
{
  auto const spec = spec_of(120, 2);
  auto const p = generate_panel(spec, 0);
  for (auto scheme : {Scheme::random_vertical, Scheme::random_leverage,
                      Scheme::concentrated_vertical, Scheme::concentrated_leverage}) {
    Rng rng(9);
    auto const cp = contaminate(p, scheme, 12, spec.beta_true, rng);
    CHECK(std::count(cp.mask.begin(), cp.mask.end(), true) == 12);
    std::set<Index> individuals;
    for (Index r = 0; r < p.n_obs(); ++r)
      if (cp.mask[static_cast<std::size_t>(r)])
        individuals.insert(p.individual_of(r));
    bool const concentrated =
      scheme == Scheme::concentrated_vertical || scheme == Scheme::concentrated_leverage;
    // T = 2: blocks of one cell, so 12 distinct individuals either way
    CHECK(individuals.size() == 12);
    if (concentrated) {
      for (Index r = 0; r < p.n_obs(); ++r)
        if (cp.mask[static_cast<std::size_t>(r)] && scheme == Scheme::concentrated_vertical)
          CHECK(cp.panel.y()[r] != p.y()[r]);
    }
  }

  auto const p3 = generate_panel(spec_of(80, 3), 0);
  Rng rng(10);
  auto const cp = contaminate(p3, Scheme::concentrated_vertical, 24, spec.beta_true, rng);
  std::set<Index> individuals;
  for (Index r = 0; r < p3.n_obs(); ++r)
    if (cp.mask[static_cast<std::size_t>(r)])
      individuals.insert(p3.individual_of(r));
  CHECK(individuals.size() == 12); // blocks of ceil(3/2) = 2 periods
  for (Index i : individuals) {
    int in_block = 0;
    for (Index t = 0; t < 3; ++t)
      in_block += cp.mask[static_cast<std::size_t>(p3.row(i, t))] ? 1 : 0;
    CHECK(in_block == 2);
    CHECK(cp.mask[static_cast<std::size_t>(p3.row(i, 1))]); // contiguous block covers t = 1
  }
}

TEST_CASE("leverage contamination redraws the regressors")
{
  auto const spec = spec_of(50, 2);
  auto const p = generate_panel(spec, 0);
  Rng rng(11);
  auto const cp = contaminate(p, Scheme::random_leverage, 10, spec.beta_true, rng);
  double mean_x = 0.0;
  for (Index r = 0; r < p.n_obs(); ++r)
    if (cp.mask[static_cast<std::size_t>(r)])
      mean_x += cp.panel.x().row(r).mean() / 10.0;
  CHECK(mean_x > 3.0); // redrawn around 5
}

TEST_CASE("infeasible contamination")
{
  auto const p = generate_panel(spec_of(10, 3), 0);
  Rng rng(1);
  VectorXd const beta = spec_of(1, 1).beta_true;
  CHECK_THROWS_WITH_AS(contaminate(p, Scheme::random_vertical, 31, beta, rng),
                       doctest::Contains("InfeasibleContamination"), Error);
  // blocks of 2 cells: 5 is not a whole number of blocks
  CHECK_THROWS_WITH_AS(contaminate(p, Scheme::concentrated_vertical, 5, beta, rng),
                       doctest::Contains("InfeasibleContamination"), Error);
  CHECK_THROWS_WITH_AS(contaminate(p, Scheme::concentrated_leverage, 22, beta, rng),
                       doctest::Contains("InfeasibleContamination"), Error);
  auto spec = spec_of(10, 3);
  spec.contamination = Contamination{Scheme::concentrated_vertical, 5};
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("a single replication gives the exact squared error")
{
  auto spec = spec_of(30, 4);
  spec.replications = 1;
  EstimatorKind const kinds[] = {EstimatorKind::pols, EstimatorKind::fe};
  auto const res = run_simulation(spec, kinds);
  auto const p = generate_panel(spec, 0);
  VectorXd const pols = fit_pooled_ols(p).slopes(), fe = fit_fixed_effects(p).slopes();
  CHECK(res.at(EstimatorKind::pols).mse == doctest::Approx((pols - spec.beta_true).squaredNorm()).epsilon(1e-12));
  CHECK(res.at(EstimatorKind::fe).mse == doctest::Approx((fe - spec.beta_true).squaredNorm()).epsilon(1e-12));
  CHECK(res.at(EstimatorKind::pols).n_used == 1);
}

TEST_CASE("results do not depend on the number of threads")
{
  auto spec = spec_of(30, 3);
  spec.replications = 6;
  spec.contamination = Contamination{Scheme::random_vertical, 5};
  auto const one = run_simulation(spec, kAllEstimators, {}, 1);
  auto const three = run_simulation(spec, kAllEstimators, {}, 3);
  for (std::size_t k = 0; k < one.estimators.size(); ++k) {
    CHECK(one.estimators[k].mse == three.estimators[k].mse);
    CHECK(one.estimators[k].power == three.estimators[k].power);
    CHECK(one.estimators[k].mean_beta == three.estimators[k].mean_beta);
  }
}

TEST_CASE("MSE falls with N and power is a rate")
{
  EstimatorKind const kinds[] = {EstimatorKind::pols, EstimatorKind::re};
  auto small = spec_of(25, 4);
  small.replications = 60;
  auto large = spec_of(250, 4);
  large.replications = 60;
  auto const a = run_simulation(small, kinds), b = run_simulation(large, kinds);
  for (auto k : kinds) {
    CHECK(b.at(k).mse < a.at(k).mse);
    for (auto const* r : {&a, &b})
      CHECK(((r->at(k).power.array() >= 0.0) && (r->at(k).power.array() <= 1.0)).all());
  }

  auto clean = spec_of(100, 10);
  clean.replications = 40;
  auto const c = run_simulation(clean, kAllEstimators);
  for (auto const& e : c.estimators) {
    INFO(to_string(e.kind));
    CHECK(e.power.minCoeff() >= 0.99);
  }
}

TEST_CASE("spec validation and names")
{
  auto spec = spec_of(1, 4);
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = spec_of(10, 4);
  spec.gamma = 1.5;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = spec_of(10, 4);
  spec.replications = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  CHECK(parse_dgp("I") == Dgp::fixed_effects);
  CHECK(parse_dgp("2") == Dgp::random_effects);
  CHECK(parse_error_law("t5") == ErrorLaw::student_t5);
  CHECK(parse_scheme(to_string(Scheme::concentrated_leverage)) == Scheme::concentrated_leverage);
  CHECK_THROWS_AS(parse_scheme("sideways"), Error);
}
