#include "doctest.h"

#include "wlpanel/density.hpp"
#include "wlpanel/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

using namespace wlpanel;

namespace {

Eigen::VectorXd normal_sample(Eigen::Index n, double sd, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  Eigen::VectorXd v(n);
  for (auto& e : v)
    e = z(rng);
  return v;
}

double adaptive_simpson(std::function<double(double)> const& f, double a, double b, double tol,
                        int depth = 0)
{
  double const m = 0.5 * (a + b);
  double const whole = (b - a) / 6 * (f(a) + 4 * f(m) + f(b));
  double const lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double const left = (m - a) / 6 * (f(a) + 4 * f(lm) + f(m));
  double const right = (b - m) / 6 * (f(m) + 4 * f(rm) + f(b));
  if (depth > 40 || std::abs(left + right - whole) <= 15 * tol)
    return left + right + (left + right - whole) / 15;
  return adaptive_simpson(f, a, m, tol / 2, depth + 1) +
         adaptive_simpson(f, m, b, tol / 2, depth + 1);
}

} // namespace

TEST_CASE("kernel density equals a naive double loop")
{
  auto const r = normal_sample(300, 1.7, 11);
  double const h = 0.43;
  double const pi = std::acos(-1.0);
  for (Eigen::Index i = 0; i < r.size(); i += 7) {
    double naive = 0.0;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      double const u = (r[i] - r[j]) / h;
      naive += std::exp(-u * u / 2) / (h * std::sqrt(2 * pi));
    }
    naive /= static_cast<double>(r.size());
    CHECK(std::abs(kernel_density(r, r[i], h) - naive) <= 1e-14);
    ResidualDensity const exact(r, h, DensityEvaluation::exact);
    CHECK(std::abs(exact(r[i]) - naive) <= 1e-14);
  }
}

TEST_CASE("smoothed model density equals quadrature of the convolution")
{
  for (double sigma : {0.3, 1.0, 2.5})
    for (double h : {0.05, 0.5, 1.7})
      for (double r : {-4.0, -0.3, 0.0, 1.1, 6.0}) {
        auto const integrand = [&](double t) { return normal_pdf(r - t, h) * normal_pdf(t, sigma); };
        // panels no wider than the narrower Gaussian so no peak is skipped
        double const span = 12 * (sigma + h);
        double const width = std::min(sigma, h);
        double q = 0.0;
        for (double a = r - span; a < r + span; a += width)
          q += adaptive_simpson(integrand, a, std::min(a + width, r + span), 1e-15);
        CHECK(std::abs(smoothed_model_density(r, sigma, h) - q) <= 1e-8);
      }
  CHECK(smoothed_model_density(0.0, std::sqrt(3.0), 1.0) == doctest::Approx(0.19947).epsilon(1e-4));
}

TEST_CASE("Pearson residual of a single point")
{
  Eigen::VectorXd const one = Eigen::VectorXd::Zero(1);
  auto const d = pearson_residuals(one, 1.0, 1.0);
  CHECK(d[0] == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-14));
}

TEST_CASE("Pearson residuals vanish on model-consistent samples")
{
  auto const r = normal_sample(10000, 1.0, 5);
  for (auto mode : {DensityEvaluation::exact, DensityEvaluation::binned}) {
    auto const d = pearson_residuals(r, 1.0, 0.3, mode);
    std::vector<double> a(d.data(), d.data() + d.size());
    for (auto& v : a)
      v = std::abs(v);
    std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
    CHECK(a[a.size() / 2] < 0.1);
  }
}

TEST_CASE("an isolated point gets a large Pearson residual")
{
  Eigen::VectorXd r = normal_sample(101, 1.0, 9);
  r[100] = 10.0;
  auto const d = pearson_residuals(r, 1.0, 0.5);
  CHECK(d[100] > 1e6);
  // far tail goes through the log-space branch; it must agree with a direct ratio
  Eigen::VectorXd far = r;
  far[100] = 14.0;
  double const direct =
    kernel_density(far, 14.0, 0.5) / smoothed_model_density(14.0, 1.0, 0.5) - 1.0;
  double const logged = pearson_residuals(far, 1.0, 0.5)[100];
  CHECK(logged == doctest::Approx(direct).epsilon(1e-10));
  // underflowing model density gives +inf, never NaN
  far[100] = 80.0;
  CHECK(std::isinf(pearson_residuals(far, 1.0, 0.5)[100]));
}

TEST_CASE("binned density tracks the exact sums")
{
  auto const r = normal_sample(2000, 2.0, 21);
  double const h = 0.35;
  ResidualDensity const exact(r, h, DensityEvaluation::exact);
  ResidualDensity const binned(r, h, DensityEvaluation::binned);
  REQUIRE(binned.binned());
  double worst = 0.0;
  for (double x = -6.0; x <= 6.0; x += 0.137)
    worst = std::max(worst, std::abs(binned(x) - exact(x)) / exact(x));
  CHECK(worst < 2e-3);
  CHECK(!ResidualDensity(r.head(10), h, DensityEvaluation::automatic).binned());
  CHECK(ResidualDensity(r, h, DensityEvaluation::automatic).binned());
}

TEST_CASE("disparity: near zero on clean data, larger with contamination")
{
  auto const r = normal_sample(10000, 1.0, 3);
  double const clean = disparity(r, 1.0, 0.3, 2048, DensityEvaluation::binned);
  CHECK(clean >= -1e-8);
  CHECK(clean < 0.05);

  Eigen::VectorXd dirty = r;
  for (Eigen::Index i = 0; i < 1000; ++i)
    dirty[i] = 10.0 + 0.1 * r[i];
  double const contaminated = disparity(dirty, 1.0, 0.3, 2048, DensityEvaluation::binned);
  CHECK(contaminated > clean);

  auto const small = normal_sample(200, 1.0, 4);
  CHECK(disparity(small, 1.0, 0.4, 2048, DensityEvaluation::exact) >= -1e-8);
  CHECK_THROWS_AS(disparity(small, 1.0, 0.4, 2047), Error);
}

TEST_CASE("density arguments are checked")
{
  Eigen::VectorXd const r = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(ResidualDensity(r, 0.0), Error);
  CHECK_THROWS_AS(ResidualDensity(Eigen::VectorXd(0), 1.0), Error);
  CHECK_THROWS_AS(pearson_residuals(r, 0.0, 1.0), Error);
}
