#include "doctest.h"

#include "wlpanel/error.hpp"
#include "wlpanel/panel.hpp"

#include <cmath>
#include <limits>

using namespace wlpanel;

namespace {

PanelDataset small_panel()
{
  // N = 3, T = 2, K = 2, individual-major rows
  VectorXd y(6);
  y << 1.0, 2.0, 0.5, -1.0, 3.0, 4.5;
  MatrixXd x(6, 2);
  x << 1.0, 0.0,
       2.0, 1.0,
       0.0, 3.0,
       1.0, 1.0,
       4.0, -2.0,
       5.0, 0.5;
  return PanelDataset(3, 2, y, x);
}

ErrorCode code_of(auto&& f)
{
  try {
    f();
  } catch (Error const& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("constructor checks shapes and finiteness")
{
  VectorXd y = VectorXd::Ones(6);
  MatrixXd x = MatrixXd::Random(6, 1);
  CHECK_NOTHROW(PanelDataset(3, 2, y, x));
  CHECK(code_of([&] { PanelDataset(3, 3, y, x); }) == ErrorCode::UnbalancedPanel);
  CHECK(code_of([&] { PanelDataset(1, 6, y, x); }) == ErrorCode::InvalidArgument);
  y[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK(code_of([&] { PanelDataset(3, 2, y, x); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("validate_panel sorts rows and labels numerically")
{
  std::vector<RawRow> rows = {
    {"10", "2", 6.0, {6.0}}, {"2", "1", 1.0, {1.0}}, {"10", "1", 5.0, {5.0}},
    {"2", "2", 2.0, {2.0}},  {"3", "2", 4.0, {4.0}}, {"3", "1", 3.0, {3.0}},
  };
  auto const p = validate_panel(rows);
  REQUIRE(p.n_individuals() == 3);
  REQUIRE(p.n_periods() == 2);
  CHECK(p.ids() == std::vector<std::string>{"2", "3", "10"});
  for (Index r = 0; r < 6; ++r)
    CHECK(p.y()[r] == doctest::Approx(r + 1.0));
}

TEST_CASE("validate_panel rejects duplicates, gaps and non-finite values")
{
  std::vector<RawRow> dup = {{"a", "1", 1, {1}}, {"a", "1", 2, {2}}, {"b", "1", 1, {3}},
                             {"b", "2", 1, {4}}};
  try {
    validate_panel(dup);
    FAIL("expected DuplicateCell");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::DuplicateCell);
    CHECK(std::string(e.what()).find("(a,1)") != std::string::npos);
  }

  std::vector<RawRow> gap = {{"a", "1", 1, {1}}, {"a", "2", 2, {2}}, {"b", "1", 1, {3}},
                             {"c", "1", 1, {3}}, {"c", "2", 1, {3}}};
  try {
    validate_panel(gap);
    FAIL("expected UnbalancedPanel");
  } catch (Error const& e) {
    CHECK(e.code() == ErrorCode::UnbalancedPanel);
    CHECK(std::string(e.what()).find("individual b lacks period 2") != std::string::npos);
  }

  std::vector<RawRow> inf = {{"a", "1", 1, {1}}, {"a", "2", 2, {2}}, {"b", "1", 1, {3}},
                             {"b", "2", 1, {std::numeric_limits<double>::infinity()}}};
  CHECK(code_of([&] { validate_panel(inf); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("within transform has zero individual means")
{
  auto const p = small_panel();
  auto const w = within_transform(p);
  auto const my = individual_means(w.y_star, 3, 2);
  auto const mx = individual_means(w.x_star, 3, 2);
  CHECK(my.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(mx.cwiseAbs().maxCoeff() <= 1e-12);
  // individual 0: y = (1, 2), mean 1.5
  CHECK(w.y_star[0] == doctest::Approx(-0.5));
  CHECK(w.y_star[1] == doctest::Approx(0.5));
}

TEST_CASE("between transform averages over time")
{
  auto const b = between_transform(small_panel());
  REQUIRE(b.n_rows() == 3);
  CHECK(b.y_star[1] == doctest::Approx(-0.25));
  CHECK(b.x_star(2, 0) == doctest::Approx(4.5));
  CHECK(b.row_index == std::vector<Index>{0, 1, 2});
}

TEST_CASE("quasi-demeaning endpoints")
{
  auto const p = small_panel();
  auto const q0 = quasi_demean(p, VarianceComponents(1.0, 0.0, 2));
  CHECK((q0.y_star - p.y()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q0.x_star - p.x()).cwiseAbs().maxCoeff() == 0.0);

  auto const q1 = quasi_demean(p, VarianceComponents(0.0, 1.0, 2));
  auto const w = within_transform(p);
  CHECK((q1.y_star - w.y_star).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((q1.x_star - w.x_star).cwiseAbs().maxCoeff() <= 1e-14);

  CHECK_THROWS_AS(quasi_demean(p, 1.5), Error);
  CHECK_THROWS_AS(quasi_demean(p, -0.1), Error);
}

TEST_CASE("variance components")
{
  VarianceComponents const vc(1.0, 1.0, 3);
  CHECK(vc.theta() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(vc.sigma2_nu() == 2.0);
  CHECK(VarianceComponents(0.0, 0.0, 4).theta() == 0.0);
  CHECK(VarianceComponents(2.0, 0.0, 4).theta() == 0.0);
  CHECK(VarianceComponents(0.0, 2.0, 4).theta() == 1.0);

  auto const om = VarianceComponents(0.7, 0.4, 4).omega();
  CHECK((om - om.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(om);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
  CHECK(eig.eigenvalues().minCoeff() == doctest::Approx(0.7));
  CHECK(eig.eigenvalues().maxCoeff() == doctest::Approx(0.7 + 4 * 0.4));

  CHECK(code_of([] { VarianceComponents(-1.0, 0.0, 2); }) == ErrorCode::DomainError);
  CHECK(code_of([] { VarianceComponents(1.0, std::nan(""), 2); }) == ErrorCode::DomainError);
}
