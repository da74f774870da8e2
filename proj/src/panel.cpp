#include "wlpanel/panel.hpp"

#include "wlpanel/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

namespace wlpanel {

namespace {

std::optional<double> as_number(std::string const& s)
{
  double v = 0.0;
  auto const* first = s.data();
  auto const* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    return std::nullopt;
  return v;
}

/// Orders labels numerically when all of them are numbers, otherwise lexically.
struct LabelOrder
{
  bool numeric = false;

  explicit LabelOrder(std::vector<std::string> const& labels)
  {
    numeric = std::all_of(labels.begin(), labels.end(),
                          [](auto const& s) { return as_number(s).has_value(); });
  }

  bool operator()(std::string const& a, std::string const& b) const
  {
    if (numeric) {
      double const da = *as_number(a);
      double const db = *as_number(b);
      if (da != db)
        return da < db;
    }
    return a < b;
  }
};

std::vector<std::string> sorted_unique(std::vector<std::string> labels)
{
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::sort(labels.begin(), labels.end(), LabelOrder(labels));
  return labels;
}

std::vector<std::string> default_labels(Index n)
{
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    out.push_back(std::to_string(i + 1));
  return out;
}

} // namespace

PanelDataset::PanelDataset(Index n_individuals,
                           Index n_periods,
                           VectorXd y,
                           MatrixXd x,
                           std::vector<std::string> ids,
                           std::vector<std::string> times)
  : n_individuals_(n_individuals)
  , n_periods_(n_periods)
  , y_(std::move(y))
  , x_(std::move(x))
  , ids_(std::move(ids))
  , times_(std::move(times))
{
  if (n_individuals_ < 2)
    fail(ErrorCode::InvalidArgument, "panel needs at least 2 individuals");
  if (n_periods_ < 2)
    fail(ErrorCode::InvalidArgument, "panel needs at least 2 periods");
  if (x_.cols() < 1)
    fail(ErrorCode::InvalidArgument, "panel needs at least 1 regressor");
  Index const nt = n_individuals_ * n_periods_;
  if (y_.size() != nt || x_.rows() != nt)
    fail(ErrorCode::UnbalancedPanel,
         "expected " + std::to_string(nt) + " rows, got y=" + std::to_string(y_.size()) +
           " x=" + std::to_string(x_.rows()));
  if (nt <= x_.cols())
    fail(ErrorCode::InvalidArgument, "N*T must exceed the number of regressors");
  if (!y_.allFinite())
    fail(ErrorCode::NonFiniteValue, "response contains a non-finite value");
  if (!x_.allFinite())
    fail(ErrorCode::NonFiniteValue, "regressors contain a non-finite value");
  if (ids_.empty())
    ids_ = default_labels(n_individuals_);
  if (times_.empty())
    times_ = default_labels(n_periods_);
  if (static_cast<Index>(ids_.size()) != n_individuals_ ||
      static_cast<Index>(times_.size()) != n_periods_)
    fail(ErrorCode::InvalidArgument, "label count does not match panel dimensions");
}

PanelDataset validate_panel(std::span<RawRow const> rows)
{
  if (rows.empty())
    fail(ErrorCode::InvalidArgument, "no rows");

  std::size_t const k = rows.front().x.size();
  std::vector<std::string> id_labels;
  std::vector<std::string> time_labels;
  for (auto const& r : rows) {
    if (r.x.size() != k)
      fail(ErrorCode::ParseError, "row (" + r.id + "," + r.time + ") has " +
                                    std::to_string(r.x.size()) + " regressors, expected " +
                                    std::to_string(k));
    if (!std::isfinite(r.y))
      fail(ErrorCode::NonFiniteValue, "y at (" + r.id + "," + r.time + ")");
    for (std::size_t j = 0; j < k; ++j)
      if (!std::isfinite(r.x[j]))
        fail(ErrorCode::NonFiniteValue,
             "x" + std::to_string(j + 1) + " at (" + r.id + "," + r.time + ")");
    id_labels.push_back(r.id);
    time_labels.push_back(r.time);
  }

  auto const ids = sorted_unique(std::move(id_labels));
  auto const times = sorted_unique(std::move(time_labels));
  std::map<std::string, Index> id_pos;
  std::map<std::string, Index> time_pos;
  for (std::size_t i = 0; i < ids.size(); ++i)
    id_pos.emplace(ids[i], static_cast<Index>(i));
  for (std::size_t t = 0; t < times.size(); ++t)
    time_pos.emplace(times[t], static_cast<Index>(t));

  Index const n = static_cast<Index>(ids.size());
  Index const t_count = static_cast<Index>(times.size());
  Index const kk = static_cast<Index>(k);
  VectorXd y(n * t_count);
  MatrixXd x(n * t_count, kk);
  std::vector<char> seen(static_cast<std::size_t>(n * t_count), 0);

  for (auto const& r : rows) {
    Index const row = id_pos.at(r.id) * t_count + time_pos.at(r.time);
    auto& flag = seen[static_cast<std::size_t>(row)];
    if (flag)
      fail(ErrorCode::DuplicateCell, "(id,time) = (" + r.id + "," + r.time + ") appears twice");
    flag = 1;
    y(row) = r.y;
    for (Index j = 0; j < kk; ++j)
      x(row, j) = r.x[static_cast<std::size_t>(j)];
  }
  for (Index row = 0; row < n * t_count; ++row)
    if (!seen[static_cast<std::size_t>(row)])
      fail(ErrorCode::UnbalancedPanel,
           "individual " + ids[static_cast<std::size_t>(row / t_count)] + " lacks period " +
             times[static_cast<std::size_t>(row % t_count)]);

  return PanelDataset(n, t_count, std::move(y), std::move(x), ids, times);
}

VarianceComponents::VarianceComponents(double sigma2_eps, double sigma2_alpha, Index n_periods)
  : sigma2_eps_(sigma2_eps)
  , sigma2_alpha_(sigma2_alpha)
  , n_periods_(n_periods)
{
  if (!(sigma2_eps >= 0.0) || !(sigma2_alpha >= 0.0) || !std::isfinite(sigma2_eps) ||
      !std::isfinite(sigma2_alpha))
    fail(ErrorCode::DomainError, "variance components must be finite and non-negative");
  if (n_periods < 1)
    fail(ErrorCode::DomainError, "n_periods must be positive");
}

double VarianceComponents::theta() const
{
  double const denom = sigma2_eps_ + static_cast<double>(n_periods_) * sigma2_alpha_;
  if (denom <= 0.0)
    return 0.0;
  return 1.0 - std::sqrt(sigma2_eps_ / denom);
}

MatrixXd VarianceComponents::omega() const
{
  MatrixXd om = MatrixXd::Constant(n_periods_, n_periods_, sigma2_alpha_);
  om.diagonal().array() += sigma2_eps_;
  return om;
}

MatrixXd individual_means(MatrixXd const& values, Index n_individuals, Index n_periods)
{
  MatrixXd means(n_individuals, values.cols());
  for (Index i = 0; i < n_individuals; ++i)
    means.row(i) = values.middleRows(i * n_periods, n_periods).colwise().mean();
  return means;
}

namespace {

std::vector<Index> iota_rows(Index n)
{
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

/// Subtracts theta times the individual means from every row.
TransformedData partial_demean(PanelDataset const& p, double theta, TransformKind kind)
{
  Index const n = p.n_individuals();
  Index const t = p.n_periods();
  TransformedData out;
  out.kind = kind;
  out.theta = theta;
  out.y_star = p.y();
  out.x_star = p.x();
  out.row_index = iota_rows(p.n_obs());
  for (Index i = 0; i < n; ++i) {
    auto yb = out.y_star.segment(i * t, t);
    auto xb = out.x_star.middleRows(i * t, t);
    double const ym = yb.mean();
    Eigen::RowVectorXd const xm = xb.colwise().mean();
    yb.array() -= theta * ym;
    xb.rowwise() -= theta * xm;
  }
  return out;
}

} // namespace

TransformedData pooled_transform(PanelDataset const& p)
{
  TransformedData out;
  out.kind = TransformKind::pooled;
  out.y_star = p.y();
  out.x_star = p.x();
  out.row_index = iota_rows(p.n_obs());
  return out;
}

TransformedData within_transform(PanelDataset const& p)
{
  return partial_demean(p, 1.0, TransformKind::within);
}

TransformedData between_transform(PanelDataset const& p)
{
  Index const n = p.n_individuals();
  Index const t = p.n_periods();
  TransformedData out;
  out.kind = TransformKind::between;
  out.y_star = individual_means(p.y(), n, t).col(0);
  out.x_star = individual_means(p.x(), n, t);
  out.row_index = iota_rows(n);
  return out;
}

TransformedData quasi_demean(PanelDataset const& p, VarianceComponents const& vc)
{
  return quasi_demean(p, vc.theta());
}

TransformedData quasi_demean(PanelDataset const& p, double theta)
{
  if (!(theta >= 0.0 && theta <= 1.0))
    fail(ErrorCode::DomainError, "theta must lie in [0, 1]");
  if (theta == 0.0) {
    auto out = pooled_transform(p);
    out.kind = TransformKind::quasi;
    return out;
  }
  return partial_demean(p, theta, TransformKind::quasi);
}

} // namespace wlpanel
