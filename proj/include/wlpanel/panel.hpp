#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace wlpanel {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One long-format record: individual label, period label, response, regressors.
struct RawRow
{
  std::string id;
  std::string time;
  double y = 0.0;
  std::vector<double> x;
};

/// Balanced panel stored in long format, individual-major: row i*T + t holds
/// individual i at period t. Immutable once constructed.
class PanelDataset
{
public:
  /// Takes ownership of y (N*T) and x (N*T x K), laid out individual-major.
  /// Labels default to "1".."N" and "1".."T".
  PanelDataset(Index n_individuals,
               Index n_periods,
               VectorXd y,
               MatrixXd x,
               std::vector<std::string> ids = {},
               std::vector<std::string> times = {});

  Index n_individuals() const { return n_individuals_; }
  Index n_periods() const { return n_periods_; }
  Index n_regressors() const { return x_.cols(); }
  Index n_obs() const { return y_.size(); }

  VectorXd const& y() const { return y_; }
  MatrixXd const& x() const { return x_; }

  Index row(Index individual, Index period) const
  {
    return individual * n_periods_ + period;
  }
  Index individual_of(Index row) const { return row / n_periods_; }
  Index period_of(Index row) const { return row % n_periods_; }

  std::vector<std::string> const& ids() const { return ids_; }
  std::vector<std::string> const& times() const { return times_; }

private:
  Index n_individuals_;
  Index n_periods_;
  VectorXd y_;
  MatrixXd x_;
  std::vector<std::string> ids_;
  std::vector<std::string> times_;
};

/// Builds a balanced panel from unordered long-format rows. Rows are sorted by
/// (id, time); labels compare numerically when every label parses as a number.
PanelDataset validate_panel(std::span<RawRow const> rows);

enum class TransformKind
{
  pooled,
  within,
  between,
  quasi
};

struct TransformedData
{
  VectorXd y_star;
  MatrixXd x_star;
  /// Panel row (pooled/within/quasi) or individual index (between) per output row.
  std::vector<Index> row_index;
  TransformKind kind = TransformKind::pooled;
  double theta = 0.0;

  Index n_rows() const { return y_star.size(); }
};

/// Idiosyncratic and individual-effect variances. theta() is derived on demand.
class VarianceComponents
{
public:
  VarianceComponents(double sigma2_eps, double sigma2_alpha, Index n_periods);

  double sigma2_eps() const { return sigma2_eps_; }
  double sigma2_alpha() const { return sigma2_alpha_; }
  Index n_periods() const { return n_periods_; }
  double sigma2_nu() const { return sigma2_alpha_ + sigma2_eps_; }

  /// 1 - sqrt(s_eps / (s_eps + T s_alpha)); 0 when both variances vanish.
  double theta() const;

  /// T x T within-individual covariance  s_eps I + s_alpha e e'.
  MatrixXd omega() const;

private:
  double sigma2_eps_;
  double sigma2_alpha_;
  Index n_periods_;
};

TransformedData pooled_transform(PanelDataset const& p);
TransformedData within_transform(PanelDataset const& p);
TransformedData between_transform(PanelDataset const& p);
TransformedData quasi_demean(PanelDataset const& p, VarianceComponents const& vc);
TransformedData quasi_demean(PanelDataset const& p, double theta);

/// Per-individual time means of the columns of a long-format matrix (N x cols).
MatrixXd individual_means(MatrixXd const& values, Index n_individuals, Index n_periods);

} // namespace wlpanel
