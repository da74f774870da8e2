#pragma once

#include "wlpanel/fit.hpp"
#include "wlpanel/simulation.hpp"
#include "wlpanel/wle.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace wlpanel {

/// A simulation grid: the cartesian product dgp x sizes x errors x contamination,
/// all sharing the remaining SimSpec fields, estimator list and WLE settings.
///
/// File format, one `key = value` per line, `#` starts a comment, lists are
/// comma separated:
///
///   dgp = I, II
///   sizes = 120x2, 80x3
///   errors = normal, t5, dexp
///   contamination = none, random_vertical:12, concentrated_leverage:24
///   replications = 200
///   gamma = 0.05
///   seed = 1
///   beta = 2.4, -1.2
///   effects = cell | individual
///   estimators = all | pols, wpols, ...
///   raf = hellinger | identity
///   bandwidth_constant = 0.18
///   target_weight = 0.2
///   reference_distance = 3
///   reference_level = 0.2
///   bootstrap = 30
///   max_iterations = 500
struct GridConfig
{
  std::vector<SimSpec> cells;
  std::vector<EstimatorKind> estimators;
  WleConfig wle;
};

/// Throws ConfigError naming the offending key or line.
GridConfig parse_grid_config(std::istream& in, std::string_view source = "<config>");
GridConfig load_grid_config(std::filesystem::path const& path);

} // namespace wlpanel
