#pragma once

#include "wlpanel/simulation.hpp"

#include <span>
#include <string>

namespace wlpanel {

/// Header of the results CSV; power_b3.. columns are appended when a result has K > 2.
inline constexpr char const* kResultsCsvHeader =
  "estimator,dgp,N,T,error,scheme,level,mse,power_b1,power_b2,fallbacks";

/// One row per (scenario, estimator), scenarios in input order. Numbers use 4
/// significant digits; level is m / (N T), 0 for clean scenarios.
std::string emit_csv(std::span<SimResult const> results);

/// Estimators down, scenarios across, MSE cells; one power block per coefficient.
std::string emit_text(std::span<SimResult const> results);

/// Array of objects with the CSV fields, plus mean_beta and runtime_seconds.
std::string emit_json(std::span<SimResult const> results);

/// Short scenario label such as "II (120,2) normal random_vertical m=12".
std::string scenario_label(SimSpec const& spec);

} // namespace wlpanel
