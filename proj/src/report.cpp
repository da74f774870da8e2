#include "wlpanel/report.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace wlpanel {

namespace {

std::string sig4(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string fixed4(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double level_of(SimSpec const& s)
{
  if (!s.contamination)
    return 0.0;
  return static_cast<double>(s.contamination->m) /
         static_cast<double>(s.n_individuals * s.n_periods);
}

std::string scheme_of(SimSpec const& s)
{
  if (!s.contamination || s.contamination->m == 0)
    return "none";
  return std::string(to_string(s.contamination->scheme));
}

Index max_coefficients(std::span<SimResult const> results)
{
  Index k = 2;
  for (auto const& r : results)
    k = std::max(k, r.spec.beta_true.size());
  return k;
}

std::string pad(std::string s, std::size_t width, bool left = false)
{
  if (s.size() >= width)
    return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

} // namespace

std::string scenario_label(SimSpec const& spec)
{
  std::string out = std::string(to_string(spec.dgp)) + " (" + std::to_string(spec.n_individuals) +
                    "," + std::to_string(spec.n_periods) + ") " +
                    std::string(to_string(spec.error_law));
  if (spec.contamination && spec.contamination->m > 0)
    out += " " + std::string(to_string(spec.contamination->scheme)) +
           " m=" + std::to_string(spec.contamination->m);
  return out;
}

std::string emit_csv(std::span<SimResult const> results)
{
  Index const k_max = max_coefficients(results);
  std::ostringstream out;
  out << kResultsCsvHeader;
  for (Index k = 3; k <= k_max; ++k)
    out << ",power_b" << k;
  out << '\n';
  for (auto const& r : results) {
    auto const& s = r.spec;
    for (auto const& e : r.estimators) {
      out << to_string(e.kind) << ',' << to_string(s.dgp) << ',' << s.n_individuals << ','
          << s.n_periods << ',' << to_string(s.error_law) << ',' << scheme_of(s) << ','
          << sig4(level_of(s)) << ',' << sig4(e.mse);
      for (Index k = 0; k < 2; ++k)
        out << ',' << (k < e.power.size() ? sig4(e.power[k]) : std::string());
      out << ',' << e.n_fallbacks;
      for (Index k = 2; k < k_max; ++k)
        out << ',' << (k < e.power.size() ? sig4(e.power[k]) : std::string());
      out << '\n';
    }
  }
  return out.str();
}

std::string emit_text(std::span<SimResult const> results)
{
  std::ostringstream out;
  if (results.empty())
    return "(no results)\n";

  std::vector<EstimatorKind> rows;
  for (auto const& r : results)
    for (auto const& e : r.estimators)
      if (std::find(rows.begin(), rows.end(), e.kind) == rows.end())
        rows.push_back(e.kind);

  std::size_t const label_width = 8;
  std::size_t const cell_width = 10;
  auto block = [&](std::string const& title, auto const& value_of) {
    out << title << '\n';
    for (std::size_t j = 0; j < results.size(); ++j)
      out << "  [" << j + 1 << "] " << scenario_label(results[j].spec) << '\n';
    out << pad("", label_width, true);
    for (std::size_t j = 0; j < results.size(); ++j)
      out << pad("[" + std::to_string(j + 1) + "]", cell_width);
    out << '\n';
    for (auto kind : rows) {
      out << pad(std::string(to_string(kind)), label_width, true);
      for (auto const& r : results) {
        auto const it = std::find_if(r.estimators.begin(), r.estimators.end(),
                                     [&](auto const& e) { return e.kind == kind; });
        out << pad(it == r.estimators.end() ? "-" : value_of(*it), cell_width);
      }
      out << '\n';
    }
    out << '\n';
  };

  block("MSE", [](EstimatorSummary const& e) { return fixed4(e.mse); });
  Index const k_max = max_coefficients(results);
  for (Index k = 0; k < k_max; ++k)
    block("Power, beta_" + std::to_string(k + 1), [k](EstimatorSummary const& e) {
      return k < e.power.size() ? fixed4(e.power[k]).substr(0, 5) : std::string("-");
    });
  return out.str();
}

std::string emit_json(std::span<SimResult const> results)
{
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v))
      return v;
    return nullptr;
  };
  nlohmann::json rows = nlohmann::json::array();
  for (auto const& r : results) {
    auto const& s = r.spec;
    for (auto const& e : r.estimators) {
      nlohmann::json row;
      row["estimator"] = to_string(e.kind);
      row["dgp"] = to_string(s.dgp);
      row["N"] = s.n_individuals;
      row["T"] = s.n_periods;
      row["error"] = to_string(s.error_law);
      row["scheme"] = scheme_of(s);
      row["level"] = level_of(s);
      row["mse"] = number(e.mse);
      for (Index k = 0; k < e.power.size(); ++k)
        row["power_b" + std::to_string(k + 1)] = number(e.power[k]);
      row["fallbacks"] = e.n_fallbacks;
      nlohmann::json mean = nlohmann::json::array();
      for (Index k = 0; k < e.mean_beta.size(); ++k)
        mean.push_back(number(e.mean_beta[k]));
      row["mean_beta"] = mean;
      row["runtime_seconds"] = e.runtime_seconds;
      rows.push_back(std::move(row));
    }
  }
  return rows.dump(2) + "\n";
}

} // namespace wlpanel
