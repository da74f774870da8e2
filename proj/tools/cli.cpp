#include "cli.hpp"

#include "wlpanel/error.hpp"
#include "wlpanel/grid.hpp"
#include "wlpanel/ols.hpp"
#include "wlpanel/panel_io.hpp"
#include "wlpanel/report.hpp"
#include "wlpanel/robust.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace wlpanel::cli {

namespace {

std::vector<std::string> split_names(std::string const& list)
{
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto const first = item.find_first_not_of(' ');
    auto const last = item.find_last_not_of(' ');
    if (first != std::string::npos)
      out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

std::vector<EstimatorKind> parse_estimator_list(std::string const& list)
{
  if (list == "all")
    return {kAllEstimators.begin(), kAllEstimators.end()};
  std::vector<EstimatorKind> out;
  for (auto const& name : split_names(list))
    out.push_back(parse_estimator(name));
  if (out.empty())
    fail(ErrorCode::InvalidArgument, "empty estimator list");
  return out;
}

struct WeightSummary
{
  double min = 1.0;
  double median = 1.0;
  Index below_half = 0;
};

WeightSummary summarize(Eigen::VectorXd const& w)
{
  WeightSummary s;
  if (w.size() == 0)
    return s;
  std::vector<double> v(w.data(), w.data() + w.size());
  std::sort(v.begin(), v.end());
  s.min = v.front();
  auto const n = v.size();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.below_half = std::count_if(v.begin(), v.end(), [](double x) { return x < 0.5; });
  return s;
}

struct FitOutcome
{
  EstimatorKind kind;
  std::optional<EstimatorFit> fit;
  bool fallback = false;
  std::string error;
};

std::vector<FitOutcome> fit_all(PanelDataset const& p,
                                std::vector<EstimatorKind> const& kinds,
                                WleConfig const& cfg)
{
  std::optional<RobustFit> wfe;
  std::optional<RobustFit> wbe;
  std::vector<FitOutcome> out;
  for (auto kind : kinds) {
    FitOutcome o{kind, std::nullopt, false, {}};
    try {
      auto take = [&](RobustFit const& r) {
        o.fit = r.fit;
        o.fallback = r.fallback;
      };
      switch (kind) {
        case EstimatorKind::pols: o.fit = fit_pooled_ols(p); break;
        case EstimatorKind::be: o.fit = fit_between(p); break;
        case EstimatorKind::fe: o.fit = fit_fixed_effects(p); break;
        case EstimatorKind::re: o.fit = fit_random_effects(p); break;
        case EstimatorKind::wpols: take(fit_wpols(p, cfg)); break;
        case EstimatorKind::wbe:
          if (!wbe)
            wbe = fit_wbe(p, cfg);
          take(*wbe);
          break;
        case EstimatorKind::wfe:
          if (!wfe)
            wfe = fit_wfe(p, cfg);
          take(*wfe);
          break;
        case EstimatorKind::wre:
          if (!wfe)
            wfe = fit_wfe(p, cfg);
          if (!wbe)
            wbe = fit_wbe(p, cfg);
          take(fit_wre(p, cfg, *wfe, *wbe));
          break;
      }
    } catch (Error const& e) {
      if (is_input_error(e.code()))
        throw;
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<std::string> term_names(EstimatorFit const& f, std::vector<std::string> const& x)
{
  std::vector<std::string> names;
  if (f.has_intercept)
    names.emplace_back("(intercept)");
  names.insert(names.end(), x.begin(), x.end());
  return names;
}

void report_csv(std::ostream& out,
                std::vector<FitOutcome> const& fits,
                std::vector<std::string> const& x)
{
  out << "estimator,term,estimate,std_error,sigma_hat,weight_min,weight_median,"
         "weights_below_half,fallback\n";
  for (auto const& o : fits) {
    if (!o.fit)
      continue;
    auto const& f = *o.fit;
    auto const names = term_names(f, x);
    auto const ws = summarize(f.weights);
    for (Index j = 0; j < f.beta.size(); ++j)
      out << to_string(o.kind) << ',' << names[static_cast<std::size_t>(j)] << ','
          << format_double(f.beta[j]) << ',' << format_double(f.std_errors[j]) << ','
          << format_double(f.sigma_hat) << ',' << format_double(ws.min) << ','
          << format_double(ws.median) << ',' << ws.below_half << ','
          << (o.fallback ? "true" : "false") << '\n';
  }
}

void report_json(std::ostream& out,
                 std::vector<FitOutcome> const& fits,
                 std::vector<std::string> const& x)
{
  nlohmann::json rows = nlohmann::json::array();
  for (auto const& o : fits) {
    if (!o.fit)
      continue;
    auto const& f = *o.fit;
    auto const names = term_names(f, x);
    auto const ws = summarize(f.weights);
    for (Index j = 0; j < f.beta.size(); ++j)
      rows.push_back({{"estimator", to_string(o.kind)},
                      {"term", names[static_cast<std::size_t>(j)]},
                      {"estimate", f.beta[j]},
                      {"std_error", f.std_errors[j]},
                      {"sigma_hat", f.sigma_hat},
                      {"weight_min", ws.min},
                      {"weight_median", ws.median},
                      {"weights_below_half", ws.below_half},
                      {"fallback", o.fallback}});
  }
  out << rows.dump(2) << '\n';
}

std::string cell(double v, bool parens = false)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, parens ? "(%.4f)" : "%.4f", v);
  return buf;
}

// coefficients down, estimators across; standard errors in parentheses below
void report_text(std::ostream& out,
                 std::vector<FitOutcome> const& fits,
                 std::vector<std::string> const& x)
{
  std::vector<FitOutcome const*> ok;
  for (auto const& o : fits)
    if (o.fit)
      ok.push_back(&o);
  if (ok.empty())
    return;
  std::size_t label = 12;
  for (auto const& name : x)
    label = std::max(label, name.size() + 2);
  int const width = 12;
  auto row = [&](std::string const& head, auto const& value_of) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(label), head.c_str());
    out << buf;
    for (auto const* o : ok) {
      std::snprintf(buf, sizeof buf, "%*s", width, value_of(*o).c_str());
      out << buf;
    }
    out << '\n';
  };
  row("", [](FitOutcome const& o) { return std::string(to_string(o.kind)); });
  bool const any_intercept =
    std::any_of(ok.begin(), ok.end(), [](auto const* o) { return o->fit->has_intercept; });
  if (any_intercept) {
    row("(intercept)", [](FitOutcome const& o) {
      return o.fit->has_intercept ? cell(o.fit->beta[0]) : std::string("-");
    });
    row("", [](FitOutcome const& o) {
      return o.fit->has_intercept ? cell(o.fit->std_errors[0], true) : std::string("");
    });
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto const j = static_cast<Index>(k);
    row(x[k], [j](FitOutcome const& o) { return cell(o.fit->slopes()[j]); });
    row("", [j](FitOutcome const& o) { return cell(o.fit->slope_std_errors()[j], true); });
  }
  row("sigma_hat", [](FitOutcome const& o) { return cell(o.fit->sigma_hat); });
  row("n", [](FitOutcome const& o) { return std::to_string(o.fit->n_obs_effective); });
  row("w min", [](FitOutcome const& o) { return cell(summarize(o.fit->weights).min); });
  row("w median", [](FitOutcome const& o) { return cell(summarize(o.fit->weights).median); });
  row("w < 0.5",
      [](FitOutcome const& o) { return std::to_string(summarize(o.fit->weights).below_half); });
  row("fallback", [](FitOutcome const& o) { return std::string(o.fallback ? "yes" : "no"); });
}

void dump_weights(std::string const& path, PanelDataset const& p, std::vector<FitOutcome> const& fits)
{
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << "estimator,id,time,weight\n";
  for (auto const& o : fits) {
    if (!o.fit || !is_weighted(o.kind))
      continue;
    auto const& f = *o.fit;
    bool const per_individual = o.kind == EstimatorKind::wbe;
    for (Index r = 0; r < f.weights.size(); ++r) {
      Index const src = f.row_index[static_cast<std::size_t>(r)];
      Index const i = per_individual ? src : p.individual_of(src);
      out << to_string(o.kind) << ',' << p.ids()[static_cast<std::size_t>(i)] << ','
          << (per_individual ? std::string() : p.times()[static_cast<std::size_t>(p.period_of(src))])
          << ',' << format_double(f.weights[r]) << '\n';
    }
  }
}

/// Writes to `path`, or to `fallback` when the path is empty.
template <class F>
void emit(std::string const& path, std::ostream& fallback, F&& write)
{
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  write(out);
}

struct FitArgs
{
  std::string data, id = "id", time = "time", y = "y", x, estimators = "all";
  std::string raf = "hellinger", out, format = "text", dump_weights;
  std::optional<double> c;
  std::optional<std::uint64_t> seed;
};

int cmd_fit(FitArgs const& a, std::ostream& out, std::ostream& err)
{
  PanelColumns cols{a.id, a.time, a.y, split_names(a.x)};
  auto const kinds = parse_estimator_list(a.estimators);
  WleConfig cfg;
  cfg.raf = parse_raf(a.raf);
  cfg.bandwidth_constant = a.c;
  if (a.seed)
    cfg.seed = *a.seed;
  cfg.validate(static_cast<Index>(cols.x.size()) + 1);

  auto const panel = read_panel_csv(std::filesystem::path(a.data), cols);
  auto const fits = fit_all(panel, kinds, cfg);

  emit(a.out, out, [&](std::ostream& os) {
    if (a.format == "csv")
      report_csv(os, fits, cols.x);
    else if (a.format == "json")
      report_json(os, fits, cols.x);
    else
      report_text(os, fits, cols.x);
  });
  if (!a.dump_weights.empty())
    dump_weights(a.dump_weights, panel, fits);

  int code = kExitOk;
  for (auto const& o : fits)
    if (!o.fit) {
      err << "wlpanel fit: " << to_string(o.kind) << ": " << o.error << '\n';
      code = kExitEstimation;
    }
  return code;
}

struct SimulateArgs
{
  std::string config, out, format = "csv";
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

int cmd_simulate(SimulateArgs const& a, std::ostream& out, std::ostream& err)
{
  auto grid = load_grid_config(a.config);
  int const jobs =
    a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<SimResult> results;
  std::size_t failed = 0;
  for (std::size_t j = 0; j < grid.cells.size(); ++j) {
    auto spec = grid.cells[j];
    if (a.seed)
      spec.seed = *a.seed;
    err << "[" << j + 1 << "/" << grid.cells.size() << "] " << scenario_label(spec) << " ... "
        << std::flush;
    try {
      results.push_back(run_simulation(spec, grid.estimators, grid.wle, jobs));
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.1fs", results.back().runtime_seconds);
      err << "done in " << buf << '\n';
    } catch (Error const& e) {
      ++failed;
      err << "failed: " << e.what() << '\n';
    }
  }
  emit(a.out, out, [&](std::ostream& os) {
    if (a.format == "json")
      os << emit_json(results);
    else if (a.format == "text")
      os << emit_text(results);
    else
      os << emit_csv(results);
  });
  if (!grid.cells.empty() && failed == grid.cells.size())
    return kExitEstimation;
  return kExitOk;
}

struct BandwidthArgs
{
  double target = 0.2;
  double distance = 3.0;
  double level = 0.2;
};

int cmd_derive_bandwidth(BandwidthArgs const& a, std::ostream& out, std::ostream& err)
{
  double c = 0.0;
  try {
    c = derive_bandwidth_constant(a.target, a.distance, a.level);
  } catch (Error const& e) {
    err << "wlpanel derive-bandwidth: " << e.what() << '\n';
    return kExitInput;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "c = %.10g\nh^2 / sigma^2 = %.6g\n", c, c * c);
  out << buf << "distance  weight\n";
  for (int d = 1; d <= 5; ++d) {
    std::snprintf(buf, sizeof buf, "%8d  %.6f\n", d, single_outlier_weight(c, d, a.level));
    out << buf;
  }
  return kExitOk;
}

} // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Weighted-likelihood estimation for linear panel data models", "wlpanel"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit estimators to a long-format panel CSV");
  fit_cmd->add_option("--data", fit.data, "Panel CSV, one row per (id, time) cell")->required();
  fit_cmd->add_option("--id", fit.id, "Individual column")->capture_default_str();
  fit_cmd->add_option("--time", fit.time, "Period column")->capture_default_str();
  fit_cmd->add_option("--y", fit.y, "Response column")->capture_default_str();
  fit_cmd->add_option("--x", fit.x, "Comma-separated regressor columns")->required();
  fit_cmd->add_option("--estimators", fit.estimators, "Comma list from pols,wpols,be,wbe,fe,wfe,re,wre or all")
    ->capture_default_str();
  fit_cmd->add_option("--raf", fit.raf, "Residual adjustment function")
    ->check(CLI::IsMember({"hellinger", "identity"}))
    ->capture_default_str();
  fit_cmd->add_option("--c", fit.c, "Bandwidth constant, h = c sigma");
  fit_cmd->add_option("--seed", fit.seed, "Bootstrap root-search seed");
  fit_cmd->add_option("--out", fit.out, "Report path (stdout when omitted)");
  fit_cmd->add_option("--format", fit.format, "Report format")
    ->check(CLI::IsMember({"csv", "json", "text"}))
    ->capture_default_str();
  fit_cmd->add_option("--dump-weights", fit.dump_weights, "Write per-row weights of weighted fits");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a Monte Carlo grid");
  sim_cmd->add_option("--config", sim.config, "Grid config file")->required();
  sim_cmd->add_option("--out", sim.out, "Results path (stdout when omitted)");
  sim_cmd->add_option("--seed", sim.seed, "Override the config seed");
  sim_cmd->add_option("--jobs", sim.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  sim_cmd->add_option("--format", sim.format, "Results format")
    ->check(CLI::IsMember({"csv", "json", "text"}))
    ->capture_default_str();

  BandwidthArgs bw;
  auto* bw_cmd = app.add_subcommand("derive-bandwidth", "Bandwidth constant for a target outlier weight");
  bw_cmd->add_option("--target-weight", bw.target, "Weight of the reference point")->required();
  bw_cmd->add_option("--ref-distance", bw.distance, "Distance in model standard deviations")
    ->capture_default_str();
  bw_cmd->add_option("--level", bw.level, "Mass of the reference point (1 = lone residual)")
    ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (CLI::CallForHelp const&) {
    out << app.help();
    return kExitOk;
  } catch (CLI::CallForAllHelp const&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (CLI::ParseError const& e) {
    err << "wlpanel: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*fit_cmd)
      return cmd_fit(fit, out, err);
    if (*sim_cmd)
      return cmd_simulate(sim, out, err);
    return cmd_derive_bandwidth(bw, out, err);
  } catch (Error const& e) {
    err << "wlpanel: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitEstimation;
  }
}

} // namespace wlpanel::cli
