#include "doctest.h"

#include "cli.hpp"

#include "wlpanel/panel_io.hpp"
#include "wlpanel/robust.hpp"
#include "wlpanel/simulation.hpp"
#include "wlpanel/wle.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace wlpanel;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out, err;
};

Run cli_run(std::vector<std::string> args)
{
  std::ostringstream out, err;
  int const code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(std::string const& name)
{
  auto const dir = fs::temp_directory_path() / "wlpanel_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(fs::path const& path, std::string const& text)
{
  std::ofstream(path) << text;
}

double parse_double(std::string const& s)
{
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

/// estimator -> term -> (estimate, std_error) from `fit --format csv`.
std::map<std::string, std::map<std::string, std::pair<double, double>>> read_fit_csv(std::string const& csv)
{
  std::map<std::string, std::map<std::string, std::pair<double, double>>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  REQUIRE(line.starts_with("estimator,term,estimate,std_error"));
  while (std::getline(in, line)) {
    auto const f = split_csv_line(line);
    out[f[0]][f[1]] = {parse_double(f[2]), parse_double(f[3])};
  }
  return out;
}

fs::path synthetic_panel()
{
  SimSpec spec;
  spec.n_individuals = 40;
  spec.n_periods = 4;
  spec.seed = 5;
  auto const path = scratch("synthetic.csv");
  write_panel_csv(path, generate_panel(spec, 0), PanelColumns{});
  return path;
}

} // namespace

TEST_CASE("fit with the identity RAF matches pooled OLS")
{
  auto const data = synthetic_panel();
  auto const r = cli_run({"fit", "--data", data.string(), "--x", "x1,x2", "--estimators",
                          "pols,wpols", "--raf", "identity", "--format", "csv"});
  REQUIRE(r.code == 0);
  auto const fits = read_fit_csv(r.out);
  REQUIRE(fits.count("pols"));
  REQUIRE(fits.count("wpols"));
  for (auto const& [term, est] : fits.at("pols")) {
    CHECK(std::abs(est.first - fits.at("wpols").at(term).first) <= 1e-10);
    CHECK(std::abs(est.second - fits.at("wpols").at(term).second) <= 1e-10);
  }

  auto const text = cli_run({"fit", "--data", data.string(), "--x", "x1,x2", "--estimators",
                             "pols,wpols"});
  CHECK(text.code == 0);
  CHECK(text.out.find("wpols") != std::string::npos);
  CHECK(text.out.find("(intercept)") != std::string::npos);
}

TEST_CASE("CLI fit reproduces the library bit for bit")
{
  auto const data = synthetic_panel();
  auto const r = cli_run({"fit", "--data", data.string(), "--x", "x1,x2", "--estimators",
                          "wfe,wre", "--format", "csv", "--seed", "17"});
  REQUIRE(r.code == 0);
  auto const fits = read_fit_csv(r.out);
  auto const p = read_panel_csv(data, PanelColumns{});
  WleConfig cfg;
  cfg.seed = 17;
  auto const wfe = fit_wfe(p, cfg);
  auto const wre = fit_wre(p, cfg, wfe, fit_wbe(p, cfg));
  CHECK(fits.at("wfe").at("x1").first == wfe.fit.beta[0]);
  CHECK(fits.at("wfe").at("x2").second == wfe.fit.std_errors[1]);
  CHECK(fits.at("wre").at("x2").first == wre.fit.beta[2]);
}

TEST_CASE("contaminated fixture: wfe near the truth, fe not")
{
  auto const data = fs::path(WLPANEL_SOURCE_DIR) / "tests/data/contaminated_5pct.csv";
  auto const r = cli_run({"fit", "--data", data.string(), "--x", "x1,x2", "--estimators", "fe,wfe",
                          "--format", "csv"});
  REQUIRE(r.code == 0);
  auto const fits = read_fit_csv(r.out);
  double const truth = -1.2;
  auto const [fe, fe_se] = fits.at("fe").at("x2");
  auto const [wfe, wfe_se] = fits.at("wfe").at("x2");
  CHECK(std::abs(wfe - truth) < 3 * wfe_se);
  CHECK(std::abs(fe - truth) > 3 * fe_se);
}

TEST_CASE("weights dump")
{
  auto const data = synthetic_panel();
  auto const dump = scratch("weights.csv");
  auto const r = cli_run({"fit", "--data", data.string(), "--x", "x1,x2", "--estimators", "wfe",
                          "--format", "json", "--dump-weights", dump.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dump);
  std::string header;
  std::getline(in, header);
  CHECK(header == "estimator,id,time,weight");
  int rows = 0;
  for (std::string line; std::getline(in, line);)
    ++rows;
  CHECK(rows == 160);
  CHECK(r.out.find("\"weight_median\"") != std::string::npos);
}

TEST_CASE("input errors exit 2 with a pointed message")
{
  auto const dup = scratch("dup.csv");
  write_text(dup, "id,time,y,x1\na,1,1,2\na,2,2,1\nb,1,3,4\nb,1,4,4\n");
  auto const r = cli_run({"fit", "--data", dup.string(), "--x", "x1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("DuplicateCell") != std::string::npos);
  CHECK(r.err.find("(b,1)") != std::string::npos);

  auto const missing = cli_run({"fit", "--data", synthetic_panel().string(), "--x", "x1,x9"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("x9") != std::string::npos);

  CHECK(cli_run({"fit", "--x", "x1"}).code == 2);
  CHECK(cli_run({"fit", "--data", "/nonexistent.csv", "--x", "x1"}).code == 2);
  CHECK(cli_run({"fit", "--data", dup.string(), "--x", "x1", "--estimators", "ols"}).code == 2);
}

TEST_CASE("estimation errors exit 3")
{
  // x1 never varies within an individual
  auto const path = scratch("flat.csv");
  write_text(path, "id,time,y,x1\n1,1,1,5\n1,2,2,5\n2,1,3,6\n2,2,5,6\n3,1,2,7\n3,2,1,7\n4,1,0,1\n4,2,2,1\n");
  auto const r = cli_run({"fit", "--data", path.string(), "--x", "x1", "--estimators", "pols,fe"});
  CHECK(r.code == 3);
  CHECK(r.err.find("NoWithinVariation") != std::string::npos);
}

TEST_CASE("simulate a single replication")
{
  auto const cfg = scratch("one.cfg");
  write_text(cfg, "dgp = II\nsizes = 20x3\nreplications = 1\nseed = 3\n");
  auto const out = scratch("one.csv");
  auto const r = cli_run({"simulate", "--config", cfg.string(), "--out", out.string(), "--jobs", "1"});
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    lines.push_back(line);
  REQUIRE(lines.size() == 9);
  CHECK(lines[0].starts_with("estimator,dgp,N,T"));
  CHECK(lines[1].starts_with("pols,II,20,3,normal,none,0,"));
  CHECK(r.err.find("[1/1]") != std::string::npos);
}

TEST_CASE("simulate rejects a malformed config")
{
  auto const cfg = scratch("bad.cfg");
  write_text(cfg, "sizes = 20x3\nreplicatoins = 5\n");
  auto const r = cli_run({"simulate", "--config", cfg.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("replicatoins") != std::string::npos);
}

TEST_CASE("derive-bandwidth")
{
  auto const r = cli_run({"derive-bandwidth", "--target-weight", "0.2", "--ref-distance", "3"});
  REQUIRE(r.code == 0);
  double const c = parse_double(r.out.substr(r.out.find("c = ") + 4));
  CHECK(std::abs(single_outlier_weight(c, 3.0, 0.2) - 0.2) <= 1e-6);
  CHECK(r.out.find("       3  0.200000") != std::string::npos);

  auto const flat = cli_run({"derive-bandwidth", "--target-weight", "0.999999"});
  CHECK(flat.code == 0);
  CHECK(parse_double(flat.out.substr(flat.out.find("c = ") + 4)) == doctest::Approx(22.4).epsilon(0.01));

  CHECK(cli_run({"derive-bandwidth", "--target-weight", "0"}).code == 2);
  CHECK(cli_run({"derive-bandwidth", "--target-weight", "1.5"}).code == 2);
  CHECK(cli_run({"derive-bandwidth"}).code == 2);
}

TEST_CASE("no subcommand is an input error")
{
  auto const r = cli_run({});
  CHECK(r.code == 2);
  CHECK(cli_run({"frobnicate"}).code == 2);
}
