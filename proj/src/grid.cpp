#include "wlpanel/grid.hpp"

#include "wlpanel/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace wlpanel {

namespace {

std::string trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  auto const last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto const comma = s.find(',', start);
    auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty())
      out.push_back(std::move(item));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

struct Context
{
  std::string source;
  std::string key;
  std::size_t line = 0;

  [[noreturn]] void bad(std::string const& what) const
  {
    fail(ErrorCode::ConfigError,
         source + ":" + std::to_string(line) + ": key '" + key + "': " + what);
  }
};

template <class T>
T number(Context const& ctx, std::string const& text)
{
  T v{};
  auto const* end = text.data() + text.size();
  auto const res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    ctx.bad("cannot parse '" + text + "' as a number");
  return v;
}

template <class F>
auto wrap(Context const& ctx, F&& f)
{
  try {
    return f();
  } catch (Error const& e) {
    ctx.bad(e.what());
  }
}

} // namespace

GridConfig parse_grid_config(std::istream& in, std::string_view source)
{
  SimSpec base;
  std::vector<Dgp> dgps{Dgp::random_effects};
  std::vector<std::pair<Index, Index>> sizes{{base.n_individuals, base.n_periods}};
  std::vector<ErrorLaw> errors{ErrorLaw::normal01};
  std::vector<std::optional<Contamination>> contaminations{std::nullopt};
  GridConfig grid;
  grid.estimators.assign(kAllEstimators.begin(), kAllEstimators.end());

  std::map<std::string, std::size_t> seen;
  std::string raw;
  Context ctx{std::string(source), "", 0};
  while (std::getline(in, raw)) {
    ++ctx.line;
    auto const hash = raw.find('#');
    std::string const line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty())
      continue;
    auto const eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, ctx.source + ":" + std::to_string(ctx.line) +
                                     ": expected 'key = value', got '" + line + "'");
    ctx.key = trim(std::string_view(line).substr(0, eq));
    std::string const value = trim(std::string_view(line).substr(eq + 1));
    if (auto const [it, fresh] = seen.emplace(ctx.key, ctx.line); !fresh)
      ctx.bad("repeated (first set on line " + std::to_string(it->second) + ")");
    auto const items = split_list(value);
    if (items.empty())
      ctx.bad("empty value");
    auto const& key = ctx.key;

    if (key == "dgp") {
      dgps.clear();
      for (auto const& v : items)
        dgps.push_back(wrap(ctx, [&] { return parse_dgp(v); }));
    } else if (key == "sizes") {
      sizes.clear();
      for (auto const& v : items) {
        auto const x = v.find_first_of("xX");
        if (x == std::string::npos)
          ctx.bad("size '" + v + "' is not of the form NxT");
        sizes.emplace_back(number<Index>(ctx, trim(v.substr(0, x))),
                           number<Index>(ctx, trim(v.substr(x + 1))));
      }
    } else if (key == "errors") {
      errors.clear();
      for (auto const& v : items)
        errors.push_back(wrap(ctx, [&] { return parse_error_law(v); }));
    } else if (key == "contamination") {
      contaminations.clear();
      for (auto const& v : items) {
        if (v == "none") {
          contaminations.emplace_back(std::nullopt);
          continue;
        }
        auto const colon = v.find(':');
        if (colon == std::string::npos)
          ctx.bad("contamination '" + v + "' is not of the form scheme:m or none");
        contaminations.emplace_back(
          Contamination{wrap(ctx, [&] { return parse_scheme(trim(v.substr(0, colon))); }),
                        number<Index>(ctx, trim(v.substr(colon + 1)))});
      }
    } else if (key == "replications") {
      base.replications = number<Index>(ctx, items.front());
    } else if (key == "gamma") {
      base.gamma = number<double>(ctx, items.front());
    } else if (key == "seed") {
      base.seed = number<std::uint64_t>(ctx, items.front());
    } else if (key == "beta") {
      base.beta_true.resize(static_cast<Index>(items.size()));
      for (std::size_t k = 0; k < items.size(); ++k)
        base.beta_true[static_cast<Index>(k)] = number<double>(ctx, items[k]);
    } else if (key == "effects") {
      base.effects = wrap(ctx, [&] { return parse_effect_draw(items.front()); });
    } else if (key == "estimators") {
      if (items.size() == 1 && items.front() == "all")
        continue;
      grid.estimators.clear();
      for (auto const& v : items)
        grid.estimators.push_back(wrap(ctx, [&] { return parse_estimator(v); }));
    } else if (key == "raf") {
      grid.wle.raf = wrap(ctx, [&] { return parse_raf(items.front()); });
    } else if (key == "bandwidth_constant") {
      grid.wle.bandwidth_constant = number<double>(ctx, items.front());
    } else if (key == "target_weight") {
      grid.wle.target_outlier_weight = number<double>(ctx, items.front());
    } else if (key == "reference_distance") {
      grid.wle.reference_distance = number<double>(ctx, items.front());
    } else if (key == "reference_level") {
      grid.wle.reference_level = number<double>(ctx, items.front());
    } else if (key == "bootstrap") {
      grid.wle.n_bootstrap = number<int>(ctx, items.front());
    } else if (key == "max_iterations") {
      grid.wle.max_iterations = number<int>(ctx, items.front());
    } else {
      ctx.bad("unknown key");
    }
  }

  ctx.key = "wle settings";
  wrap(ctx, [&] { grid.wle.validate(static_cast<Index>(base.beta_true.size())); return 0; });
  for (auto dgp : dgps)
    for (auto [n, t] : sizes)
      for (auto err : errors)
        for (auto const& cont : contaminations) {
          SimSpec spec = base;
          spec.dgp = dgp;
          spec.n_individuals = n;
          spec.n_periods = t;
          spec.error_law = err;
          spec.contamination = cont;
          ctx.key = "grid cell " + std::to_string(n) + "x" + std::to_string(t);
          wrap(ctx, [&] { spec.validate(); return 0; });
          grid.cells.push_back(std::move(spec));
        }
  return grid;
}

GridConfig load_grid_config(std::filesystem::path const& path)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ConfigError, "cannot open config '" + path.string() + "'");
  return parse_grid_config(in, path.string());
}

} // namespace wlpanel
