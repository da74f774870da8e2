#include "wlpanel/panel_io.hpp"

#include "wlpanel/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace wlpanel {

std::vector<std::string> split_csv_line(std::string const& line)
{
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char const c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  for (auto& f : fields) {
    auto const first = f.find_first_not_of(" \t");
    auto const last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
  }
  return fields;
}

std::string format_double(double v)
{
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_number(std::string const& text, std::size_t line, std::string const& column)
{
  double v = 0.0;
  auto const* end = text.data() + text.size();
  auto const res = std::from_chars(text.data(), end, v);
  if (res.ec == std::errc() && res.ptr == end)
    return v;
  // from_chars rejects "inf"/"nan" spellings with a sign, and a leading '+'
  std::string lowered = text;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lowered == "nan" || lowered == "inf" || lowered == "+inf" || lowered == "-inf" ||
      lowered == "na")
    fail(ErrorCode::NonFiniteValue,
         "line " + std::to_string(line) + ", column '" + column + "': value '" + text + "'");
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column '" + column +
                                "': cannot parse '" + text + "' as a number");
}

} // namespace

PanelDataset read_panel_csv(std::istream& in, PanelColumns const& cols)
{
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::ParseError, "empty input: expected a header row");
  auto const header = split_csv_line(line);
  auto locate = [&](std::string const& name, char const* role) {
    auto const it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      fail(ErrorCode::ParseError,
           std::string(role) + " column '" + name +
             "' not found in header; expected long format with one row per "
             "(id, time) cell and columns id,time,y,x1..xK");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t const id_col = locate(cols.id, "id");
  std::size_t const time_col = locate(cols.time, "time");
  std::size_t const y_col = locate(cols.y, "response");
  if (cols.x.empty())
    fail(ErrorCode::InvalidArgument, "at least one regressor column is required");
  std::vector<std::size_t> x_cols;
  for (auto const& name : cols.x)
    x_cols.push_back(locate(name, "regressor"));

  std::vector<RawRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto const fields = split_csv_line(line);
    if (fields.size() != header.size())
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                    std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    RawRow row;
    row.id = fields[id_col];
    row.time = fields[time_col];
    row.y = parse_number(fields[y_col], line_no, cols.y);
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      row.x.push_back(parse_number(fields[x_cols[k]], line_no, cols.x[k]));
    rows.push_back(std::move(row));
  }
  return validate_panel(rows);
}

PanelDataset read_panel_csv(std::filesystem::path const& path, PanelColumns const& cols)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  return read_panel_csv(in, cols);
}

void write_panel_csv(std::ostream& out, PanelDataset const& p, PanelColumns const& cols)
{
  if (static_cast<Index>(cols.x.size()) != p.n_regressors())
    fail(ErrorCode::InvalidArgument, "write_panel_csv: " + std::to_string(cols.x.size()) +
                                       " regressor names for " +
                                       std::to_string(p.n_regressors()) + " columns");
  out << cols.id << ',' << cols.time << ',' << cols.y;
  for (auto const& name : cols.x)
    out << ',' << name;
  out << '\n';
  for (Index r = 0; r < p.n_obs(); ++r) {
    out << p.ids()[static_cast<std::size_t>(p.individual_of(r))] << ','
        << p.times()[static_cast<std::size_t>(p.period_of(r))] << ','
        << format_double(p.y()[r]);
    for (Index k = 0; k < p.n_regressors(); ++k)
      out << ',' << format_double(p.x()(r, k));
    out << '\n';
  }
}

void write_panel_csv(std::filesystem::path const& path,
                     PanelDataset const& p,
                     PanelColumns const& cols)
{
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  write_panel_csv(out, p, cols);
}

} // namespace wlpanel
