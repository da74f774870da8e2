#pragma once

#include "wlpanel/panel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace wlpanel {

/// Column names of a long-format panel file: one row per (id, time) cell.
struct PanelColumns
{
  std::string id = "id";
  std::string time = "time";
  std::string y = "y";
  std::vector<std::string> x = {"x1", "x2"};
};

/// Reads a comma-separated long-format panel with a header row. Columns are
/// looked up by name; extra columns are ignored. Throws ParseError naming the
/// line and column, plus everything validate_panel throws.
PanelDataset read_panel_csv(std::istream& in, PanelColumns const& cols);
PanelDataset read_panel_csv(std::filesystem::path const& path, PanelColumns const& cols);

/// Writes `p` with shortest round-trip formatting of every value.
void write_panel_csv(std::ostream& out, PanelDataset const& p, PanelColumns const& cols);
void write_panel_csv(std::filesystem::path const& path,
                     PanelDataset const& p,
                     PanelColumns const& cols);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Splits one CSV record on commas; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string const& line);

} // namespace wlpanel
