#pragma once

// Artifacts: columnar text (the data contract), SVG line plots, and the run
// report in JSON plus a plain-text summary built from the same records.

#include <filesystem>
#include <string>
#include <vector>

#include "checks.hpp"

namespace relqm::cli {

struct Column {
  std::string name;
  std::string unit;
};

/// Space-separated columns under a `#` header naming each column and unit.
/// Values are written with 17 significant digits.
void write_columns(const std::filesystem::path& path, const std::string& title, const std::vector<Column>& columns,
                   const std::vector<std::vector<double>>& rows);

struct Series {
  explicit Series(std::string l = {}, bool with_markers = false) : label(std::move(l)), markers(with_markers) {}

  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
  std::vector<std::string> marker_labels;  // drawn next to each marker when non-empty
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool loglog = false;
  std::string annotation;  // drawn in the top-left corner
};

void write_svg(const std::filesystem::path& path, const PlotStyle& style, const std::vector<Series>& series);

struct RunReport {
  std::string subcommand;
  std::string config_path;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<checks::CheckResult> checks;
  std::vector<std::string> artifacts;
  double seconds = 0.0;

  bool passed() const;
};

/// Writes report.json and report.txt into `dir`.
void write_report(const std::filesystem::path& dir, const RunReport& report);

/// The plain-text summary (also printed to stdout).
std::string summary_text(const RunReport& report);

}  // namespace relqm::cli
