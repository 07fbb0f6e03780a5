#pragma once

#include <string>
#include <vector>

#include "colprune/experiments/artifacts.hpp"

namespace colprune::experiments {

struct Marker {
  double x = 0.0;
  std::string label;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Marker> markers;  // vertical lines
  int width = 640;
  int height = 420;
};

/// Spec with the given title and axis labels, other fields at their defaults.
PlotSpec make_plot(std::string title, std::string x_label, std::string y_label);

/// Line plot of the named y columns against x_column. Non-finite points (and
/// non-positive ones on log axes) are skipped. The output depends only on the
/// table and the PlotSpec, so re-rendering a CSV gives the same bytes.
std::string render_lines(const CsvTable& table, const std::string& x_column,
                         const std::vector<std::string>& y_columns, const PlotSpec& spec);

/// Histogram of one column over [lo, hi] with `bins` equal bins.
std::string render_histogram(const CsvTable& table, const std::string& column, int bins, double lo,
                             double hi, const PlotSpec& spec);

}  // namespace colprune::experiments
