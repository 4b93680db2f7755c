#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace acer {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

/// Writes a self-contained SVG line chart (axes, tick labels, legend).
/// No external plotting dependency; output is valid XML.
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

}  // namespace acer
