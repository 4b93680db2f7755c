#include "acer/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace acer {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series) {
  constexpr double W = 860, H = 520;
  constexpr double L = 70, R = 20, T = 44, B = 56;  // margins
  const double plot_w = W - L - R, plot_h = H - T - B;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
    for (double v : s.y) { y_min = std::min(y_min, v); y_max = std::max(y_max, v); }
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
    x_min = 0; x_max = 1; y_min = 0; y_max = 1;
  }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  const auto sx = [&](double x) { return L + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto sy = [&](double y) { return T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg: " + path.string());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">" << escape_xml(title) << "</text>\n";

  // axes
  out << "<line x1=\"" << L << "\" y1=\"" << T + plot_h << "\" x2=\"" << L + plot_w
      << "\" y2=\"" << T + plot_h << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << T + plot_h
      << "\" stroke=\"black\"/>\n";

  // ticks: 5 per axis
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    out << "<line x1=\"" << sx(fx) << "\" y1=\"" << T + plot_h << "\" x2=\"" << sx(fx)
        << "\" y2=\"" << T + plot_h + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << sx(fx) << "\" y=\"" << T + plot_h + 20
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fx)
        << "</text>\n"
        << "<line x1=\"" << L - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << L << "\" y2=\""
        << sy(fy) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << L - 8 << "\" y=\"" << sy(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << L + plot_w / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">"
      << escape_xml(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << T + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 " << T + plot_h / 2 << ")\">"
      << escape_xml(y_label) << "</text>\n";

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b"};
  int color_idx = 0;
  double legend_y = T + 14;
  for (const auto& s : series) {
    const std::string color =
        s.color.empty() ? kPalette[color_idx % 6] : s.color;
    ++color_idx;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      out << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i]));
      if (i + 1 < n) out << ' ';
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<line x1=\"" << L + plot_w - 150 << "\" y1=\"" << legend_y << "\" x2=\""
          << L + plot_w - 120 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << L + plot_w - 114 << "\" y=\"" << legend_y + 4
          << "\" font-size=\"12\" font-family=\"sans-serif\">" << escape_xml(s.label)
          << "</text>\n";
      legend_y += 18;
    }
  }
  out << "</svg>\n";
}

}  // namespace acer
