#include <algorithm>
#include <cstdio>
#include <string>

#include "gos/analysis.hpp"

namespace gos {

namespace {

std::string fixed(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3f", value);
  return buffer;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string render_palette_svg(const PaletteLayout& layout, int width, int height) {
  const std::size_t n = layout.columns.size();
  const std::size_t k = layout.groups.size();
  const double legend = 180.0;
  const double plot_w = std::max(1.0, width - legend - 20.0);
  const double plot_h = std::max(1.0, height - 40.0);

  double lo = 0.0, hi = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    lo = std::min(lo, layout.origins[j]);
    hi = std::max(hi, layout.origins[j] + 1.0);
  }
  const double span = hi - lo;
  auto x_at = [&](std::size_t j) { return 10.0 + (n <= 1 ? plot_w / 2.0 : plot_w * static_cast<double>(j) / (n - 1)); };
  // SVG y grows downwards; stack boundaries grow upwards.
  auto y_at = [&](double value) { return 20.0 + plot_h * (hi - value) / span; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                    std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  for (std::size_t band = 0; band < k; ++band) {
    std::vector<double> lower(n), upper(n);
    for (std::size_t j = 0; j < n; ++j) {
      double below = 0.0;
      for (std::size_t b = 0; b < band; ++b) below += layout.columns[j][b];
      lower[j] = layout.origins[j] + below;
      upper[j] = lower[j] + layout.columns[j][band];
    }
    std::string points;
    if (n == 1) {
      double x = x_at(0);
      points = fixed(x - 5) + "," + fixed(y_at(upper[0])) + " " + fixed(x + 5) + "," + fixed(y_at(upper[0])) + " " +
               fixed(x + 5) + "," + fixed(y_at(lower[0])) + " " + fixed(x - 5) + "," + fixed(y_at(lower[0]));
    } else {
      for (std::size_t j = 0; j < n; ++j) points += fixed(x_at(j)) + "," + fixed(y_at(upper[j])) + " ";
      for (std::size_t j = n; j-- > 0;) {
        points += fixed(x_at(j)) + "," + fixed(y_at(lower[j]));
        if (j > 0) points += " ";
      }
    }
    svg += "<polygon class=\"band\" data-group=\"" + std::to_string(layout.groups[band]) + "\" fill=\"" +
           escape_xml(layout.colors[band]) + "\" stroke=\"none\" points=\"" + points + "\"><title>" +
           escape_xml(layout.group_names[band]) + "</title></polygon>\n";
  }

  for (std::size_t band = 0; band < k; ++band) {
    double y = 20.0 + 20.0 * static_cast<double>(band);
    double x = width - legend;
    svg += "<rect x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" width=\"12\" height=\"12\" fill=\"" +
           escape_xml(layout.colors[band]) + "\"/>\n";
    svg += "<text x=\"" + fixed(x + 18) + "\" y=\"" + fixed(y + 10) + "\" font-size=\"11\" font-family=\"sans-serif\">" +
           escape_xml(layout.group_names[band]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gos
