#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace oscillab {

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> xs;
  std::vector<double> ys;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// Static SVG 1.1 line plot, 960x480, deterministic byte-for-byte: fixed
/// number formatting, no timestamps. Non-finite samples are dropped and long
/// series are strided down to keep paths small.
inline void write_svg_plot(std::ostream& os, const std::string& title,
                           std::span<const SvgSeries> series) {
  constexpr double W = 960, H = 480;
  constexpr double ml = 60, mr = 20, mt = 34, mb = 36;

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (!any) {
        xmin = xmax = s.xs[i];
        ymin = ymax = s.ys[i];
        any = true;
      } else {
        xmin = std::min(xmin, s.xs[i]); xmax = std::max(xmax, s.xs[i]);
        ymin = std::min(ymin, s.ys[i]); ymax = std::max(ymax, s.ys[i]);
      }
    }
  }
  if (!any) { xmin = ymin = -1; xmax = ymax = 1; }
  if (xmax - xmin < 1e-300) { xmin -= 1; xmax += 1; }
  if (ymax - ymin < 1e-300) { ymin -= 1; ymax += 1; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad; ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
  using detail::svg_num;

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        "width=\"960\" height=\"480\" viewBox=\"0 0 960 480\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"480\" fill=\"#ffffff\"/>\n";
  os << "<rect x=\"" << svg_num(ml) << "\" y=\"" << svg_num(mt) << "\" width=\""
     << svg_num(W - ml - mr) << "\" height=\"" << svg_num(H - mt - mb)
     << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
  os << "<text x=\"" << svg_num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        "font-family=\"monospace\" font-size=\"15\">" << title << "</text>\n";
  // Axis extent labels.
  os << "<text x=\"" << svg_num(ml) << "\" y=\"" << svg_num(H - 12)
     << "\" font-family=\"monospace\" font-size=\"11\">t=" << svg_num(xmin)
     << "</text>\n";
  os << "<text x=\"" << svg_num(W - mr) << "\" y=\"" << svg_num(H - 12)
     << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">t="
     << svg_num(xmax) << "</text>\n";
  os << "<text x=\"8\" y=\"" << svg_num(py(ymin))
     << "\" font-family=\"monospace\" font-size=\"11\">" << svg_num(ymin)
     << "</text>\n";
  os << "<text x=\"8\" y=\"" << svg_num(py(ymax) + 10)
     << "\" font-family=\"monospace\" font-size=\"11\">" << svg_num(ymax)
     << "</text>\n";
  if (ymin < 0 && ymax > 0) {
    os << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(py(0)) << "\" x2=\""
       << svg_num(W - mr) << "\" y2=\"" << svg_num(py(0))
       << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  }

  double legend_y = mt + 16;
  for (const auto& s : series) {
    const std::size_t n = s.xs.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 3800);
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (!first) os << ' ';
      os << svg_num(px(s.xs[i])) << ',' << svg_num(py(s.ys[i]));
      first = false;
    }
    os << "\"/>\n";
    os << "<text x=\"" << svg_num(W - mr - 8) << "\" y=\"" << svg_num(legend_y)
       << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" fill=\""
       << s.color << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
}

}  // namespace oscillab
