#pragma once

// CSV and SVG emission. CSV: ',' separator, '.' decimal, LF, 17 significant digits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace monoembed::app {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void csv_row(std::ostream& os, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << num(values[i]);
  }
  os << '\n';
}

struct Polyline {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
  bool markers = false;  // draw points instead of a connected line
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Minimal line chart: frame, ticks, axis labels, legend, polylines. Self-contained.
inline void write_svg_chart(std::ostream& os, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel, double x0, double x1, double y0, double y1,
                            const std::vector<Polyline>& lines) {
  const double W = 640, H = 480, L = 70, R = 170, T = 40, B = 60;
  const double pw = W - L - R;
  const double ph = H - T - B;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };
  char buf[128];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto tick = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return std::string(buf);
  };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << fmt(pw) << "\" height=\""
     << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    os << "<line x1=\"" << fmt(sx(xv)) << "\" y1=\"" << fmt(T + ph) << "\" x2=\"" << fmt(sx(xv))
       << "\" y2=\"" << fmt(T + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(T + ph + 18)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << tick(xv) << "</text>\n";
    os << "<line x1=\"" << fmt(L - 5) << "\" y1=\"" << fmt(sy(yv)) << "\" x2=\"" << L
       << "\" y2=\"" << fmt(sy(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(L - 8) << "\" y=\"" << fmt(sy(yv) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << tick(yv) << "</text>\n";
  }
  os << "<text x=\"" << fmt(L + pw / 2) << "\" y=\"" << fmt(H - 18)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"18\" y=\"" << fmt(T + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << fmt(T + ph / 2) << ")\">" << xml_escape(ylabel)
     << "</text>\n";

  os << "<g clip-path=\"url(#plot)\">\n";
  os << "<clipPath id=\"plot\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << fmt(pw)
     << "\" height=\"" << fmt(ph) << "\"/></clipPath>\n";
  for (const auto& line : lines) {
    if (line.points.empty()) continue;
    if (line.markers) {
      for (const auto& [x, y] : line.points) {
        os << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y)) << "\" r=\"2\" fill=\""
           << line.color << "\"/>\n";
      }
      continue;
    }
    os << "<polyline fill=\"none\" stroke=\"" << line.color << "\" stroke-width=\"1.5\"";
    if (line.dashed) os << " stroke-dasharray=\"6 3\"";
    os << " points=\"";
    for (std::size_t i = 0; i < line.points.size(); ++i) {
      if (i) os << ' ';
      os << fmt(sx(line.points[i].first)) << ',' << fmt(sy(line.points[i].second));
    }
    os << "\"/>\n";
  }
  os << "</g>\n";

  double ly = T + 10;
  for (const auto& line : lines) {
    const double lx = L + pw + 12;
    os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 24)
       << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << line.color << "\" stroke-width=\"2\"";
    if (line.dashed) os << " stroke-dasharray=\"6 3\"";
    os << "/>\n";
    os << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">"
       << xml_escape(line.label) << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
}

}  // namespace monoembed::app
