#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gepa/error.hpp"

namespace gepa {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMargin = 60.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

struct Scale {
  double lo, hi;
  double map(double v, double pixel_lo, double pixel_hi) const {
    if (hi == lo) return 0.5 * (pixel_lo + pixel_hi);
    return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

Scale make_scale(const std::vector<double>& values) {
  double lo = values.front(), hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) {  // widen a degenerate range symmetrically
    lo -= 1.0;
    hi += 1.0;
  }
  return {lo, hi};
}

std::string header() {
  return std::string("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n") +
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n" +
         "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"white\"/>\n";
}

std::string axes(const Scale& x, const Scale& y, const std::string& x_label,
                 const std::string& y_label) {
  std::string out;
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" +
         num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
         "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x.lo + (x.hi - x.lo) * i / 4.0;
    const double fy = y.lo + (y.hi - y.lo) * i / 4.0;
    const double px = x.map(fx, kMargin, kWidth - kMargin);
    const double py = y.map(fy, kHeight - kMargin, kMargin);
    out += "<text x=\"" + num(px) + "\" y=\"" + num(kHeight - kMargin + 20.0) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + escape(num(fx)) + "</text>\n";
    out += "<text x=\"" + num(kMargin - 8.0) + "\" y=\"" + num(py + 4.0) +
           "\" font-size=\"11\" text-anchor=\"end\">" + escape(num(fy)) + "</text>\n";
  }
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 15.0) +
         "\" font-size=\"13\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + num(kHeight / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + num(kHeight / 2) +
         ")\">" + escape(y_label) + "</text>\n";
  return out;
}

}  // namespace

std::string svg_line_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::string& x_label, const std::string& y_label) {
  if (xs.empty() || xs.size() != ys.size())
    raise(ErrorKind::invalid_argument, "svg_line_plot needs matching non-empty series");
  const Scale x = make_scale(xs);
  const Scale y = make_scale(ys);

  std::string svg = header();
  svg += axes(x, y, x_label, y_label);
  std::string points;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) points += ' ';
    points += num(x.map(xs[i], kMargin, kWidth - kMargin)) + "," +
              num(y.map(ys[i], kHeight - kMargin, kMargin));
  }
  svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    svg += "<circle cx=\"" + num(x.map(xs[i], kMargin, kWidth - kMargin)) + "\" cy=\"" +
           num(y.map(ys[i], kHeight - kMargin, kMargin)) + "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string svg_scatter_path_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<std::string>& point_labels,
                                  const std::string& x_label, const std::string& y_label) {
  if (xs.empty() || xs.size() != ys.size() || xs.size() != point_labels.size())
    raise(ErrorKind::invalid_argument, "svg_scatter_path_plot needs matching non-empty series");
  const Scale x = make_scale(xs);
  const Scale y = make_scale(ys);

  std::string svg = header();
  svg += axes(x, y, x_label, y_label);
  std::string points;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) points += ' ';
    points += num(x.map(xs[i], kMargin, kWidth - kMargin)) + "," +
              num(y.map(ys[i], kHeight - kMargin, kMargin));
  }
  svg += "<polyline points=\"" + points +
         "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::string px = num(x.map(xs[i], kMargin, kWidth - kMargin));
    const std::string py = num(y.map(ys[i], kHeight - kMargin, kMargin));
    svg += "<circle cx=\"" + px + "\" cy=\"" + py + "\" r=\"4\" fill=\"#d62728\"/>\n";
    svg += "<text x=\"" + px + "\" y=\"" + py +
           "\" dx=\"6\" dy=\"-6\" font-size=\"10\">" + escape(point_labels[i]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gepa
