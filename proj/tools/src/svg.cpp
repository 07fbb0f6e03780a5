#include "colprune/experiments/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <colprune/errors.hpp>

namespace colprune::experiments {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kLeft = 70;
constexpr int kRight = 150;
constexpr int kTop = 40;
constexpr int kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log_axis) {
  char buf[32];
  if (log_axis) {
    std::snprintf(buf, sizeof buf, "%.3g", std::pow(10.0, v));
  } else {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  int w, h;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (w - kLeft - kRight); }
  double py(double y) const { return h - kBottom - (y - y0) / (y1 - y0) * (h - kTop - kBottom); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
}

bool usable(double v, bool log_axis) { return std::isfinite(v) && (!log_axis || v > 0.0); }
double axis(double v, bool log_axis) { return log_axis ? std::log10(v) : v; }

void open_svg(std::ostringstream& os, const PlotSpec& spec) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
     << "</text>\n";
}

void draw_axes(std::ostringstream& os, const Frame& f, const PlotSpec& spec) {
  const double xa = f.px(f.x0), xb = f.px(f.x1), ya = f.py(f.y0), yb = f.py(f.y1);
  os << "<rect x=\"" << num(xa) << "\" y=\"" << num(yb) << "\" width=\"" << num(xb - xa) << "\" height=\""
     << num(ya - yb) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(ya + 15) << "\" text-anchor=\"middle\">"
       << tick_label(xv, spec.log_x) << "</text>\n";
    os << "<text x=\"" << num(xa - 5) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
       << tick_label(yv, spec.log_y) << "</text>\n";
  }
  os << "<text x=\"" << num((xa + xb) / 2) << "\" y=\"" << spec.height - 10 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << num((ya + yb) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << num((ya + yb) / 2) << ")\">" << escape(spec.y_label) << "</text>\n";
  for (const Marker& m : spec.markers) {
    if (!usable(m.x, spec.log_x)) continue;
    const double x = f.px(axis(m.x, spec.log_x));
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(yb) << "\" x2=\"" << num(x) << "\" y2=\"" << num(ya)
       << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    os << "<text x=\"" << num(x + 3) << "\" y=\"" << num(yb + 12) << "\" fill=\"gray\">" << escape(m.label)
       << "</text>\n";
  }
}

}  // namespace

PlotSpec make_plot(std::string title, std::string x_label, std::string y_label) {
  PlotSpec s;
  s.title = std::move(title);
  s.x_label = std::move(x_label);
  s.y_label = std::move(y_label);
  return s;
}

std::string render_lines(const CsvTable& table, const std::string& x_column,
                         const std::vector<std::string>& y_columns, const PlotSpec& spec) {
  const auto xs = table.values(x_column);
  std::vector<std::vector<double>> ys;
  for (const auto& c : y_columns) ys.push_back(table.values(c));

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (std::size_t s = 0; s < ys.size(); ++s) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], spec.log_x) || !usable(ys[s][i], spec.log_y)) continue;
      x0 = std::min(x0, axis(xs[i], spec.log_x));
      x1 = std::max(x1, axis(xs[i], spec.log_x));
      y0 = std::min(y0, axis(ys[s][i], spec.log_y));
      y1 = std::max(y1, axis(ys[s][i], spec.log_y));
    }
  }
  if (!std::isfinite(x0)) x0 = x1 = y0 = y1 = 0.0;
  widen(x0, x1);
  widen(y0, y1);
  if (spec.log_y) {
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
    widen(y0, y1);
  }
  const Frame f{x0, x1, y0, y1, spec.width, spec.height};

  std::ostringstream os;
  open_svg(os, spec);
  draw_axes(os, f, spec);
  for (std::size_t s = 0; s < ys.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!usable(xs[i], spec.log_x) || !usable(ys[s][i], spec.log_y)) continue;
      os << (first ? "" : " ") << num(f.px(axis(xs[i], spec.log_x))) << "," << num(f.py(axis(ys[s][i], spec.log_y)));
      first = false;
    }
    os << "\"/>\n";
    const int ly = kTop + 16 * static_cast<int>(s) + 10;
    const int lx = spec.width - kRight + 10;
    os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 18 << "\" y2=\"" << ly << "\" stroke=\""
       << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << lx + 22 << "\" y=\"" << ly + 4 << "\">" << escape(y_columns[s]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_histogram(const CsvTable& table, const std::string& column, int bins, double lo,
                             double hi, const PlotSpec& spec) {
  if (bins <= 0 || !(hi > lo)) throw InvalidArgument("histogram needs bins > 0 and hi > lo");
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double v : table.values(column)) {
    if (!std::isfinite(v) || v < lo || v > hi) continue;
    auto b = static_cast<long>((v - lo) / (hi - lo) * bins);
    counts[static_cast<std::size_t>(std::clamp<long>(b, 0, bins - 1))] += 1;
  }
  const long peak = std::max<long>(1, *std::max_element(counts.begin(), counts.end()));
  const Frame f{lo, hi, 0.0, static_cast<double>(peak), spec.width, spec.height};
  PlotSpec linear = spec;
  linear.log_x = linear.log_y = false;

  std::ostringstream os;
  open_svg(os, linear);
  draw_axes(os, f, linear);
  for (int b = 0; b < bins; ++b) {
    const double xa = f.px(lo + (hi - lo) * b / bins);
    const double xb = f.px(lo + (hi - lo) * (b + 1) / bins);
    const double yt = f.py(static_cast<double>(counts[static_cast<std::size_t>(b)]));
    os << "<rect x=\"" << num(xa) << "\" y=\"" << num(yt) << "\" width=\"" << num(xb - xa) << "\" height=\""
       << num(f.py(0.0) - yt) << "\" fill=\"" << kPalette[0] << "\" stroke=\"white\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace colprune::experiments
