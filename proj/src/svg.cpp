#include "cqnls/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cqnls/errors.hpp"

namespace cqnls {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Maps data values on one axis to pixels, in log10 space for log axes.
class Axis {
 public:
  Axis(double lo, double hi, bool log, double pixel_lo, double pixel_hi) : log_(log), p0_(pixel_lo), p1_(pixel_hi) {
    lo_ = log ? std::log10(lo) : lo;
    hi_ = log ? std::log10(hi) : hi;
    if (hi_ - lo_ < 1e-12 * std::max(1.0, std::abs(lo_))) {
      lo_ -= log ? 0.5 : std::max(1.0, std::abs(lo_) * 0.1);
      hi_ += log ? 0.5 : std::max(1.0, std::abs(hi_) * 0.1);
    } else {
      const double pad = 0.05 * (hi_ - lo_);
      lo_ -= pad;
      hi_ += pad;
    }
  }

  double pixel(double v) const {
    const double t = ((log_ ? std::log10(v) : v) - lo_) / (hi_ - lo_);
    return p0_ + t * (p1_ - p0_);
  }

  /// Decades on log axes, five evenly spaced values otherwise.
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log_) {
      for (double e = std::ceil(lo_); e <= std::floor(hi_); e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.empty()) out = {std::pow(10.0, 0.5 * (lo_ + hi_))};
    } else {
      for (int i = 0; i <= 4; ++i) out.push_back(lo_ + (hi_ - lo_) * i / 4.0);
    }
    return out;
  }

 private:
  bool log_;
  double lo_, hi_, p0_, p1_;
};

}  // namespace

std::string render_svg(const Plot& plot) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidArgument("series '" + s.label + "' has a non-finite point");
      if ((plot.log_x && x <= 0.0) || (plot.log_y && y <= 0.0)) {
        throw InvalidArgument("series '" + s.label + "' has a value <= 0 on a log axis");
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin <= xmax)) throw InvalidArgument("plot has no data points");
  for (const auto& r : plot.references) {
    if (plot.log_y && r.y <= 0.0) throw InvalidArgument("reference line '" + r.label + "' is <= 0 on a log axis");
    ymin = std::min(ymin, r.y);
    ymax = std::max(ymax, r.y);
  }

  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const Axis ax(xmin, xmax, plot.log_x, x0, x1);
  const Axis ay(ymin, ymax, plot.log_y, y0, y1);

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
    << "</text>\n"
    << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ax.ticks()) {
    const double px = ax.pixel(t);
    o << "<line x1=\"" << num(px) << "\" y1=\"" << y0 << "\" x2=\"" << num(px) << "\" y2=\"" << y0 + 5
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(px) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double py = ay.pixel(t);
    o << "<line x1=\"" << x0 - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << x0 << "\" y2=\"" << num(py)
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << x0 - 8 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  o << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n"
    << "<text x=\"18\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (y0 + y1) / 2 << ")\">" << escape(plot.y_label) << "</text>\n";

  double legend_y = kTop + 10.0;
  const double legend_x = x1 + 15.0;
  for (std::size_t i = 0; i < plot.references.size(); ++i) {
    const auto& r = plot.references[i];
    const double py = ay.pixel(r.y);
    o << "<line x1=\"" << x0 << "\" y1=\"" << num(py) << "\" x2=\"" << x1 << "\" y2=\"" << num(py)
      << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n"
      << "<line x1=\"" << legend_x << "\" y1=\"" << legend_y << "\" x2=\"" << legend_x + 20 << "\" y2=\"" << legend_y
      << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n"
      << "<text x=\"" << legend_x + 26 << "\" y=\"" << legend_y + 4 << "\">" << escape(r.label) << "</text>\n";
    legend_y += 18.0;
  }
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kColors[i % kColors.size()];
    if (s.points.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) o << num(ax.pixel(x)) << "," << num(ay.pixel(y)) << " ";
      o << "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      o << "<circle cx=\"" << num(ax.pixel(x)) << "\" cy=\"" << num(ay.pixel(y)) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
    o << "<circle cx=\"" << legend_x + 10 << "\" cy=\"" << legend_y << "\" r=\"3\" fill=\"" << color << "\"/>\n"
      << "<text x=\"" << legend_x + 26 << "\" y=\"" << legend_y + 4 << "\">" << escape(s.label) << "</text>\n";
    legend_y += 18.0;
  }
  o << "</svg>\n";
  return o.str();
}

void emit_svg(const Plot& plot, const std::filesystem::path& path) {
  const std::string doc = render_svg(plot);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc;
}

}  // namespace cqnls
