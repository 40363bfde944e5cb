#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cqnls {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Dashed horizontal line at height y.
struct ReferenceLine {
  std::string label;
  double y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  std::vector<ReferenceLine> references;
};

/// Self-contained SVG document with axes, markers joined by lines, reference lines and one
/// shared legend. Throws InvalidArgument when no series has points or a log axis meets a value <= 0.
std::string render_svg(const Plot& plot);
void emit_svg(const Plot& plot, const std::filesystem::path& path);

}  // namespace cqnls
