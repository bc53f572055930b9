#pragma once

// Minimal line/step plots written as standalone SVG. The config hash goes into
// <metadata> and a visible footer.

#include <string>
#include <vector>

namespace superosc {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct PlotSpan {  // shaded x interval
  double x0 = 0.0;
  double x1 = 0.0;
  std::string color = "#ffe08a";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<PlotSpan> spans;
  bool log_y = false;
  double width = 720.0;
  double height = 420.0;
};

std::string render_svg(const Plot& plot, const std::string& config_hash);
void write_svg(const std::string& path, const Plot& plot, const std::string& config_hash);

}  // namespace superosc
